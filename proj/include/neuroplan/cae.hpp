#pragma once

#include <vector>

#include "neuroplan/geom.hpp"
#include "neuroplan/nn.hpp"
#include "neuroplan/training.hpp"

namespace neuroplan {

// Obstacle point clouds are fed to the networks with coordinates divided by
// the region half-extent, so everything lives in [-1, 1].
inline constexpr double kCoordScale = 1.0 / 20.0;

struct CaeSpec {
    int dim = 2;
    double lambda = 1e-3;
    int cloud_size = kDefaultCloudSize;

    int input_size() const { return cloud_size * dim; }
    std::vector<int> encoder_hidden() const {
        return dim == 2 ? std::vector<int>{512, 256, 128} : std::vector<int>{786, 512, 256};
    }
    int latent_size() const { return dim == 2 ? 28 : 60; }
    void validate() const;
};

MlpModel make_cae_encoder(const CaeSpec& spec, std::uint64_t seed);
MlpModel make_cae_decoder(const CaeSpec& spec, std::uint64_t seed);

// Flattened, scale-normalized cloud row (x0,y0,x1,y1,...).
Vector flatten_cloud(const PointCloud& pc, double scale);
Matrix flatten_clouds(const std::vector<PointCloud>& clouds, double scale);

Vector encode(const MlpModel& encoder, const PointCloud& pc);

// Mean squared reconstruction error over the batch plus lambda times the sum
// of squared encoder weights (weight matrices only).
double cae_loss(const MlpModel& encoder, const MlpModel& decoder, const Matrix& batch,
                double lambda);

double encoder_weight_sq_sum(const MlpModel& encoder);

// Mean ||x - dec(enc(x))||^2 over rows, no regularizer.
double reconstruction_mse(const MlpModel& encoder, const MlpModel& decoder,
                          const Matrix& batch);

// Mean ||x - mean(batch)||^2 over rows: the loss of the best constant
// predictor, the yardstick for "did the autoencoder learn anything".
double batch_variance(const Matrix& batch);

TrainReport train_cae(const CaeSpec& spec, const std::vector<PointCloud>& clouds,
                      const TrainOptions& opts, MlpModel& encoder, MlpModel& decoder);

} // namespace neuroplan
