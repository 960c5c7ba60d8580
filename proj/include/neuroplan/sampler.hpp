#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "neuroplan/cae.hpp"
#include "neuroplan/geom.hpp"
#include "neuroplan/nn.hpp"
#include "neuroplan/training.hpp"

namespace neuroplan {

// One near-optimal demonstration path plus the workspace it was planned in.
struct TrainingPath {
    std::uint64_t workspace_seed = 0;
    Path states;
};

// Twelve layers: eleven PReLU hidden layers (dropout on the first ten) and a
// linear output of the configuration dimension.
struct SamplerSpec {
    int config_dim = 2;
    int latent_size = 28; // 0 for the single-environment case (no encoding)
    std::vector<int> hidden = {1280, 1024, 896, 768, 512, 384, 256, 128, 64, 64, 32};
    double dropout_p = 0.5;

    int input_size() const { return latent_size + 2 * config_dim; }
    void validate() const;
};

MlpModel make_sampler_model(const SamplerSpec& spec, std::uint64_t seed);

// Stochastic next-configuration proposal: dropout stays active, so repeated
// calls with the same inputs explore the learned region.
Config next_sample(const MlpModel& m, const Vector& latent, const Config& x_t,
                   const Config& x_goal, const std::array<double, 3>& bounds, Rng& rng,
                   Mode mode = Mode::eval_stochastic);

struct PairDataset {
    Matrix inputs;  // N x (latent + 2d), configs pre-scaled
    Matrix targets; // N x d, pre-scaled
    int config_dim = 0;
    int latent_size = 0;
    int dropped_paths = 0;   // paths shorter than 2 states
    int longest_path = 0;    // node count of the longest contributing path

    Eigen::Index size() const { return inputs.rows(); }
};

// One (x_t -> x_{t+1}) pair per consecutive path segment, goal fixed to the
// path's final state, workspace latent prepended.
PairDataset make_training_pairs(const std::vector<TrainingPath>& paths,
                                const std::map<std::uint64_t, Vector>& latents,
                                const SamplerSpec& spec);

// Mean over pairs of the squared prediction error (deterministic forward).
double sampler_loss(const MlpModel& m, const Matrix& inputs, const Matrix& targets);

TrainReport train_sampler(const SamplerSpec& spec, const PairDataset& dataset,
                          const TrainOptions& opts, MlpModel& model);

} // namespace neuroplan
