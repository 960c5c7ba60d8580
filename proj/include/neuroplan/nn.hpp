#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "neuroplan/rng.hpp"

namespace neuroplan {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Dropout is active while training and, for the stochastic sampler, at
// inference too; eval_deterministic bypasses it entirely.
enum class Mode { train, eval_stochastic, eval_deterministic };

struct LinearLayer {
    Matrix W;              // out x in
    Vector b;              // out
    bool has_prelu = false;
    bool has_dropout = false;
    double prelu_slope = 0.25; // channel-shared

    int in_size() const { return static_cast<int>(W.cols()); }
    int out_size() const { return static_cast<int>(W.rows()); }
};

struct MlpModel {
    std::vector<LinearLayer> layers;
    double dropout_p = 0.0;
    // Inputs are multiplied by this before the first layer's consumer applies
    // it; stored with the weights so planners scale consistently.
    double input_scale = 1.0;
    // Free slot for trainer metadata (the sampler trainer records the longest
    // training-path node count here).
    std::uint32_t aux_hint = 0;

    int input_size() const { return layers.front().in_size(); }
    int output_size() const { return layers.back().out_size(); }
    void check_shapes() const; // throws on non-composing layers
};

// Activations recorded by a train-mode forward pass, consumed by backward.
struct ForwardCache {
    std::vector<Matrix> inputs; // input to each layer, N x in
    std::vector<Matrix> pre;    // pre-activation, N x out
    std::vector<Matrix> masks;  // inverted-dropout masks (empty when unused)
    Matrix output;
};

Matrix forward_batch(const MlpModel& m, const Matrix& X, Mode mode, Rng* rng,
                     ForwardCache* cache = nullptr);

// Re-runs the stack with the dropout masks of a previous train-mode pass.
// Finite-difference gradient checks depend on this.
Matrix forward_with_masks(const MlpModel& m, const Matrix& X,
                          const std::vector<Matrix>& masks);

Vector forward(const MlpModel& m, const Vector& x, Mode mode, Rng* rng = nullptr);

struct Gradients {
    std::vector<Matrix> dW;
    std::vector<Vector> db;
    std::vector<double> dslope;

    static Gradients zeros_like(const MlpModel& m);
    void add_scaled(const Gradients& other, double s);
};

// dY is dLoss/dOutput (N x out). Returns parameter gradients; when dX is
// given, also the gradient with respect to the batch input (for chained
// models such as an encoder feeding a decoder).
Gradients backward(const MlpModel& m, const ForwardCache& cache, const Matrix& dY,
                   Matrix* dX = nullptr);

struct AdagradState {
    std::vector<Matrix> accW;
    std::vector<Vector> accb;
    std::vector<double> accslope;
    double learning_rate = 0.1;
    double epsilon = 1e-10;

    static AdagradState for_model(const MlpModel& m, double lr);
};

void adagrad_step(MlpModel& m, const Gradients& g, AdagradState& st);

// Uniform +-1/sqrt(fan_in) init, PReLU slopes 0.25.
MlpModel make_mlp(const std::vector<int>& sizes, const std::vector<bool>& prelu,
                  const std::vector<bool>& dropout, double dropout_p, std::uint64_t seed);

void save_model(const MlpModel& m, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

} // namespace neuroplan
