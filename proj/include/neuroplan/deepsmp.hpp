#pragma once

#include "neuroplan/sampler.hpp"
#include "neuroplan/smp.hpp"

namespace neuroplan {

struct DeepSmpConfig {
    int n = 10000;       // total iterations
    int n_limit = 0;     // neural-phase iterations; must stay well below n
    const MlpModel* encoder = nullptr;       // optional when latent_size == 0
    const MlpModel* sampler_model = nullptr; // required
    PlannerParams smp;

    void validate() const;
};

// Recursive sample generator of the hybrid scheme: feeds its own previous
// (clamped) output back as the next current-state input, and restarts from
// x_init whenever a sample lands in the goal ball.
class NeuralChain {
public:
    NeuralChain(const MlpModel& model, Vector latent, const Config& x_init,
                const Config& x_goal, double goal_radius, const std::array<double, 3>& bounds);

    Config next(Rng& rng);
    const Config& current() const { return x_t_; }

private:
    const MlpModel& model_;
    Vector latent_;
    Config x_init_;
    Config x_goal_;
    Config x_t_;
    double goal_radius_;
    std::array<double, 3> bounds_;
};

// Neural samples for the first n_limit iterations, then the goal-biased
// uniform sampler; with n_limit = 0 this is exactly uniform RRT*.
class HybridSampler : public SamplerSource {
public:
    HybridSampler(NeuralChain* chain, int n_limit) : chain_(chain), n_limit_(n_limit) {}
    Config next(const PlanContext& ctx, Rng& rng) override;
    std::string kind() const override { return "deepsmp"; }

private:
    NeuralChain* chain_;
    int n_limit_;
    UniformSampler uniform_;
};

// Two chains seeded at either endpoint whose roles swap every iteration.
class BidirectionalHybridSampler : public SamplerSource {
public:
    BidirectionalHybridSampler(NeuralChain* forward, NeuralChain* backward, int n_limit)
        : forward_(forward), backward_(backward), n_limit_(n_limit) {}
    Config next(const PlanContext& ctx, Rng& rng) override;
    std::string kind() const override { return "deepsmp-bi"; }

private:
    NeuralChain* forward_;
    NeuralChain* backward_;
    int n_limit_;
    UniformSampler uniform_;
};

PlanResult deepsmp_plan(const Problem& problem, const PointCloud& cloud,
                        const DeepSmpConfig& cfg);

PlanResult deepsmp_plan_bidirectional(const Problem& problem, const PointCloud& cloud,
                                      const DeepSmpConfig& cfg);

// Longest path (node count) in the training data; the default neural-phase
// length.
int compute_n_limit(const std::vector<TrainingPath>& paths);

} // namespace neuroplan
