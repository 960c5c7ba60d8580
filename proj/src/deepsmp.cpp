#include "neuroplan/deepsmp.hpp"

#include <stdexcept>

namespace neuroplan {

void DeepSmpConfig::validate() const {
    smp.validate();
    if (n <= 0) throw std::invalid_argument("deepsmp: n must be positive");
    if (n_limit < 0 || n_limit >= n)
        throw std::invalid_argument("deepsmp: need 0 <= n_limit < n");
    if (n_limit > n / 2)
        throw std::invalid_argument("deepsmp: n_limit must stay <= n/2 (completeness switch)");
    if (!sampler_model) throw std::invalid_argument("deepsmp: sampler model not loaded");
}

NeuralChain::NeuralChain(const MlpModel& model, Vector latent, const Config& x_init,
                         const Config& x_goal, double goal_radius,
                         const std::array<double, 3>& bounds)
    : model_(model),
      latent_(std::move(latent)),
      x_init_(x_init),
      x_goal_(x_goal),
      x_t_(x_init),
      goal_radius_(goal_radius),
      bounds_(bounds) {}

Config NeuralChain::next(Rng& rng) {
    const Config out = next_sample(model_, latent_, x_t_, x_goal_, bounds_, rng);
    // chain on the generated sample; restart from the root once it reaches
    // the goal region
    x_t_ = distance(out, x_goal_) <= goal_radius_ ? x_init_ : out;
    return out;
}

Config HybridSampler::next(const PlanContext& ctx, Rng& rng) {
    if (ctx.iteration < n_limit_) {
        last_kind = SampleKind::neural;
        return chain_->next(rng);
    }
    const Config q = uniform_.next(ctx, rng);
    last_kind = uniform_.last_kind;
    return q;
}

Config BidirectionalHybridSampler::next(const PlanContext& ctx, Rng& rng) {
    if (ctx.iteration < n_limit_) {
        last_kind = SampleKind::neural;
        NeuralChain* chain = (ctx.iteration % 2 == 0) ? forward_ : backward_;
        return chain->next(rng);
    }
    const Config q = uniform_.next(ctx, rng);
    last_kind = uniform_.last_kind;
    return q;
}

namespace {

Vector latent_for(const Problem& problem, const PointCloud& cloud, const DeepSmpConfig& cfg) {
    const int d = problem.x_init.dim;
    const int latent_size = cfg.sampler_model->input_size() - 2 * d;
    if (latent_size < 0)
        throw std::invalid_argument("deepsmp: sampler input smaller than two configurations");
    if (latent_size == 0) return Vector(0);
    if (!cfg.encoder) throw std::invalid_argument("deepsmp: encoder model not loaded");
    const Vector z = encode(*cfg.encoder, cloud);
    if (z.size() != latent_size)
        throw std::invalid_argument("deepsmp: encoder latent size does not match sampler input");
    return z;
}

} // namespace

PlanResult deepsmp_plan(const Problem& problem, const PointCloud& cloud,
                        const DeepSmpConfig& cfg) {
    cfg.validate();
    const Vector z = latent_for(problem, cloud, cfg); // encoded once per query
    NeuralChain chain(*cfg.sampler_model, z, problem.x_init, problem.x_goal,
                      cfg.smp.goal_radius, problem.ws->bounds);
    HybridSampler sampler(&chain, cfg.n_limit);
    PlannerParams params = cfg.smp;
    params.max_iterations = cfg.n;
    return plan(problem, sampler, params);
}

PlanResult deepsmp_plan_bidirectional(const Problem& problem, const PointCloud& cloud,
                                      const DeepSmpConfig& cfg) {
    cfg.validate();
    const Vector z = latent_for(problem, cloud, cfg);
    NeuralChain forward(*cfg.sampler_model, z, problem.x_init, problem.x_goal,
                        cfg.smp.goal_radius, problem.ws->bounds);
    NeuralChain backward(*cfg.sampler_model, z, problem.x_goal, problem.x_init,
                         cfg.smp.goal_radius, problem.ws->bounds);
    BidirectionalHybridSampler sampler(&forward, &backward, cfg.n_limit);
    PlannerParams params = cfg.smp;
    params.max_iterations = cfg.n;
    return plan(problem, sampler, params);
}

int compute_n_limit(const std::vector<TrainingPath>& paths) {
    if (paths.empty()) throw std::invalid_argument("compute_n_limit: empty dataset");
    int longest = 0;
    for (const auto& p : paths) longest = std::max(longest, static_cast<int>(p.states.size()));
    return longest;
}

} // namespace neuroplan
