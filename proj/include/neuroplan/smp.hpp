#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "neuroplan/geom.hpp"
#include "neuroplan/io.hpp"
#include "neuroplan/rng.hpp"

namespace neuroplan {

struct PlannerParams {
    double step_size = 0.5;
    // Ball-radius gamma in units of the region half-extent (the reference
    // value 1.6 assumes coordinates normalized to [-1, 1]).
    double gamma = 1.6;
    double goal_radius = 1.0;
    int max_iterations = 10000;
    double edge_resolution = 0.1;
    std::uint64_t seed = 0;
    double goal_bias = 0.05;   // uniform sampler only
    double near_cap_k = 50.0;  // near radius capped at near_cap_k * step_size
    // Optional early exit: stop once the best path cost drops to this value
    // (0 disables). min_iterations still run before the exit applies.
    double stop_cost = 0.0;
    int min_iterations = 0;
    bool record_trace = false;

    void validate() const;
};

// Bucketed spatial hash over the operating region; exact nearest/near queries
// for the low dimensions this toolkit plans in.
class GridIndex {
public:
    GridIndex(int dim, double cell, double bound);

    void insert(int id, const Config& q);
    int nearest(const Config& q, const std::vector<Config>& nodes) const;
    void radius_query(const Config& q, double r, const std::vector<Config>& nodes,
                      std::vector<int>& out) const;

private:
    std::uint64_t cell_key(const Config& q) const;
    std::uint64_t pack(const int* c) const;
    void cell_coords(const Config& q, int* c) const;

    int dim_;
    double cell_;
    double bound_;
    int cells_per_axis_;
    std::unordered_map<std::uint64_t, std::vector<int>> buckets_;
};

struct Tree {
    std::vector<Config> nodes;
    std::vector<int> parent; // -1 for root
    std::vector<double> cost;
    std::vector<std::vector<int>> children;
    GridIndex index;

    Tree(const Config& root, double cell, double bound);

    int size() const { return static_cast<int>(nodes.size()); }
    void check_invariants() const; // throws std::logic_error when broken
    Path extract_path(int node) const;
};

struct StepResult {
    bool added = false;
    int node = -1;
};

StepResult rrt_star_step(Tree& tree, const Config& x_rand, const PlannerParams& params,
                         const Workspace& ws, const RobotModel& rm);

struct Problem {
    Config x_init;
    Config x_goal;
    const Workspace* ws = nullptr;
    RobotModel rm;
};

enum class SampleKind : std::uint8_t { uniform = 0, informed = 1, neural = 2 };

struct PlanResult {
    bool found = false;
    double cost = std::numeric_limits<double>::infinity();
    Path path;
    int iterations = 0;
    int nodes = 0;
    double wall_ms = 0.0;
    std::string sampler_kind;
    std::uint64_t seed = 0;
    std::string error; // non-empty when the problem itself was invalid

    int neural_samples = 0;
    int iters_to_first = -1; // iterations until the first feasible path, -1 if none
    // (iteration, best cost) recorded whenever the incumbent improves
    std::vector<std::pair<int, double>> cost_history;
    std::vector<std::uint8_t> trace; // per-iteration SampleKind, when recorded

    // First iteration (1-based) at which best cost <= threshold; `censor`
    // when never reached.
    int iterations_to_cost(double threshold, int censor) const;
};

Json plan_result_to_json(const PlanResult& r);

struct PlanContext {
    const Problem& problem;
    const PlannerParams& params;
    double best_cost;
    int iteration;
};

class SamplerSource {
public:
    virtual ~SamplerSource() = default;
    virtual Config next(const PlanContext& ctx, Rng& rng) = 0;
    virtual std::string kind() const = 0;
    SampleKind last_kind = SampleKind::uniform;
};

class UniformSampler : public SamplerSource {
public:
    Config next(const PlanContext& ctx, Rng& rng) override;
    std::string kind() const override { return "uniform"; }
};

class InformedSampler : public SamplerSource {
public:
    Config next(const PlanContext& ctx, Rng& rng) override;
    std::string kind() const override { return "informed"; }
};

// Uniform sample from the prolate hyperspheroid with foci x_init/x_goal and
// transverse diameter best_cost, rejected into the operating region.
Config informed_sample(double best_cost, const Config& x_init, const Config& x_goal,
                       const std::array<double, 3>& bounds, Rng& rng);

PlanResult plan(const Problem& problem, SamplerSource& sampler, const PlannerParams& params);

} // namespace neuroplan
