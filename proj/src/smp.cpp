#include "neuroplan/smp.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace neuroplan {

void PlannerParams::validate() const {
    if (step_size <= 0.0) throw std::invalid_argument("planner: step_size must be positive");
    if (gamma <= 0.0) throw std::invalid_argument("planner: gamma must be positive");
    if (goal_radius <= 0.0) throw std::invalid_argument("planner: goal_radius must be positive");
    if (max_iterations <= 0) throw std::invalid_argument("planner: max_iterations must be positive");
    if (edge_resolution <= 0.0)
        throw std::invalid_argument("planner: edge_resolution must be positive");
}

// ---------------------------------------------------------------------------
// GridIndex

GridIndex::GridIndex(int dim, double cell, double bound)
    : dim_(dim), cell_(cell), bound_(bound) {
    cells_per_axis_ = static_cast<int>(std::ceil(2.0 * bound / cell)) + 2;
}

void GridIndex::cell_coords(const Config& q, int* c) const {
    for (int i = 0; i < dim_; ++i) {
        int v = static_cast<int>(std::floor((q[i] + bound_) / cell_)) + 1;
        c[i] = std::clamp(v, 0, cells_per_axis_ - 1);
    }
}

std::uint64_t GridIndex::pack(const int* c) const {
    std::uint64_t key = 0;
    for (int i = 0; i < dim_; ++i) key = key * static_cast<std::uint64_t>(cells_per_axis_) +
                                        static_cast<std::uint64_t>(c[i]);
    return key;
}

std::uint64_t GridIndex::cell_key(const Config& q) const {
    int c[3] = {0, 0, 0};
    cell_coords(q, c);
    return pack(c);
}

void GridIndex::insert(int id, const Config& q) {
    buckets_[cell_key(q)].push_back(id);
}

int GridIndex::nearest(const Config& q, const std::vector<Config>& nodes) const {
    int base[3] = {0, 0, 0};
    cell_coords(q, base);

    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();

    const int max_ring = cells_per_axis_;
    for (int ring = 0; ring < max_ring; ++ring) {
        // All candidates in ring k are at least (k-1)*cell away from q.
        if (best >= 0 && static_cast<double>(ring - 1) * cell_ > best_d) break;

        const int lo[3] = {base[0] - ring, base[1] - ring, base[2] - ring};
        const int hi[3] = {base[0] + ring, base[1] + ring, base[2] + ring};
        int c[3] = {0, 0, 0};
        auto scan_cell = [&](const int* cc) {
            const auto it = buckets_.find(pack(cc));
            if (it == buckets_.end()) return;
            for (int id : it->second) {
                const double d = distance(q, nodes[static_cast<std::size_t>(id)]);
                if (d < best_d || (d == best_d && id < best)) {
                    best_d = d;
                    best = id;
                }
            }
        };
        // visit only cells on the ring shell
        if (dim_ == 2) {
            for (c[0] = lo[0]; c[0] <= hi[0]; ++c[0])
                for (c[1] = lo[1]; c[1] <= hi[1]; ++c[1]) {
                    if (ring > 0 && c[0] != lo[0] && c[0] != hi[0] && c[1] != lo[1] && c[1] != hi[1])
                        continue;
                    if (c[0] < 0 || c[1] < 0 || c[0] >= cells_per_axis_ || c[1] >= cells_per_axis_)
                        continue;
                    scan_cell(c);
                }
        } else {
            for (c[0] = lo[0]; c[0] <= hi[0]; ++c[0])
                for (c[1] = lo[1]; c[1] <= hi[1]; ++c[1])
                    for (c[2] = lo[2]; c[2] <= hi[2]; ++c[2]) {
                        const bool interior = ring > 0 && c[0] != lo[0] && c[0] != hi[0] &&
                                              c[1] != lo[1] && c[1] != hi[1] && c[2] != lo[2] &&
                                              c[2] != hi[2];
                        if (interior) continue;
                        if (c[0] < 0 || c[1] < 0 || c[2] < 0 || c[0] >= cells_per_axis_ ||
                            c[1] >= cells_per_axis_ || c[2] >= cells_per_axis_)
                            continue;
                        scan_cell(c);
                    }
        }
    }
    return best;
}

void GridIndex::radius_query(const Config& q, double r, const std::vector<Config>& nodes,
                             std::vector<int>& out) const {
    out.clear();
    int lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
    Config qlo = q, qhi = q;
    for (int i = 0; i < dim_; ++i) {
        qlo[i] -= r;
        qhi[i] += r;
    }
    cell_coords(qlo, lo);
    cell_coords(qhi, hi);
    int c[3] = {0, 0, 0};
    auto scan_cell = [&](const int* cc) {
        const auto it = buckets_.find(pack(cc));
        if (it == buckets_.end()) return;
        for (int id : it->second)
            if (distance(q, nodes[static_cast<std::size_t>(id)]) <= r) out.push_back(id);
    };
    if (dim_ == 2) {
        for (c[0] = lo[0]; c[0] <= hi[0]; ++c[0])
            for (c[1] = lo[1]; c[1] <= hi[1]; ++c[1]) scan_cell(c);
    } else {
        for (c[0] = lo[0]; c[0] <= hi[0]; ++c[0])
            for (c[1] = lo[1]; c[1] <= hi[1]; ++c[1])
                for (c[2] = lo[2]; c[2] <= hi[2]; ++c[2]) scan_cell(c);
    }
    std::sort(out.begin(), out.end());
}

// ---------------------------------------------------------------------------
// Tree

Tree::Tree(const Config& root, double cell, double bound)
    : index(root.dim, cell, bound) {
    nodes.push_back(root);
    parent.push_back(-1);
    cost.push_back(0.0);
    children.emplace_back();
    index.insert(0, root);
}

void Tree::check_invariants() const {
    if (parent.empty() || parent[0] != -1 || cost[0] != 0.0)
        throw std::logic_error("tree: bad root");
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        const int p = parent[i];
        if (p < 0 || p >= static_cast<int>(nodes.size()))
            throw std::logic_error("tree: dangling parent link");
        const double expect = cost[static_cast<std::size_t>(p)] +
                              distance(nodes[static_cast<std::size_t>(p)], nodes[i]);
        if (std::abs(expect - cost[i]) > 1e-9 * std::max(1.0, expect))
            throw std::logic_error("tree: cost-to-come inconsistent with parent");
        // acyclicity: walk to root, bounded by node count
        int steps = 0, cur = static_cast<int>(i);
        while (cur != -1) {
            cur = parent[static_cast<std::size_t>(cur)];
            if (++steps > static_cast<int>(nodes.size()))
                throw std::logic_error("tree: parent links form a cycle");
        }
    }
}

Path Tree::extract_path(int node) const {
    Path path;
    int cur = node;
    while (cur != -1) {
        path.push_back(nodes[static_cast<std::size_t>(cur)]);
        cur = parent[static_cast<std::size_t>(cur)];
    }
    std::reverse(path.begin(), path.end());
    return path;
}

// ---------------------------------------------------------------------------
// RRT* iteration

namespace {

double near_radius(const PlannerParams& params, const Workspace& ws, int n, int dim) {
    const double half = *std::max_element(ws.bounds.begin(), ws.bounds.begin() + dim);
    const double nn = std::max(n, 2);
    const double shrink = params.gamma * half * std::pow(std::log(nn) / nn, 1.0 / dim);
    return std::min(shrink, params.near_cap_k * params.step_size);
}

void propagate_cost(Tree& tree, int node, double delta) {
    tree.cost[static_cast<std::size_t>(node)] += delta;
    for (int c : tree.children[static_cast<std::size_t>(node)]) propagate_cost(tree, c, delta);
}

} // namespace

StepResult rrt_star_step(Tree& tree, const Config& x_rand, const PlannerParams& params,
                         const Workspace& ws, const RobotModel& rm) {
    const int nearest = tree.index.nearest(x_rand, tree.nodes);
    const Config& x_near = tree.nodes[static_cast<std::size_t>(nearest)];
    double d = distance(x_near, x_rand);
    if (d == 0.0) return {};

    Config x_new = d <= params.step_size
                       ? x_rand
                       : interpolate(x_near, x_rand, params.step_size / d);
    if (!is_config_free(ws, rm, x_new)) return {};

    // candidate neighbourhood for parent choice and rewiring
    const double r = near_radius(params, ws, tree.size(), x_new.dim);
    std::vector<int> near;
    tree.index.radius_query(x_new, r, tree.nodes, near);
    if (std::find(near.begin(), near.end(), nearest) == near.end()) near.push_back(nearest);

    struct Cand {
        double through_cost;
        int id;
        double edge;
    };
    std::vector<Cand> cands;
    cands.reserve(near.size());
    for (int id : near) {
        const double edge = distance(tree.nodes[static_cast<std::size_t>(id)], x_new);
        cands.push_back({tree.cost[static_cast<std::size_t>(id)] + edge, id, edge});
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.through_cost != b.through_cost) return a.through_cost < b.through_cost;
        return a.id < b.id; // deterministic tie-break
    });

    int parent = -1;
    double new_cost = 0.0;
    for (const auto& c : cands) {
        if (is_motion_free(ws, rm, tree.nodes[static_cast<std::size_t>(c.id)], x_new,
                           params.edge_resolution)) {
            parent = c.id;
            new_cost = c.through_cost;
            break;
        }
    }
    if (parent < 0) return {};

    const int new_id = tree.size();
    tree.nodes.push_back(x_new);
    tree.parent.push_back(parent);
    tree.cost.push_back(new_cost);
    tree.children.emplace_back();
    tree.children[static_cast<std::size_t>(parent)].push_back(new_id);
    tree.index.insert(new_id, x_new);

    // rewire the neighbourhood through the new node where that lowers cost
    for (const auto& c : cands) {
        if (c.id == parent) continue;
        const double rewired = new_cost + c.edge;
        if (rewired + 1e-12 < tree.cost[static_cast<std::size_t>(c.id)] &&
            is_motion_free(ws, rm, x_new, tree.nodes[static_cast<std::size_t>(c.id)],
                           params.edge_resolution)) {
            const int old_parent = tree.parent[static_cast<std::size_t>(c.id)];
            auto& sibs = tree.children[static_cast<std::size_t>(old_parent)];
            sibs.erase(std::find(sibs.begin(), sibs.end(), c.id));
            tree.parent[static_cast<std::size_t>(c.id)] = new_id;
            tree.children[static_cast<std::size_t>(new_id)].push_back(c.id);
            propagate_cost(tree, c.id, rewired - tree.cost[static_cast<std::size_t>(c.id)]);
        }
    }
    assert((tree.check_invariants(), true));
    return {true, new_id};
}

// ---------------------------------------------------------------------------
// Samplers

Config UniformSampler::next(const PlanContext& ctx, Rng& rng) {
    last_kind = SampleKind::uniform;
    if (ctx.params.goal_bias > 0.0 && rng.bernoulli(ctx.params.goal_bias))
        return ctx.problem.x_goal;
    const auto& ws = *ctx.problem.ws;
    Config q;
    q.dim = ctx.problem.x_init.dim;
    for (int i = 0; i < q.dim; ++i) {
        const double b = ws.bounds[static_cast<std::size_t>(i)];
        q[i] = rng.uniform(-b, b);
    }
    return q;
}

namespace {

// Uniform point in the d-dimensional unit ball.
void unit_ball_sample(int dim, Rng& rng, double* out) {
    double norm2 = 0.0;
    for (int i = 0; i < dim; ++i) {
        out[i] = rng.normal();
        norm2 += out[i] * out[i];
    }
    const double norm = std::sqrt(norm2);
    const double radius = std::pow(rng.uniform01(), 1.0 / dim);
    const double s = norm > 0.0 ? radius / norm : 0.0;
    for (int i = 0; i < dim; ++i) out[i] *= s;
}

} // namespace

Config informed_sample(double best_cost, const Config& x_init, const Config& x_goal,
                       const std::array<double, 3>& bounds, Rng& rng) {
    const int dim = x_init.dim;
    const double cmin = distance(x_init, x_goal);
    if (!std::isfinite(best_cost)) {
        Config q;
        q.dim = dim;
        for (int i = 0; i < dim; ++i)
            q[i] = rng.uniform(-bounds[static_cast<std::size_t>(i)],
                               bounds[static_cast<std::size_t>(i)]);
        return q;
    }
    if (best_cost < cmin) best_cost = cmin;

    // rotation taking e1 to the transverse axis
    double a1[3] = {0.0, 0.0, 0.0};
    if (cmin > 0.0)
        for (int i = 0; i < dim; ++i) a1[i] = (x_goal[i] - x_init[i]) / cmin;
    else
        a1[0] = 1.0;

    double basis[3][3] = {{0}};
    for (int i = 0; i < dim; ++i) basis[0][i] = a1[i];
    // complete an orthonormal frame
    {
        int pivot = 0;
        for (int i = 1; i < dim; ++i)
            if (std::abs(a1[i]) < std::abs(a1[pivot])) pivot = i;
        double v[3] = {0.0, 0.0, 0.0};
        v[pivot] = 1.0;
        double dot = 0.0;
        for (int i = 0; i < dim; ++i) dot += v[i] * a1[i];
        double n2 = 0.0;
        for (int i = 0; i < dim; ++i) {
            v[i] -= dot * a1[i];
            n2 += v[i] * v[i];
        }
        const double n = std::sqrt(n2);
        for (int i = 0; i < dim; ++i) basis[1][i] = v[i] / n;
        if (dim == 3) {
            basis[2][0] = a1[1] * basis[1][2] - a1[2] * basis[1][1];
            basis[2][1] = a1[2] * basis[1][0] - a1[0] * basis[1][2];
            basis[2][2] = a1[0] * basis[1][1] - a1[1] * basis[1][0];
        }
    }

    const double r1 = best_cost / 2.0;
    const double rk = std::sqrt(std::max(best_cost * best_cost - cmin * cmin, 0.0)) / 2.0;

    Config q;
    q.dim = dim;
    for (int attempt = 0; attempt < 10000; ++attempt) {
        double ball[3] = {0.0, 0.0, 0.0};
        unit_ball_sample(dim, rng, ball);
        ball[0] *= r1;
        for (int i = 1; i < dim; ++i) ball[i] *= rk;
        bool ok = true;
        for (int i = 0; i < dim; ++i) {
            double x = (x_init[i] + x_goal[i]) / 2.0;
            for (int k = 0; k < dim; ++k) x += basis[k][i] * ball[k];
            q[i] = x;
            if (std::abs(x) > bounds[static_cast<std::size_t>(i)]) ok = false;
        }
        if (ok) return q;
    }
    // ellipse essentially outside the region; clamp the last draw
    for (int i = 0; i < dim; ++i)
        q[i] = std::clamp(q[i], -bounds[static_cast<std::size_t>(i)],
                          bounds[static_cast<std::size_t>(i)]);
    return q;
}

Config InformedSampler::next(const PlanContext& ctx, Rng& rng) {
    if (!std::isfinite(ctx.best_cost)) {
        // no incumbent yet: behave exactly like the uniform sampler
        UniformSampler u;
        const Config q = u.next(ctx, rng);
        last_kind = SampleKind::uniform;
        return q;
    }
    last_kind = SampleKind::informed;
    return informed_sample(ctx.best_cost, ctx.problem.x_init, ctx.problem.x_goal,
                           ctx.problem.ws->bounds, rng);
}

// ---------------------------------------------------------------------------
// plan

int PlanResult::iterations_to_cost(double threshold, int censor) const {
    for (const auto& [it, c] : cost_history)
        if (c <= threshold) return it;
    return censor;
}

Json plan_result_to_json(const PlanResult& r) {
    Json j;
    j["found"] = r.found;
    j["cost"] = r.found ? Json(r.cost) : Json(nullptr);
    j["path"] = path_to_json(r.path);
    j["iterations"] = r.iterations;
    j["nodes"] = r.nodes;
    j["wall_ms"] = r.wall_ms;
    j["sampler_kind"] = r.sampler_kind;
    j["seed"] = r.seed;
    j["neural_samples"] = r.neural_samples;
    j["iters_to_first"] = r.iters_to_first;
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

PlanResult plan(const Problem& problem, SamplerSource& sampler, const PlannerParams& params) {
    params.validate();
    const auto t0 = std::chrono::steady_clock::now();

    PlanResult res;
    res.sampler_kind = sampler.kind();
    res.seed = params.seed;

    const Workspace& ws = *problem.ws;
    if (!is_config_free(ws, problem.rm, problem.x_init)) {
        res.error = "start configuration is in collision";
        return res;
    }
    if (!is_config_free(ws, problem.rm, problem.x_goal)) {
        res.error = "goal configuration is in collision";
        return res;
    }
    if (distance(problem.x_init, problem.x_goal) <= params.goal_radius) {
        res.found = true;
        res.cost = 0.0;
        res.path = {problem.x_init};
        res.nodes = 1;
        return res;
    }

    Rng rng(params.seed);
    const double bound = *std::max_element(ws.bounds.begin(), ws.bounds.begin() + problem.x_init.dim);
    Tree tree(problem.x_init, std::max(params.step_size, params.goal_radius), bound);

    std::vector<int> in_goal;
    double best = std::numeric_limits<double>::infinity();
    int best_node = -1;

    int i = 0;
    for (; i < params.max_iterations; ++i) {
        PlanContext ctx{problem, params, best, i};
        const Config x_rand = sampler.next(ctx, rng);
        if (params.record_trace) res.trace.push_back(static_cast<std::uint8_t>(sampler.last_kind));
        if (sampler.last_kind == SampleKind::neural) ++res.neural_samples;

        const StepResult step = rrt_star_step(tree, x_rand, params, ws, problem.rm);
        if (step.added &&
            distance(tree.nodes[static_cast<std::size_t>(step.node)], problem.x_goal) <=
                params.goal_radius)
            in_goal.push_back(step.node);

        // rewiring can improve any in-goal node, so refresh the incumbent
        for (int id : in_goal) {
            const double c = tree.cost[static_cast<std::size_t>(id)];
            if (c < best) {
                best = c;
                best_node = id;
                res.cost_history.emplace_back(i + 1, best);
                if (res.iters_to_first < 0) res.iters_to_first = i + 1;
            }
        }

        if (params.stop_cost > 0.0 && best <= params.stop_cost && i + 1 >= params.min_iterations) {
            ++i;
            break;
        }
    }

    res.iterations = i;
    res.nodes = tree.size();
    if (best_node >= 0) {
        res.found = true;
        res.cost = best;
        res.path = tree.extract_path(best_node);
    }
    res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                      .count();
    return res;
}

} // namespace neuroplan
