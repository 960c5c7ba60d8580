#include "neuroplan/datagen.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "neuroplan/util.hpp"

namespace neuroplan {

Scenario scenario_from_name(const std::string& name) {
    if (name == "s2D" || name == "s2d") return Scenario::s2D;
    if (name == "c2D" || name == "c2d") return Scenario::c2D;
    if (name == "c3D" || name == "c3d") return Scenario::c3D;
    if (name == "rigid") return Scenario::rigid;
    throw std::invalid_argument("unknown scenario: " + name);
}

std::string scenario_name(Scenario s) {
    switch (s) {
        case Scenario::s2D: return "s2D";
        case Scenario::c2D: return "c2D";
        case Scenario::c3D: return "c3D";
        case Scenario::rigid: return "rigid";
    }
    return "s2D";
}

int scenario_dim(Scenario s) { return s == Scenario::c3D ? 3 : 2; }

RobotModel scenario_robot(Scenario s) {
    RobotModel rm;
    switch (s) {
        case Scenario::s2D:
        case Scenario::c2D: rm.kind = RobotKind::point2; break;
        case Scenario::c3D: rm.kind = RobotKind::point3; break;
        case Scenario::rigid: rm.kind = RobotKind::rigid2; break;
    }
    return rm;
}

namespace {

struct BlockPlan {
    int count;
    double side_min;
    double side_max;
};

BlockPlan block_plan(Scenario s) {
    switch (s) {
        case Scenario::s2D: return {7, 5.0, 5.0};
        case Scenario::c2D: return {10, 5.0, 5.0};
        case Scenario::c3D: return {10, 5.0, 10.0};
        case Scenario::rigid: return {7, 5.0, 5.0};
    }
    return {7, 5.0, 5.0};
}

bool obstacles_overlap(const AabbObstacle& a, const AabbObstacle& b, int dim) {
    for (int i = 0; i < dim; ++i) {
        auto k = static_cast<std::size_t>(i);
        if (std::abs(a.center[k] - b.center[k]) >= a.half_extents[k] + b.half_extents[k])
            return false;
    }
    return true;
}

} // namespace

Workspace generate_workspace(Scenario scenario, std::uint64_t seed) {
    Workspace ws;
    ws.dim = scenario_dim(scenario);
    ws.seed = seed;
    Rng rng(mix_seed(seed, "workspace"));
    const BlockPlan plan = block_plan(scenario);

    int attempts = 0;
    while (static_cast<int>(ws.obstacles.size()) < plan.count) {
        if (++attempts > 10000)
            throw std::runtime_error("generate_workspace: placement failed after 10000 attempts");
        AabbObstacle ob;
        for (int i = 0; i < ws.dim; ++i) {
            auto k = static_cast<std::size_t>(i);
            const double side = plan.side_min == plan.side_max
                                    ? plan.side_min
                                    : rng.uniform(plan.side_min, plan.side_max);
            ob.half_extents[k] = side / 2.0;
            ob.center[k] = rng.uniform(-(ws.bounds[k] - ob.half_extents[k]),
                                       ws.bounds[k] - ob.half_extents[k]);
        }
        bool clash = false;
        for (const auto& other : ws.obstacles)
            if (obstacles_overlap(ob, other, ws.dim)) {
                clash = true;
                break;
            }
        if (!clash) ws.obstacles.push_back(ob);
    }
    ws.validate();
    return ws;
}

std::pair<Config, Config> sample_start_goal(const Workspace& ws, const RobotModel& rm,
                                            std::uint64_t seed) {
    Rng rng(mix_seed(seed, "start_goal"));
    const int d = rm.config_dim();
    const double min_sep = 0.25 * 2.0 * ws.bounds[0];

    auto draw_free = [&]() -> Config {
        for (int attempt = 0; attempt < 10000; ++attempt) {
            Config q;
            q.dim = d;
            for (int i = 0; i < d; ++i) {
                const double b = ws.bounds[static_cast<std::size_t>(i)];
                q[i] = rng.uniform(-b, b);
            }
            if (is_config_free(ws, rm, q)) return q;
        }
        throw std::runtime_error("sample_start_goal: no free configuration after 10000 attempts");
    };

    for (int attempt = 0; attempt < 10000; ++attempt) {
        const Config a = draw_free();
        const Config b = draw_free();
        if (distance(a, b) >= min_sep) return {a, b};
    }
    throw std::runtime_error("sample_start_goal: separation constraint unmet after 10000 attempts");
}

Path prune_path(const Path& path, const Workspace& ws, const RobotModel& rm,
                double edge_resolution) {
    if (path.size() <= 2) return path;
    Path out;
    out.push_back(path.front());
    std::size_t i = 0;
    while (i + 1 < path.size()) {
        std::size_t j = path.size() - 1;
        for (; j > i + 1; --j)
            if (is_motion_free(ws, rm, path[i], path[j], edge_resolution)) break;
        out.push_back(path[j]);
        i = j;
    }
    return out;
}

std::optional<TrainingPath> generate_expert_path(const Workspace& ws, const RobotModel& rm,
                                                 const Config& start, const Config& goal,
                                                 const ExpertParams& params,
                                                 std::uint64_t seed) {
    Problem problem{start, goal, &ws, rm};
    PlannerParams smp = params.smp;
    smp.max_iterations = params.budget;
    smp.seed = seed;
    UniformSampler sampler;
    const PlanResult res = plan(problem, sampler, smp);
    if (!res.found) return std::nullopt;

    TrainingPath tp;
    tp.workspace_seed = ws.seed;
    Path path = res.path;
    // the goal ball leaves a gap; close it so demonstrations end exactly at
    // the goal configuration the sampler is conditioned on
    if (!(path.back() == goal) && is_motion_free(ws, rm, path.back(), goal, smp.edge_resolution))
        path.push_back(goal);
    tp.states = params.prune ? prune_path(path, ws, rm, smp.edge_resolution) : path;
    if (tp.states.size() < 2) return std::nullopt;
    return tp;
}

std::vector<std::uint64_t> DatasetManifest::train_seeds() const {
    std::vector<std::uint64_t> seeds;
    const std::uint64_t base = mix_seed(master_seed, "train_ws");
    for (int i = 0; i < train_workspaces; ++i)
        seeds.push_back(mix_seed(base, static_cast<std::uint64_t>(i)));
    return seeds;
}

std::vector<std::uint64_t> DatasetManifest::unseen_seeds() const {
    std::vector<std::uint64_t> seeds;
    const std::uint64_t base = mix_seed(master_seed, "unseen_ws");
    for (int i = 0; i < unseen_workspaces; ++i)
        seeds.push_back(mix_seed(base, static_cast<std::uint64_t>(i)));
    return seeds;
}

void DatasetManifest::validate() const {
    if (train_workspaces <= 0 || paths_per_workspace <= 0)
        throw std::invalid_argument("manifest: training counts must be positive");
    if (unseen_workspaces < 0 || pairs_per_unseen_workspace < 0 || seen_pairs_per_workspace < 0)
        throw std::invalid_argument("manifest: counts must be non-negative");
    if (cloud_size <= 0) throw std::invalid_argument("manifest: cloud size must be positive");
    // seed-set disjointness is a structural requirement of the split
    const auto train = train_seeds();
    const auto unseen = unseen_seeds();
    std::set<std::uint64_t> seen(train.begin(), train.end());
    if (seen.size() != train.size())
        throw std::invalid_argument("manifest: duplicate training workspace seeds");
    for (auto s : unseen)
        if (seen.count(s))
            throw std::invalid_argument("manifest: unseen workspace seed collides with training set");
}

Json manifest_to_json(const DatasetManifest& m) {
    Json j;
    j["scenario"] = scenario_name(m.scenario);
    j["train_workspaces"] = m.train_workspaces;
    j["paths_per_workspace"] = m.paths_per_workspace;
    j["seen_pairs_per_workspace"] = m.seen_pairs_per_workspace;
    j["unseen_workspaces"] = m.unseen_workspaces;
    j["pairs_per_unseen_workspace"] = m.pairs_per_unseen_workspace;
    j["master_seed"] = m.master_seed;
    j["cloud_size"] = m.cloud_size;
    j["expert"] = Json{{"budget", m.expert.budget},
                       {"step_size", m.expert.smp.step_size},
                       {"gamma", m.expert.smp.gamma},
                       {"goal_radius", m.expert.smp.goal_radius},
                       {"edge_resolution", m.expert.smp.edge_resolution},
                       {"goal_bias", m.expert.smp.goal_bias},
                       {"prune", m.expert.prune}};
    j["train_seeds"] = m.train_seeds();
    j["unseen_seeds"] = m.unseen_seeds();
    return j;
}

DatasetManifest manifest_from_json(const Json& j) {
    DatasetManifest m;
    m.scenario = scenario_from_name(j.at("scenario").get<std::string>());
    m.train_workspaces = j.at("train_workspaces").get<int>();
    m.paths_per_workspace = j.at("paths_per_workspace").get<int>();
    m.seen_pairs_per_workspace = j.at("seen_pairs_per_workspace").get<int>();
    m.unseen_workspaces = j.at("unseen_workspaces").get<int>();
    m.pairs_per_unseen_workspace = j.at("pairs_per_unseen_workspace").get<int>();
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.cloud_size = j.at("cloud_size").get<int>();
    const auto& e = j.at("expert");
    m.expert.budget = e.at("budget").get<int>();
    m.expert.smp.step_size = e.at("step_size").get<double>();
    m.expert.smp.gamma = e.at("gamma").get<double>();
    m.expert.smp.goal_radius = e.at("goal_radius").get<double>();
    m.expert.smp.edge_resolution = e.at("edge_resolution").get<double>();
    m.expert.smp.goal_bias = e.at("goal_bias").get<double>();
    m.expert.prune = e.at("prune").get<bool>();
    m.validate();
    // stored seed lists must match what the master seed derives
    if (j.at("train_seeds").get<std::vector<std::uint64_t>>() != m.train_seeds() ||
        j.at("unseen_seeds").get<std::vector<std::uint64_t>>() != m.unseen_seeds())
        throw std::runtime_error("manifest: stored seed lists do not match master seed derivation");
    return m;
}

namespace {

Json pairs_to_json(const std::vector<std::pair<Config, Config>>& pairs) {
    Json j = Json::array();
    for (const auto& [a, b] : pairs) {
        Json p;
        p["start"] = path_to_json({a})[0];
        p["goal"] = path_to_json({b})[0];
        j.push_back(std::move(p));
    }
    return j;
}

std::vector<std::pair<Config, Config>> pairs_from_json(const Json& j, int dim) {
    std::vector<std::pair<Config, Config>> pairs;
    for (const auto& p : j) {
        const Path a = path_from_json(Json::array({p.at("start")}), dim);
        const Path b = path_from_json(Json::array({p.at("goal")}), dim);
        pairs.emplace_back(a[0], b[0]);
    }
    return pairs;
}

std::vector<std::pair<Config, Config>> make_pairs(const Workspace& ws, const RobotModel& rm,
                                                  int count, std::uint64_t base_seed) {
    std::vector<std::pair<Config, Config>> pairs;
    for (int k = 0; k < count; ++k)
        pairs.push_back(sample_start_goal(ws, rm, mix_seed(base_seed, static_cast<std::uint64_t>(k))));
    return pairs;
}

std::string ws_file(std::uint64_t seed) { return "ws_" + std::to_string(seed); }

} // namespace

std::vector<TrainingPath> Dataset::all_paths() const {
    std::vector<TrainingPath> all;
    for (const auto& ws_paths : train_paths)
        all.insert(all.end(), ws_paths.begin(), ws_paths.end());
    return all;
}

Dataset build_dataset(const DatasetManifest& manifest, const std::filesystem::path& dir) {
    manifest.validate();
    const RobotModel rm = scenario_robot(manifest.scenario);

    Dataset ds;
    ds.manifest = manifest;
    const auto train_seeds = manifest.train_seeds();
    const auto unseen_seeds = manifest.unseen_seeds();
    ds.train_ws.resize(train_seeds.size());
    ds.train_clouds.resize(train_seeds.size());
    ds.train_paths.resize(train_seeds.size());
    ds.seen_pairs.resize(train_seeds.size());
    ds.unseen_ws.resize(unseen_seeds.size());
    ds.unseen_clouds.resize(unseen_seeds.size());
    ds.unseen_pairs.resize(unseen_seeds.size());

    // workspaces are independent given their seeds, so generation parallelizes
    parallel_for(static_cast<int>(train_seeds.size()), [&](int i) {
        const std::uint64_t seed = train_seeds[static_cast<std::size_t>(i)];
        Workspace ws = generate_workspace(manifest.scenario, seed);
        PointCloud cloud = sample_point_cloud(ws, manifest.cloud_size, seed);

        std::vector<TrainingPath> paths;
        int attempt = 0;
        const int max_attempts = manifest.paths_per_workspace * 3 + 100;
        while (static_cast<int>(paths.size()) < manifest.paths_per_workspace) {
            if (attempt >= max_attempts)
                throw std::runtime_error("build_dataset: expert planning kept failing in workspace " +
                                         std::to_string(seed));
            const std::uint64_t pair_seed = mix_seed(mix_seed(seed, "train_pair"),
                                                     static_cast<std::uint64_t>(attempt));
            const auto [start, goal] = sample_start_goal(ws, rm, pair_seed);
            auto path = generate_expert_path(ws, rm, start, goal, manifest.expert, pair_seed);
            ++attempt;
            if (!path) {
                std::fprintf(stderr, "[gen-data] expert run unsolved in ws %llu (attempt %d)\n",
                             static_cast<unsigned long long>(seed), attempt);
                continue;
            }
            paths.push_back(std::move(*path));
        }

        ds.seen_pairs[static_cast<std::size_t>(i)] =
            make_pairs(ws, rm, manifest.seen_pairs_per_workspace, mix_seed(seed, "seen_pair"));
        ds.train_ws[static_cast<std::size_t>(i)] = std::move(ws);
        ds.train_clouds[static_cast<std::size_t>(i)] = std::move(cloud);
        ds.train_paths[static_cast<std::size_t>(i)] = std::move(paths);
    });

    parallel_for(static_cast<int>(unseen_seeds.size()), [&](int i) {
        const std::uint64_t seed = unseen_seeds[static_cast<std::size_t>(i)];
        Workspace ws = generate_workspace(manifest.scenario, seed);
        ds.unseen_clouds[static_cast<std::size_t>(i)] =
            sample_point_cloud(ws, manifest.cloud_size, seed);
        ds.unseen_pairs[static_cast<std::size_t>(i)] =
            make_pairs(ws, rm, manifest.pairs_per_unseen_workspace, mix_seed(seed, "unseen_pair"));
        ds.unseen_ws[static_cast<std::size_t>(i)] = std::move(ws);
    });

    // persist
    std::filesystem::create_directories(dir / "workspaces");
    std::filesystem::create_directories(dir / "clouds");
    std::filesystem::create_directories(dir / "pairs");
    write_json_file(manifest_to_json(manifest), dir / "manifest.json");
    for (std::size_t i = 0; i < train_seeds.size(); ++i) {
        const auto name = ws_file(train_seeds[i]);
        save_workspace(ds.train_ws[i], dir / "workspaces" / (name + ".json"));
        save_cloud_f32(ds.train_clouds[i], dir / "clouds" / (name + ".f32bin"));
        write_json_file(pairs_to_json(ds.seen_pairs[i]), dir / "pairs" / (name + ".json"));
        const auto pdir = dir / "paths" / name;
        std::filesystem::create_directories(pdir);
        for (std::size_t k = 0; k < ds.train_paths[i].size(); ++k)
            write_json_file(path_to_json(ds.train_paths[i][k].states),
                            pdir / ("path_" + std::to_string(k) + ".json"));
    }
    for (std::size_t i = 0; i < unseen_seeds.size(); ++i) {
        const auto name = ws_file(unseen_seeds[i]);
        save_workspace(ds.unseen_ws[i], dir / "workspaces" / (name + ".json"));
        save_cloud_f32(ds.unseen_clouds[i], dir / "clouds" / (name + ".f32bin"));
        write_json_file(pairs_to_json(ds.unseen_pairs[i]), dir / "pairs" / (name + ".json"));
    }
    return ds;
}

Dataset load_dataset(const std::filesystem::path& dir) {
    Dataset ds;
    ds.manifest = manifest_from_json(read_json_file(dir / "manifest.json"));
    const RobotModel rm = scenario_robot(ds.manifest.scenario);
    const int dim = rm.config_dim();
    const double res = ds.manifest.expert.smp.edge_resolution;

    for (const std::uint64_t seed : ds.manifest.train_seeds()) {
        const auto name = ws_file(seed);
        Workspace ws = load_workspace(dir / "workspaces" / (name + ".json"));
        if (ws.seed != seed) throw std::runtime_error("dataset: workspace seed mismatch");
        PointCloud cloud = load_cloud_f32(dir / "clouds" / (name + ".f32bin"));
        if (cloud.size() != ds.manifest.cloud_size)
            throw std::runtime_error("dataset: cloud size mismatch");

        std::vector<TrainingPath> paths;
        for (int k = 0; k < ds.manifest.paths_per_workspace; ++k) {
            TrainingPath tp;
            tp.workspace_seed = seed;
            tp.states = path_from_json(
                read_json_file(dir / "paths" / name / ("path_" + std::to_string(k) + ".json")),
                dim);
            if (tp.states.size() < 2)
                throw std::runtime_error("dataset: stored path shorter than 2 states");
            // stored demonstrations must still be collision-free
            for (std::size_t s = 0; s + 1 < tp.states.size(); ++s)
                if (!is_motion_free(ws, rm, tp.states[s], tp.states[s + 1], res))
                    throw std::runtime_error("dataset: stored path fails collision re-validation");
            paths.push_back(std::move(tp));
        }
        ds.seen_pairs.push_back(
            pairs_from_json(read_json_file(dir / "pairs" / (name + ".json")), dim));
        ds.train_ws.push_back(std::move(ws));
        ds.train_clouds.push_back(std::move(cloud));
        ds.train_paths.push_back(std::move(paths));
    }
    for (const std::uint64_t seed : ds.manifest.unseen_seeds()) {
        const auto name = ws_file(seed);
        Workspace ws = load_workspace(dir / "workspaces" / (name + ".json"));
        ds.unseen_clouds.push_back(load_cloud_f32(dir / "clouds" / (name + ".f32bin")));
        ds.unseen_pairs.push_back(
            pairs_from_json(read_json_file(dir / "pairs" / (name + ".json")), dim));
        ds.unseen_ws.push_back(std::move(ws));
    }
    return ds;
}

} // namespace neuroplan
