#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "neuroplan/geom.hpp"
#include "neuroplan/io.hpp"
#include "neuroplan/sampler.hpp"
#include "neuroplan/smp.hpp"

namespace neuroplan {

enum class Scenario { s2D, c2D, c3D, rigid };

Scenario scenario_from_name(const std::string& name);
std::string scenario_name(Scenario s);
int scenario_dim(Scenario s);
RobotModel scenario_robot(Scenario s);

// Random block placement without overlap; deterministic per seed.
Workspace generate_workspace(Scenario scenario, std::uint64_t seed);

// Free start/goal pair separated by at least a quarter of the region side.
std::pair<Config, Config> sample_start_goal(const Workspace& ws, const RobotModel& rm,
                                            std::uint64_t seed);

// Shortcut pass: drop every waypoint whose removal keeps the motion free.
Path prune_path(const Path& path, const Workspace& ws, const RobotModel& rm,
                double edge_resolution);

struct ExpertParams {
    int budget = 30000; // RRT* iterations
    PlannerParams smp;  // step/goal radius etc.; seed ignored (passed per call)
    bool prune = true;
};

std::optional<TrainingPath> generate_expert_path(const Workspace& ws, const RobotModel& rm,
                                                 const Config& start, const Config& goal,
                                                 const ExpertParams& params,
                                                 std::uint64_t seed);

struct DatasetManifest {
    Scenario scenario = Scenario::s2D;
    int train_workspaces = 10;
    int paths_per_workspace = 200;
    int seen_pairs_per_workspace = 50;   // extra unseen start/goal pairs in seen workspaces
    int unseen_workspaces = 2;
    int pairs_per_unseen_workspace = 100;
    std::uint64_t master_seed = 0;
    int cloud_size = kDefaultCloudSize;
    ExpertParams expert;

    std::vector<std::uint64_t> train_seeds() const;
    std::vector<std::uint64_t> unseen_seeds() const;
    void validate() const;
};

Json manifest_to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const Json& j);

struct Dataset {
    DatasetManifest manifest;
    std::vector<Workspace> train_ws;
    std::vector<PointCloud> train_clouds;
    std::vector<std::vector<TrainingPath>> train_paths; // per train workspace
    std::vector<std::vector<std::pair<Config, Config>>> seen_pairs;
    std::vector<Workspace> unseen_ws;
    std::vector<PointCloud> unseen_clouds;
    std::vector<std::vector<std::pair<Config, Config>>> unseen_pairs;

    std::vector<TrainingPath> all_paths() const;
};

// Generates and persists the dataset under `dir`:
//   manifest.json, workspaces/ws_<seed>.json, clouds/ws_<seed>.f32bin,
//   paths/ws_<seed>/path_<k>.json, pairs/ws_<seed>.json
Dataset build_dataset(const DatasetManifest& manifest, const std::filesystem::path& dir);

// Loads and re-validates: disjoint train/unseen seeds, feasible stored paths,
// counts matching the manifest.
Dataset load_dataset(const std::filesystem::path& dir);

} // namespace neuroplan
