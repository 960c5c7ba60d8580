#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "neuroplan/datagen.hpp"
#include "neuroplan/deepsmp.hpp"
#include "neuroplan/smp.hpp"

namespace neuroplan {

enum class Algo { rrtstar, informed, deepsmp, deepsmp_bi };

Algo algo_from_name(const std::string& name);
std::string algo_name(Algo a);

struct TrialSpec {
    std::filesystem::path dataset_dir;
    std::vector<Algo> algos{Algo::rrtstar, Algo::informed};
    int trials = 20;
    int problems_per_workspace = 5; // taken from the stored pair lists
    int n = 10000;
    int n_limit = 0; // neural-phase length for the deepsmp algos
    PlannerParams smp;
    // stop a trial once cost <= (1 + delta) * reference, where the reference
    // comes from a uniform run with ref_budget_factor * n iterations
    double delta = 0.05;
    int ref_budget_factor = 10;
    std::uint64_t seed = 0;
    std::filesystem::path cae_model;     // required for deepsmp algos
    std::filesystem::path sampler_model; // required for deepsmp algos

    void validate() const;
};

Json trial_spec_to_json(const TrialSpec& s);
TrialSpec trial_spec_from_json(const Json& j);

struct TrialRecord {
    std::string test_case; // "seen" | "unseen"
    int problem = 0;
    Algo algo = Algo::rrtstar;
    int trial = 0;
    bool success = false;
    double cost = 0.0;
    int iters_to_threshold = 0; // censored at n
    double wall_s = 0.0;
};

struct BenchRow {
    std::string scenario;
    std::string test_case;
    std::string algo;
    double t_mean = 0.0;
    double t_max = 0.0;
    double t_min = 0.0;
    double success = 0.0;
    double mean_cost = 0.0;
    double mean_iters = 0.0;
};

struct BenchTable {
    std::vector<BenchRow> rows;
    std::vector<TrialRecord> records; // raw trials, for audits

    std::string to_csv() const; // fixed column order
    std::string to_report_markdown() const;
    std::optional<BenchRow> find(const std::string& test_case, const std::string& algo) const;
};

BenchTable run_benchmark(const TrialSpec& spec);

// Published reference timings quoted in the report footer (seconds,
// simple-2D seen test case).
inline constexpr double kReferenceTmeanS2dSeenDeepSmp = 0.90;
inline constexpr double kReferenceTmeanS2dSeenInformed = 9.61;

// Deterministic SVG: obstacles as filled rectangles, path polyline, start and
// goal markers; 3D workspaces render xy/xz/yz orthographic panels.
std::string render_path_svg(const Workspace& ws, const Path& path);
void render_path_svg(const Workspace& ws, const Path& path, const std::filesystem::path& out);

} // namespace neuroplan
