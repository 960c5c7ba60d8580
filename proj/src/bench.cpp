#include "neuroplan/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

#include "neuroplan/util.hpp"

namespace neuroplan {

Algo algo_from_name(const std::string& name) {
    if (name == "rrtstar") return Algo::rrtstar;
    if (name == "informed") return Algo::informed;
    if (name == "deepsmp") return Algo::deepsmp;
    if (name == "deepsmp-bi") return Algo::deepsmp_bi;
    throw std::invalid_argument("unknown algorithm: " + name);
}

std::string algo_name(Algo a) {
    switch (a) {
        case Algo::rrtstar: return "rrtstar";
        case Algo::informed: return "informed";
        case Algo::deepsmp: return "deepsmp";
        case Algo::deepsmp_bi: return "deepsmp-bi";
    }
    return "rrtstar";
}

void TrialSpec::validate() const {
    if (trials < 1) throw std::invalid_argument("bench: trials must be >= 1");
    if (algos.empty()) throw std::invalid_argument("bench: need at least one algorithm");
    if (problems_per_workspace < 1)
        throw std::invalid_argument("bench: problems_per_workspace must be >= 1");
    if (n < 1) throw std::invalid_argument("bench: n must be >= 1");
    if (delta < 0.0) throw std::invalid_argument("bench: delta must be >= 0");
    std::string missing;
    if (dataset_dir.empty() || !std::filesystem::exists(dataset_dir / "manifest.json"))
        missing += " dataset:" + dataset_dir.string();
    const bool needs_models =
        std::any_of(algos.begin(), algos.end(),
                    [](Algo a) { return a == Algo::deepsmp || a == Algo::deepsmp_bi; });
    if (needs_models) {
        if (sampler_model.empty() || !std::filesystem::exists(sampler_model))
            missing += " sampler_model:" + sampler_model.string();
        if (cae_model.empty() || !std::filesystem::exists(cae_model))
            missing += " cae_model:" + cae_model.string();
    }
    if (!missing.empty())
        throw std::invalid_argument("bench: missing inputs:" + missing);
}

Json trial_spec_to_json(const TrialSpec& s) {
    Json j;
    j["dataset"] = s.dataset_dir.string();
    std::vector<std::string> names;
    for (Algo a : s.algos) names.push_back(algo_name(a));
    j["algos"] = names;
    j["trials"] = s.trials;
    j["problems_per_workspace"] = s.problems_per_workspace;
    j["n"] = s.n;
    j["n_limit"] = s.n_limit;
    j["step_size"] = s.smp.step_size;
    j["gamma"] = s.smp.gamma;
    j["goal_radius"] = s.smp.goal_radius;
    j["edge_resolution"] = s.smp.edge_resolution;
    j["goal_bias"] = s.smp.goal_bias;
    j["delta"] = s.delta;
    j["ref_budget_factor"] = s.ref_budget_factor;
    j["seed"] = s.seed;
    j["cae_model"] = s.cae_model.string();
    j["sampler_model"] = s.sampler_model.string();
    return j;
}

TrialSpec trial_spec_from_json(const Json& j) {
    TrialSpec s;
    s.dataset_dir = j.at("dataset").get<std::string>();
    s.algos.clear();
    for (const auto& a : j.at("algos")) s.algos.push_back(algo_from_name(a.get<std::string>()));
    s.trials = j.at("trials").get<int>();
    s.problems_per_workspace = j.at("problems_per_workspace").get<int>();
    s.n = j.at("n").get<int>();
    s.n_limit = j.value("n_limit", 0);
    s.smp.step_size = j.value("step_size", 0.5);
    s.smp.gamma = j.value("gamma", 1.6);
    s.smp.goal_radius = j.value("goal_radius", 1.0);
    s.smp.edge_resolution = j.value("edge_resolution", 0.1);
    s.smp.goal_bias = j.value("goal_bias", 0.05);
    s.delta = j.value("delta", 0.05);
    s.ref_budget_factor = j.value("ref_budget_factor", 10);
    s.seed = j.at("seed").get<std::uint64_t>();
    s.cae_model = j.value("cae_model", std::string{});
    s.sampler_model = j.value("sampler_model", std::string{});
    return s;
}

namespace {

struct BenchProblem {
    std::string test_case;
    const Workspace* ws;
    const PointCloud* cloud;
    Config start;
    Config goal;
    double threshold = 0.0; // (1 + delta) * reference cost
};

PlanResult run_one(const BenchProblem& bp, Algo algo, const TrialSpec& spec,
                   const RobotModel& rm, const MlpModel* enc, const MlpModel* sampler_model,
                   std::uint64_t seed) {
    Problem problem{bp.start, bp.goal, bp.ws, rm};
    PlannerParams params = spec.smp;
    params.max_iterations = spec.n;
    params.seed = seed;
    params.stop_cost = bp.threshold;

    switch (algo) {
        case Algo::rrtstar: {
            UniformSampler s;
            return plan(problem, s, params);
        }
        case Algo::informed: {
            InformedSampler s;
            return plan(problem, s, params);
        }
        case Algo::deepsmp:
        case Algo::deepsmp_bi: {
            DeepSmpConfig cfg;
            cfg.n = spec.n;
            cfg.n_limit = spec.n_limit;
            cfg.encoder = enc;
            cfg.sampler_model = sampler_model;
            cfg.smp = params;
            return algo == Algo::deepsmp ? deepsmp_plan(problem, *bp.cloud, cfg)
                                         : deepsmp_plan_bidirectional(problem, *bp.cloud, cfg);
        }
    }
    throw std::logic_error("unreachable");
}

} // namespace

BenchTable run_benchmark(const TrialSpec& spec) {
    spec.validate();
    const Dataset ds = load_dataset(spec.dataset_dir);
    const RobotModel rm = scenario_robot(ds.manifest.scenario);

    MlpModel enc, sampler_model;
    const bool needs_models =
        std::any_of(spec.algos.begin(), spec.algos.end(),
                    [](Algo a) { return a == Algo::deepsmp || a == Algo::deepsmp_bi; });
    if (needs_models) {
        enc = load_model(spec.cae_model);
        sampler_model = load_model(spec.sampler_model);
    }

    // assemble the problem set: stored unseen pairs in seen and unseen worlds
    std::vector<BenchProblem> problems;
    auto take = [&](const std::vector<Workspace>& wss, const std::vector<PointCloud>& clouds,
                    const std::vector<std::vector<std::pair<Config, Config>>>& pair_lists,
                    const std::string& label) {
        for (std::size_t w = 0; w < wss.size(); ++w) {
            const int count =
                std::min<std::size_t>(spec.problems_per_workspace, pair_lists[w].size());
            for (int k = 0; k < count; ++k)
                problems.push_back({label, &wss[w], &clouds[w], pair_lists[w][static_cast<std::size_t>(k)].first,
                                    pair_lists[w][static_cast<std::size_t>(k)].second, 0.0});
        }
    };
    take(ds.train_ws, ds.train_clouds, ds.seen_pairs, "seen");
    take(ds.unseen_ws, ds.unseen_clouds, ds.unseen_pairs, "unseen");
    if (problems.empty()) throw std::invalid_argument("bench: dataset holds no test pairs");

    // per-problem reference cost from a long uniform run
    parallel_for(static_cast<int>(problems.size()), [&](int i) {
        auto& bp = problems[static_cast<std::size_t>(i)];
        Problem problem{bp.start, bp.goal, bp.ws, rm};
        PlannerParams params = spec.smp;
        params.max_iterations = spec.n * spec.ref_budget_factor;
        params.seed = mix_seed(spec.seed, mix_seed(static_cast<std::uint64_t>(i), "reference"));
        UniformSampler s;
        const PlanResult ref = plan(problem, s, params);
        bp.threshold = ref.found ? (1.0 + spec.delta) * ref.cost
                                 : std::numeric_limits<double>::infinity();
    });

    // trial grid, merged by index for determinism
    struct Job {
        int problem;
        std::size_t algo;
        int trial;
    };
    std::vector<Job> jobs;
    for (int p = 0; p < static_cast<int>(problems.size()); ++p)
        for (std::size_t a = 0; a < spec.algos.size(); ++a)
            for (int t = 0; t < spec.trials; ++t) jobs.push_back({p, a, t});

    BenchTable table;
    table.records.resize(jobs.size());
    parallel_for(static_cast<int>(jobs.size()), [&](int ji) {
        const Job& job = jobs[static_cast<std::size_t>(ji)];
        const BenchProblem& bp = problems[static_cast<std::size_t>(job.problem)];
        const Algo algo = spec.algos[job.algo];
        // paired seeds: each (problem, trial) shares its seed across algorithms
        const std::uint64_t seed =
            mix_seed(mix_seed(spec.seed, static_cast<std::uint64_t>(job.problem)),
                     static_cast<std::uint64_t>(job.trial));
        const PlanResult res = run_one(bp, algo, spec, rm, needs_models ? &enc : nullptr,
                                       needs_models ? &sampler_model : nullptr, seed);
        TrialRecord rec;
        rec.test_case = bp.test_case;
        rec.problem = job.problem;
        rec.algo = algo;
        rec.trial = job.trial;
        rec.success = res.found;
        rec.cost = res.found ? res.cost : 0.0;
        rec.iters_to_threshold = res.iterations_to_cost(bp.threshold, spec.n);
        rec.wall_s = res.wall_ms / 1000.0;
        table.records[static_cast<std::size_t>(ji)] = rec;
    });

    // aggregate
    std::map<std::pair<std::string, std::string>, std::vector<const TrialRecord*>> groups;
    for (const auto& rec : table.records)
        groups[{rec.test_case, algo_name(rec.algo)}].push_back(&rec);

    for (const std::string& test_case : {std::string("seen"), std::string("unseen")}) {
        for (Algo a : spec.algos) {
            const auto it = groups.find({test_case, algo_name(a)});
            if (it == groups.end()) continue;
            const auto& recs = it->second;
            BenchRow row;
            row.scenario = scenario_name(ds.manifest.scenario);
            row.test_case = test_case;
            row.algo = algo_name(a);
            double t_sum = 0.0, cost_sum = 0.0, iter_sum = 0.0;
            int successes = 0;
            row.t_min = std::numeric_limits<double>::infinity();
            for (const auto* r : recs) {
                t_sum += r->wall_s;
                row.t_max = std::max(row.t_max, r->wall_s);
                row.t_min = std::min(row.t_min, r->wall_s);
                iter_sum += r->iters_to_threshold;
                if (r->success) {
                    ++successes;
                    cost_sum += r->cost;
                }
            }
            row.t_mean = t_sum / static_cast<double>(recs.size());
            row.success = static_cast<double>(successes) / static_cast<double>(recs.size());
            row.mean_cost = successes > 0 ? cost_sum / successes : 0.0;
            row.mean_iters = iter_sum / static_cast<double>(recs.size());
            table.rows.push_back(row);
        }
    }
    return table;
}

std::optional<BenchRow> BenchTable::find(const std::string& test_case,
                                         const std::string& algo) const {
    for (const auto& r : rows)
        if (r.test_case == test_case && r.algo == algo) return r;
    return std::nullopt;
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

} // namespace

std::string BenchTable::to_csv() const {
    std::ostringstream out;
    out << "scenario,test_case,algo,t_mean,t_max,t_min,success,mean_cost,mean_iters\n";
    for (const auto& r : rows)
        out << r.scenario << ',' << r.test_case << ',' << r.algo << ',' << fmt(r.t_mean) << ','
            << fmt(r.t_max) << ',' << fmt(r.t_min) << ',' << fmt(r.success) << ','
            << fmt(r.mean_cost) << ',' << fmt(r.mean_iters) << '\n';
    return out.str();
}

std::string BenchTable::to_report_markdown() const {
    std::ostringstream out;
    out << "# Planner benchmark\n\n";
    out << "| scenario | test case | algo | t_mean [s] | t_max [s] | t_min [s] | success | "
           "mean cost | mean iters |\n";
    out << "|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& r : rows)
        out << "| " << r.scenario << " | " << r.test_case << " | " << r.algo << " | "
            << fmt(r.t_mean) << " | " << fmt(r.t_max) << " | " << fmt(r.t_min) << " | "
            << fmt(r.success) << " | " << fmt(r.mean_cost) << " | " << fmt(r.mean_iters)
            << " |\n";

    // pairwise mean-time ratios against the first algorithm of each test case
    out << "\n## Mean-time ratios\n\n";
    for (const std::string& test_case : {std::string("seen"), std::string("unseen")}) {
        const BenchRow* base = nullptr;
        for (const auto& r : rows)
            if (r.test_case == test_case) {
                base = &r;
                break;
            }
        if (!base) continue;
        for (const auto& r : rows)
            if (r.test_case == test_case && &r != base && base->t_mean > 0.0)
                out << "- " << test_case << ": t_mean(" << r.algo << ") / t_mean(" << base->algo
                    << ") = " << fmt(r.t_mean / base->t_mean) << "\n";
    }

    out << "\n---\n";
    out << "Published reference timings for the simple-2D seen test case: "
        << "deepsmp t_mean " << fmt(kReferenceTmeanS2dSeenDeepSmp) << " s, informed t_mean "
        << fmt(kReferenceTmeanS2dSeenInformed)
        << " s. Absolute seconds are hardware-bound; compare directions, not values.\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// SVG

namespace {

void svg_number(std::ostringstream& out, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    out << buf;
}

void svg_rect(std::ostringstream& out, double x, double y, double w, double h,
              const char* fill) {
    out << "<rect x=\"";
    svg_number(out, x);
    out << "\" y=\"";
    svg_number(out, y);
    out << "\" width=\"";
    svg_number(out, w);
    out << "\" height=\"";
    svg_number(out, h);
    out << "\" fill=\"" << fill << "\"/>\n";
}

void svg_circle(std::ostringstream& out, double x, double y, double r, const char* fill) {
    out << "<circle cx=\"";
    svg_number(out, x);
    out << "\" cy=\"";
    svg_number(out, y);
    out << "\" r=\"";
    svg_number(out, r);
    out << "\" fill=\"" << fill << "\"/>\n";
}

// one orthographic panel: world axes (ax, ay) drawn at the given x offset
void svg_panel(std::ostringstream& out, const Workspace& ws, const Path& path, int ax, int ay,
               double offset_x, double scale) {
    const double bx = ws.bounds[static_cast<std::size_t>(ax)];
    const double by = ws.bounds[static_cast<std::size_t>(ay)];
    auto px = [&](double wx) { return offset_x + (wx + bx) * scale; };
    auto py = [&](double wy) { return (by - wy) * scale; }; // flip y for screen space

    for (const auto& ob : ws.obstacles)
        svg_rect(out, px(ob.center[static_cast<std::size_t>(ax)] - ob.half_extents[static_cast<std::size_t>(ax)]),
                 py(ob.center[static_cast<std::size_t>(ay)] + ob.half_extents[static_cast<std::size_t>(ay)]),
                 2.0 * ob.half_extents[static_cast<std::size_t>(ax)] * scale,
                 2.0 * ob.half_extents[static_cast<std::size_t>(ay)] * scale, "#c8b89a");

    if (!path.empty()) {
        out << "<polyline fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < path.size(); ++i) {
            if (i) out << ' ';
            svg_number(out, px(path[i][ax]));
            out << ',';
            svg_number(out, py(path[i][ay]));
        }
        out << "\"/>\n";
        svg_circle(out, px(path.front()[ax]), py(path.front()[ay]), 4.0, "#27ae60");
        svg_circle(out, px(path.back()[ax]), py(path.back()[ay]), 4.0, "#2980b9");
    }
}

} // namespace

std::string render_path_svg(const Workspace& ws, const Path& path) {
    constexpr double scale = 10.0;
    const double panel_w = 2.0 * ws.bounds[0] * scale;
    const double panel_h = 2.0 * ws.bounds[1] * scale;
    const int panels = ws.dim == 2 ? 1 : 3;
    const double gap = 20.0;
    const double width = panels * panel_w + (panels - 1) * gap;

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"";
    svg_number(out, width);
    out << "\" height=\"";
    svg_number(out, panel_h);
    out << "\" viewBox=\"0 0 ";
    svg_number(out, width);
    out << ' ';
    svg_number(out, panel_h);
    out << "\">\n";
    if (ws.dim == 2) {
        svg_panel(out, ws, path, 0, 1, 0.0, scale);
    } else {
        svg_panel(out, ws, path, 0, 1, 0.0, scale);                     // xy
        svg_panel(out, ws, path, 0, 2, panel_w + gap, scale);           // xz
        svg_panel(out, ws, path, 1, 2, 2.0 * (panel_w + gap), scale);   // yz
    }
    out << "</svg>\n";
    return out.str();
}

void render_path_svg(const Workspace& ws, const Path& path, const std::filesystem::path& out) {
    write_text_file(render_path_svg(ws, path), out);
}

} // namespace neuroplan
