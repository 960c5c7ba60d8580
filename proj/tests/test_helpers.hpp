#pragma once

#include <filesystem>
#include <string>

#include "neuroplan/geom.hpp"
#include "neuroplan/rng.hpp"

namespace neuroplan::test {

// Scratch directory for a test case, wiped on destruction.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("neuroplan_test_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

// Brute-force collision oracle: tests many points of the robot body against
// every obstacle. Independent of the separating-axis implementation.
inline bool config_free_oracle(const Workspace& ws, const RobotModel& rm, const Config& q,
                               int samples_per_axis = 320) {
    if (rm.kind != RobotKind::rigid2) return is_config_free(ws, rm, q);

    const double theta = q[2] * kAngleScale;
    const double c = std::cos(theta), s = std::sin(theta);
    const double hl = rm.length / 2.0, hw = rm.width / 2.0;
    if (std::abs(q[2]) > ws.bounds[2]) return false;
    // dense grid over the body: catches every positive-area overlap
    const int nu = samples_per_axis;
    const int nv = std::max(8, samples_per_axis / 4);
    for (int i = 0; i <= nu; ++i) {
        const double u = -hl + 2.0 * hl * i / nu;
        for (int j = 0; j <= nv; ++j) {
            const double v = -hw + 2.0 * hw * j / nv;
            Config p(q[0] + u * c - v * s, q[1] + u * s + v * c);
            if (std::abs(p[0]) > ws.bounds[0] || std::abs(p[1]) > ws.bounds[1]) return false;
            for (const auto& ob : ws.obstacles)
                if (ob.contains(p)) return false;
        }
    }
    return true;
}

inline Workspace single_block_workspace(int dim = 2) {
    Workspace ws;
    ws.dim = dim;
    AabbObstacle ob;
    ob.center = {0.0, 0.0, 0.0};
    ob.half_extents = {2.5, 2.5, 2.5};
    ws.obstacles.push_back(ob);
    return ws;
}

inline Workspace empty_workspace(int dim = 2) {
    Workspace ws;
    ws.dim = dim;
    return ws;
}

// Goal cavity sealed by four overlapping wall blocks; start outside cannot
// reach the center.
inline Workspace sealed_workspace() {
    Workspace ws;
    ws.dim = 2;
    auto wall = [](double cx, double cy, double hx, double hy) {
        AabbObstacle ob;
        ob.center = {cx, cy, 0.0};
        ob.half_extents = {hx, hy, 0.0};
        return ob;
    };
    ws.obstacles.push_back(wall(-3.5, 0.0, 1.5, 5.0));
    ws.obstacles.push_back(wall(3.5, 0.0, 1.5, 5.0));
    ws.obstacles.push_back(wall(0.0, 3.5, 5.0, 1.5));
    ws.obstacles.push_back(wall(0.0, -3.5, 5.0, 1.5));
    return ws;
}

} // namespace neuroplan::test
