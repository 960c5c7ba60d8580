#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "neuroplan/rng.hpp"

namespace neuroplan {

// Fixed-capacity configuration vector. Covers point robots in 2D/3D and the
// planar rigid body (x, y, scaled angle); dimensions above 3 are out of scope.
struct Config {
    std::array<double, 3> v{0.0, 0.0, 0.0};
    int dim = 2;

    Config() = default;
    Config(double x, double y) : v{x, y, 0.0}, dim(2) {}
    Config(double x, double y, double z) : v{x, y, z}, dim(3) {}

    double& operator[](int i) { return v[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return v[static_cast<std::size_t>(i)]; }

    bool operator==(const Config& o) const {
        if (dim != o.dim) return false;
        for (int i = 0; i < dim; ++i)
            if (v[static_cast<std::size_t>(i)] != o.v[static_cast<std::size_t>(i)]) return false;
        return true;
    }
};

using Path = std::vector<Config>;

inline double distance(const Config& a, const Config& b) {
    double s = 0.0;
    for (int i = 0; i < a.dim; ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

struct AabbObstacle {
    std::array<double, 3> center{0.0, 0.0, 0.0};
    std::array<double, 3> half_extents{0.0, 0.0, 0.0};

    bool contains(const Config& q) const {
        for (int i = 0; i < q.dim; ++i) {
            if (std::abs(q[i] - center[static_cast<std::size_t>(i)]) >
                half_extents[static_cast<std::size_t>(i)])
                return false;
        }
        return true;
    }

    double volume(int dim) const {
        double v = 1.0;
        for (int i = 0; i < dim; ++i) v *= 2.0 * half_extents[static_cast<std::size_t>(i)];
        return v;
    }
};

// Axis-aligned block world over the operating region [-bounds, bounds]^dim
// (side 40 by default). Obstacles must lie fully inside the region.
struct Workspace {
    int dim = 2;
    std::array<double, 3> bounds{20.0, 20.0, 20.0};
    std::vector<AabbObstacle> obstacles;
    std::uint64_t seed = 0;

    bool in_bounds(const Config& q) const {
        for (int i = 0; i < q.dim; ++i)
            if (std::abs(q[i]) > bounds[static_cast<std::size_t>(i)]) return false;
        return true;
    }

    void validate() const; // throws std::invalid_argument on broken invariants
};

enum class RobotKind { point2, point3, rigid2 };

struct RobotModel {
    RobotKind kind = RobotKind::point2;
    // rigid2 body geometry; ignored for point robots
    double length = 4.0;
    double width = 1.0;

    int config_dim() const {
        switch (kind) {
            case RobotKind::point2: return 2;
            case RobotKind::point3: return 3;
            case RobotKind::rigid2: return 3;
        }
        return 2;
    }

    static RobotModel from_name(const std::string& name);
    std::string name() const;
};

// The third rigid2 component stores the heading scaled into the positional
// range [-20, 20]; collision checks map it back to radians.
inline constexpr double kAngleScale = M_PI / 20.0;

// N x dim point matrix drawn from the obstacle region of one workspace.
struct PointCloud {
    int dim = 2;
    Eigen::MatrixXd points; // N x dim

    int size() const { return static_cast<int>(points.rows()); }
};

inline constexpr int kDefaultCloudSize = 1400;

bool is_config_free(const Workspace& ws, const RobotModel& rm, const Config& q);

bool is_motion_free(const Workspace& ws, const RobotModel& rm, const Config& a,
                    const Config& b, double resolution);

double default_edge_resolution(const RobotModel& rm);

PointCloud sample_point_cloud(const Workspace& ws, int n, std::uint64_t seed);

inline PointCloud sample_point_cloud(const Workspace& ws, std::uint64_t seed) {
    return sample_point_cloud(ws, kDefaultCloudSize, seed);
}

double path_cost(const Path& path);

Config interpolate(const Config& a, const Config& b, double t);

} // namespace neuroplan
