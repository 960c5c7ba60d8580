#include "neuroplan/geom.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace neuroplan {

void Workspace::validate() const {
    if (dim != 2 && dim != 3)
        throw std::invalid_argument("workspace dim must be 2 or 3");
    for (int i = 0; i < dim; ++i)
        if (bounds[static_cast<std::size_t>(i)] <= 0.0)
            throw std::invalid_argument("workspace bounds must be positive");
    for (const auto& ob : obstacles) {
        for (int i = 0; i < dim; ++i) {
            auto k = static_cast<std::size_t>(i);
            if (ob.half_extents[k] <= 0.0)
                throw std::invalid_argument("obstacle half_extents must be positive");
            if (std::abs(ob.center[k]) + ob.half_extents[k] > bounds[k] + 1e-9)
                throw std::invalid_argument("obstacle exceeds workspace bounds");
        }
    }
}

RobotModel RobotModel::from_name(const std::string& name) {
    RobotModel rm;
    if (name == "point2") rm.kind = RobotKind::point2;
    else if (name == "point3") rm.kind = RobotKind::point3;
    else if (name == "rigid2") rm.kind = RobotKind::rigid2;
    else throw std::invalid_argument("unknown robot model: " + name);
    return rm;
}

std::string RobotModel::name() const {
    switch (kind) {
        case RobotKind::point2: return "point2";
        case RobotKind::point3: return "point3";
        case RobotKind::rigid2: return "rigid2";
    }
    return "point2";
}

double default_edge_resolution(const RobotModel& rm) {
    return rm.kind == RobotKind::rigid2 ? 0.2 : 0.1;
}

namespace {

// Separating-axis overlap test between an oriented rectangle (center c,
// heading theta, half sizes hl x hw) and an axis-aligned box. Both convex,
// so four axes suffice in the plane.
bool rect_aabb_overlap(double cx, double cy, double theta, double hl, double hw,
                       const AabbObstacle& ob) {
    const double cos_t = std::cos(theta);
    const double sin_t = std::sin(theta);
    const double ox = ob.center[0];
    const double oy = ob.center[1];
    const double hx = ob.half_extents[0];
    const double hy = ob.half_extents[1];

    const double dx = cx - ox;
    const double dy = cy - oy;

    // axes: world x, world y, rectangle long axis, rectangle short axis
    const double axes[4][2] = {{1.0, 0.0}, {0.0, 1.0}, {cos_t, sin_t}, {-sin_t, cos_t}};
    for (const auto& ax : axes) {
        const double center_sep = std::abs(dx * ax[0] + dy * ax[1]);
        const double rect_r =
            hl * std::abs(cos_t * ax[0] + sin_t * ax[1]) + hw * std::abs(-sin_t * ax[0] + cos_t * ax[1]);
        const double box_r = hx * std::abs(ax[0]) + hy * std::abs(ax[1]);
        if (center_sep > rect_r + box_r) return false;
    }
    return true;
}

bool rigid_in_bounds(const Workspace& ws, double cx, double cy, double theta,
                     double hl, double hw) {
    const double cos_t = std::abs(std::cos(theta));
    const double sin_t = std::abs(std::sin(theta));
    const double rx = hl * cos_t + hw * sin_t;
    const double ry = hl * sin_t + hw * cos_t;
    return std::abs(cx) + rx <= ws.bounds[0] && std::abs(cy) + ry <= ws.bounds[1];
}

} // namespace

bool is_config_free(const Workspace& ws, const RobotModel& rm, const Config& q) {
    if (q.dim != rm.config_dim())
        throw std::invalid_argument("config dimension does not match robot model");
    if (rm.kind == RobotKind::rigid2) {
        const double theta = q[2] * kAngleScale;
        const double hl = rm.length / 2.0;
        const double hw = rm.width / 2.0;
        if (std::abs(q[2]) > ws.bounds[2]) return false;
        if (!rigid_in_bounds(ws, q[0], q[1], theta, hl, hw)) return false;
        for (const auto& ob : ws.obstacles)
            if (rect_aabb_overlap(q[0], q[1], theta, hl, hw, ob)) return false;
        return true;
    }
    if (!ws.in_bounds(q)) return false;
    for (const auto& ob : ws.obstacles)
        if (ob.contains(q)) return false;
    return true;
}

Config interpolate(const Config& a, const Config& b, double t) {
    Config c;
    c.dim = a.dim;
    for (int i = 0; i < a.dim; ++i) c[i] = a[i] + (b[i] - a[i]) * t;
    return c;
}

bool is_motion_free(const Workspace& ws, const RobotModel& rm, const Config& a,
                    const Config& b, double resolution) {
    if (resolution <= 0.0)
        throw std::invalid_argument("edge resolution must be positive");
    const double len = distance(a, b);
    if (len == 0.0) return is_config_free(ws, rm, a);
    const int steps = static_cast<int>(std::ceil(len / resolution));
    for (int i = 0; i <= steps; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(steps);
        if (!is_config_free(ws, rm, interpolate(a, b, t))) return false;
    }
    return true;
}

PointCloud sample_point_cloud(const Workspace& ws, int n, std::uint64_t seed) {
    if (ws.obstacles.empty())
        throw std::invalid_argument("cannot sample obstacle point cloud: workspace has no obstacles");
    if (n <= 0) throw std::invalid_argument("point cloud size must be positive");

    Rng rng(mix_seed(seed, "point_cloud"));

    std::vector<double> cum;
    cum.reserve(ws.obstacles.size());
    double total = 0.0;
    for (const auto& ob : ws.obstacles) {
        total += ob.volume(ws.dim);
        cum.push_back(total);
    }

    struct Sample {
        int obstacle;
        std::array<double, 3> p;
    };
    std::vector<Sample> samples;
    samples.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform(0.0, total);
        const auto it = std::lower_bound(cum.begin(), cum.end(), u);
        const int oi = static_cast<int>(it - cum.begin());
        const auto& ob = ws.obstacles[static_cast<std::size_t>(oi)];
        Sample s{oi, {0.0, 0.0, 0.0}};
        for (int k = 0; k < ws.dim; ++k) {
            auto kk = static_cast<std::size_t>(k);
            // Round through f32 (the on-disk precision) and retry the rare
            // draw that rounds outside its obstacle, so containment is exact.
            for (;;) {
                const double x = static_cast<double>(static_cast<float>(
                    rng.uniform(ob.center[kk] - ob.half_extents[kk], ob.center[kk] + ob.half_extents[kk])));
                if (std::abs(x - ob.center[kk]) <= ob.half_extents[kk]) {
                    s.p[kk] = x;
                    break;
                }
            }
        }
        samples.push_back(s);
    }

    // Cloud row order is the generation order: grouped by obstacle, then
    // lexicographic. A stable index->position correspondence is what lets a
    // fixed-size-vector autoencoder reconstruct the cloud.
    std::stable_sort(samples.begin(), samples.end(), [&](const Sample& a, const Sample& b) {
        if (a.obstacle != b.obstacle) return a.obstacle < b.obstacle;
        return a.p < b.p;
    });

    PointCloud pc;
    pc.dim = ws.dim;
    pc.points.resize(n, ws.dim);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < ws.dim; ++k)
            pc.points(i, k) = samples[static_cast<std::size_t>(i)].p[static_cast<std::size_t>(k)];
    return pc;
}

double path_cost(const Path& path) {
    if (path.empty()) throw std::invalid_argument("path_cost: empty path");
    double c = 0.0;
    for (std::size_t i = 1; i < path.size(); ++i) c += distance(path[i - 1], path[i]);
    return c;
}

} // namespace neuroplan
