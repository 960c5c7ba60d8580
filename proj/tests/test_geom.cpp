#include <doctest.h>

#include <algorithm>

#include "neuroplan/geom.hpp"
#include "neuroplan/io.hpp"
#include "test_helpers.hpp"

using namespace neuroplan;
using namespace neuroplan::test;

TEST_SUITE_BEGIN("geom");

TEST_CASE("config free: empty workspace accepts any in-bounds config") {
    const Workspace ws = empty_workspace();
    const RobotModel rm;
    CHECK(is_config_free(ws, rm, Config(3.0, -7.5)));
    CHECK(is_config_free(ws, rm, Config(-19.9, 19.9)));
    CHECK_FALSE(is_config_free(ws, rm, Config(21.0, 0.0)));
}

TEST_CASE("config free: obstacle center is blocked for a point robot") {
    const Workspace ws = single_block_workspace();
    const RobotModel rm;
    CHECK_FALSE(is_config_free(ws, rm, Config(0.0, 0.0)));
    CHECK(is_config_free(ws, rm, Config(5.0, 5.0)));
}

TEST_CASE("config free: dimension mismatch is a contract violation") {
    const Workspace ws = empty_workspace();
    const RobotModel rm; // point2
    CHECK_THROWS_AS(is_config_free(ws, rm, Config(0.0, 0.0, 0.0)), std::invalid_argument);
}

TEST_CASE("rigid2: rotated rectangle near an obstacle face collides") {
    // 4x1 body centered 0.6 beyond the +x face of the block; the long axis
    // pointing at the face reaches far past the gap.
    Workspace ws = single_block_workspace();
    RobotModel rm;
    rm.kind = RobotKind::rigid2;
    rm.length = 4.0;
    rm.width = 1.0;
    const Config q(2.5 + 0.6, 0.0, 0.0); // axis-aligned, long axis along x
    CHECK_FALSE(is_config_free(ws, rm, q));
    CHECK_FALSE(config_free_oracle(ws, rm, q));
    // same center, long axis parallel to the face: clears it
    const Config q2(2.5 + 0.6, 0.0, 10.0); // 10 * pi/20 = pi/2
    CHECK(is_config_free(ws, rm, q2));
    CHECK(config_free_oracle(ws, rm, q2));
}

TEST_CASE("rigid2: SAT agrees with a dense body-point oracle on random cases") {
    RobotModel rm;
    rm.kind = RobotKind::rigid2;
    Rng rng(1234);
    int disagreements = 0;
    for (int trial = 0; trial < 300; ++trial) {
        Workspace ws = empty_workspace();
        AabbObstacle ob;
        ob.center = {rng.uniform(-10, 10), rng.uniform(-10, 10), 0.0};
        ob.half_extents = {rng.uniform(2.0, 6.0), rng.uniform(2.0, 6.0), 0.0};
        ws.obstacles.push_back(ob);
        const Config q(rng.uniform(-15, 15), rng.uniform(-15, 15), rng.uniform(-20, 20));
        if (is_config_free(ws, rm, q) != config_free_oracle(ws, rm, q)) ++disagreements;
    }
    CHECK(disagreements == 0);
}

TEST_CASE("motion free: zero-length edge is free iff the endpoint is") {
    const Workspace ws = single_block_workspace();
    const RobotModel rm;
    const Config a(6.0, 6.0);
    CHECK(is_motion_free(ws, rm, a, a, 0.1));
    const Config inside(0.0, 0.0);
    CHECK_FALSE(is_motion_free(ws, rm, inside, inside, 0.1));
}

TEST_CASE("motion free: segment through the obstacle center is blocked") {
    const Workspace ws = single_block_workspace();
    const RobotModel rm;
    CHECK_FALSE(is_motion_free(ws, rm, Config(-6.0, 0.0), Config(6.0, 0.0), 0.1));
    CHECK(is_motion_free(ws, rm, Config(-6.0, 6.0), Config(6.0, 6.0), 0.1));
    CHECK_THROWS_AS(is_motion_free(ws, rm, Config(0, 0), Config(1, 1), 0.0),
                    std::invalid_argument);
}

namespace {

// Liang-Barsky clip: length of the part of segment ab inside the box.
double chord_inside(const AabbObstacle& ob, const Config& a, const Config& b) {
    double t0 = 0.0, t1 = 1.0;
    for (int i = 0; i < 2; ++i) {
        const double lo = ob.center[static_cast<std::size_t>(i)] - ob.half_extents[static_cast<std::size_t>(i)];
        const double hi = ob.center[static_cast<std::size_t>(i)] + ob.half_extents[static_cast<std::size_t>(i)];
        const double d = b[i] - a[i];
        if (d == 0.0) {
            if (a[i] < lo || a[i] > hi) return 0.0;
            continue;
        }
        double ta = (lo - a[i]) / d, tb = (hi - a[i]) / d;
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 > t1) return 0.0;
    }
    return (t1 - t0) * distance(a, b);
}

} // namespace

TEST_CASE("motion free: corner-grazing agrees with a 10x finer re-check") {
    const Workspace ws = single_block_workspace();
    const RobotModel rm;
    const double res = 0.1;

    // corner cut with incursion chord > resolution: both resolutions catch it
    {
        const Config a(2.5 - 3.0, 2.5 + 3.0 - 0.16);
        const Config b(2.5 + 3.0, 2.5 - 3.0 - 0.16);
        CHECK(chord_inside(ws.obstacles[0], a, b) > res);
        CHECK_FALSE(is_motion_free(ws, rm, a, b, res));
        CHECK_FALSE(is_motion_free(ws, rm, a, b, res / 10.0));
    }
    // passing just outside the corner: both free
    {
        const Config a(2.5 - 3.0, 2.5 + 3.0 + 0.04);
        const Config b(2.5 + 3.0, 2.5 - 3.0 + 0.04);
        CHECK(chord_inside(ws.obstacles[0], a, b) == 0.0);
        CHECK(is_motion_free(ws, rm, a, b, res));
        CHECK(is_motion_free(ws, rm, a, b, res / 10.0));
    }
    // randomized grazing sweeps against the clipping oracle: a blocked
    // verdict always corresponds to a real incursion, incursions at least as
    // long as the spacing are always caught, and the only coarse/fine
    // disagreements are incursions shorter than the coarse spacing
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const double off = rng.uniform(-0.2, 0.2);
        const Config a(2.5 - 3.0, 2.5 + 3.0 + off);
        const Config b(2.5 + 3.0, 2.5 - 3.0 + off);
        const bool coarse = is_motion_free(ws, rm, a, b, res);
        const bool fine = is_motion_free(ws, rm, a, b, res / 10.0);
        const double chord = chord_inside(ws.obstacles[0], a, b);
        if (!coarse) CHECK(chord > 0.0);
        if (!fine) CHECK(chord > 0.0);
        if (chord >= res) CHECK_FALSE(coarse);
        if (chord >= res / 10.0) CHECK_FALSE(fine);
        if (coarse != fine) CHECK(chord < res);
    }
}

TEST_CASE("motion free is symmetric") {
    const Workspace ws = single_block_workspace();
    const RobotModel rm;
    Rng rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        const Config a(rng.uniform(-20, 20), rng.uniform(-20, 20));
        const Config b(rng.uniform(-20, 20), rng.uniform(-20, 20));
        CHECK(is_motion_free(ws, rm, a, b, 0.1) == is_motion_free(ws, rm, b, a, 0.1));
    }
}

TEST_CASE("point cloud: single obstacle contains every point") {
    const Workspace ws = single_block_workspace();
    const PointCloud pc = sample_point_cloud(ws, 1400, 5);
    REQUIRE(pc.size() == 1400);
    for (int i = 0; i < pc.size(); ++i) {
        Config q(pc.points(i, 0), pc.points(i, 1));
        CHECK(ws.obstacles[0].contains(q));
    }
}

TEST_CASE("point cloud: counts follow the 3:1 volume split within 3 sigma") {
    Workspace ws = empty_workspace();
    AabbObstacle big; // volume 36
    big.center = {-10.0, 0.0, 0.0};
    big.half_extents = {3.0, 3.0, 0.0};
    AabbObstacle small; // volume 12
    small.center = {10.0, 0.0, 0.0};
    small.half_extents = {3.0, 1.0, 0.0};
    ws.obstacles = {big, small};

    const PointCloud pc = sample_point_cloud(ws, 1400, 17);
    int in_big = 0;
    for (int i = 0; i < pc.size(); ++i)
        if (pc.points(i, 0) < 0) ++in_big;
    const double p = 36.0 / 48.0;
    const double mean = 1400 * p;
    const double sigma = std::sqrt(1400 * p * (1 - p));
    CHECK(std::abs(in_big - mean) <= 3.0 * sigma);
}

TEST_CASE("point cloud: 2D shape is 1400 x 2 and deterministic per seed") {
    const Workspace ws = single_block_workspace();
    const PointCloud a = sample_point_cloud(ws, 1400, 42);
    const PointCloud b = sample_point_cloud(ws, 1400, 42);
    CHECK(a.points.rows() == 1400);
    CHECK(a.points.cols() == 2);
    CHECK(a.points == b.points);
    const PointCloud c = sample_point_cloud(ws, 1400, 43);
    CHECK(a.points != c.points);
    Workspace empty = empty_workspace();
    CHECK_THROWS_AS(sample_point_cloud(empty, 1400, 1), std::invalid_argument);
}

TEST_CASE("point cloud: f32 round trip preserves bytes and containment") {
    const Workspace ws = single_block_workspace(3);
    const PointCloud pc = sample_point_cloud(ws, 256, 9);
    TempDir dir("cloud_io");
    save_cloud_f32(pc, dir.path / "c.f32bin");
    const PointCloud back = load_cloud_f32(dir.path / "c.f32bin");
    CHECK(back.dim == 3);
    CHECK(back.points == pc.points);
}

TEST_CASE("path cost: 3-4-5 triangle and single config") {
    CHECK(path_cost({Config(0, 0), Config(3, 4)}) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(path_cost({Config(1, 2)}) == 0.0);
    CHECK_THROWS_AS(path_cost({}), std::invalid_argument);
}

TEST_CASE("path cost: random path matches independent summation oracle") {
    Rng rng(3);
    Path path;
    for (int i = 0; i < 5; ++i) path.emplace_back(rng.uniform(-20, 20), rng.uniform(-20, 20));
    double expect = 0.0;
    for (int i = 1; i < 5; ++i) {
        const double dx = path[i][0] - path[i - 1][0];
        const double dy = path[i][1] - path[i - 1][1];
        expect += std::sqrt(dx * dx + dy * dy);
    }
    CHECK(path_cost(path) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("path cost properties: reversal, non-negativity, triangle") {
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        Path path;
        const int len = static_cast<int>(rng.uniform_int(1, 6));
        for (int i = 0; i < len; ++i)
            path.emplace_back(rng.uniform(-20, 20), rng.uniform(-20, 20));
        Path rev(path.rbegin(), path.rend());
        CHECK(path_cost(path) == doctest::Approx(path_cost(rev)).epsilon(1e-12));
        CHECK(path_cost(path) >= 0.0);

        const Config a(rng.uniform(-20, 20), rng.uniform(-20, 20));
        const Config m(rng.uniform(-20, 20), rng.uniform(-20, 20));
        const Config b(rng.uniform(-20, 20), rng.uniform(-20, 20));
        CHECK(path_cost({a, b}) <= path_cost({a, m, b}) + 1e-12);
    }
}

TEST_CASE("workspace json round trip") {
    Workspace ws = single_block_workspace();
    ws.seed = 77;
    TempDir dir("ws_io");
    save_workspace(ws, dir.path / "ws.json");
    const Workspace back = load_workspace(dir.path / "ws.json");
    CHECK(back.dim == ws.dim);
    CHECK(back.seed == ws.seed);
    REQUIRE(back.obstacles.size() == 1);
    CHECK(back.obstacles[0].center == ws.obstacles[0].center);
    // serialization is byte-stable
    save_workspace(back, dir.path / "ws2.json");
    CHECK(read_text_file(dir.path / "ws.json") == read_text_file(dir.path / "ws2.json"));
}

TEST_CASE("workspace validation rejects broken invariants") {
    Workspace ws = single_block_workspace();
    ws.obstacles[0].center = {19.5, 0.0, 0.0}; // pokes out of bounds
    CHECK_THROWS_AS(ws.validate(), std::invalid_argument);
    ws = single_block_workspace();
    ws.dim = 4;
    CHECK_THROWS_AS(ws.validate(), std::invalid_argument);
}

TEST_SUITE_END();
