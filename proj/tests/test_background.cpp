#include <doctest.h>

#include <filesystem>

#include "fsp/background.hpp"
#include "fsp/cloud_ops.hpp"
#include "test_util.hpp"

using namespace fsp;
using testutil::Rng;

namespace {

PointCloudFrame leveled_frame(std::vector<Point3> pts, std::int64_t id = 0) {
    PointCloudFrame f;
    f.frame_id = id;
    f.timestamp = 100.0 + static_cast<double>(id);
    f.tag = FrameTag::LeveledFrame;
    f.points = std::move(pts);
    return f;
}

}  // namespace

TEST_SUITE("background") {

TEST_CASE("build: single frame equals its own voxel dedup") {
    Rng rng(3);
    const auto frame = leveled_frame(testutil::random_points(rng, 200, -5, 5));
    const auto map = BackgroundMap::build({frame}, 0.5);
    const auto dedup = voxel_downsample(frame, VoxelParams{0.5});
    REQUIRE(map.points().size() == dedup.points.size());
    for (std::size_t i = 0; i < dedup.points.size(); ++i) {
        CHECK(map.points()[i].x == dedup.points[i].x);
        CHECK(map.points()[i].z == dedup.points[i].z);
    }
}

TEST_CASE("build: duplicate frames collapse, disjoint frames add up") {
    const auto a = leveled_frame({{0, 0, 0}, {10, 0, 0}}, 0);
    const auto b = leveled_frame({{0, 0, 20}, {10, 0, 20}}, 1);
    CHECK(BackgroundMap::build({a, a}, 0.1).size() == 2);
    CHECK(BackgroundMap::build({a, b}, 0.1).size() == 4);
    CHECK(BackgroundMap::build({a, b}, 0.1).source_frame_ids() ==
          std::vector<std::int64_t>{0, 1});
}

TEST_CASE("build: empty frame list is rejected") {
    CHECK_THROWS_AS(BackgroundMap::build({}, 0.1), InvalidParameterError);
    CHECK_THROWS_AS(BackgroundMap::build({leveled_frame({{0, 0, 0}})}, 0.0),
                    InvalidParameterError);
}

TEST_CASE("nearest distance: coincident point and 3-4-5 triangle") {
    const auto map = BackgroundMap::build({leveled_frame({{0, 0, 0}})}, 0.1);
    CHECK(nearest_background_distance({0, 0, 0}, map) == 0.0);
    CHECK(nearest_background_distance({3, 4, 0}, map) == 5.0);
}

TEST_CASE("nearest distance: equals the exhaustive scan exactly") {
    Rng rng(5);
    const auto bg_points = testutil::random_points(rng, 500, -20, 20);
    const auto map = BackgroundMap::build({leveled_frame(bg_points)}, 1e-6);
    REQUIRE(map.size() == 500);  // dedup voxel far below point spacing
    for (const Point3& q : testutil::random_points(rng, 100, -25, 25)) {
        CHECK(map.nearest_distance(q) == testutil::brute_force_nearest(q, map.points()));
    }
}

TEST_CASE("kd-tree radius query matches the exhaustive scan") {
    Rng rng(6);
    const auto pts = testutil::random_points(rng, 400, -5, 5);
    const KdTree3 tree(pts);
    std::vector<std::size_t> got;
    for (const Point3& q : testutil::random_points(rng, 50, -5, 5)) {
        const double radius = 1.3;
        tree.radius_indices(q, radius, got);
        std::vector<std::size_t> want;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (squared_distance(pts[i], q) <= radius * radius) want.push_back(i);
        }
        CHECK(got == want);
    }
    CHECK_THROWS_AS(KdTree3{}.nearest({0, 0, 0}), StateError);
}

TEST_CASE("extract_foreground: static scene yields an empty foreground") {
    Rng rng(8);
    const auto pts = testutil::random_points(rng, 150, -10, 10);
    const auto map = BackgroundMap::build({leveled_frame(pts)}, 1e-6);
    const auto result = extract_foreground(leveled_frame(pts), map, {});
    CHECK(result.foreground.points.empty());
    CHECK(result.tau == 0.0);
}

TEST_CASE("extract_foreground: one far point among near-zero distances") {
    const auto map = BackgroundMap::build({leveled_frame({{0, 0, 0}})}, 0.1);
    std::vector<Point3> pts(99, Point3{0, 0, 0});
    pts.push_back({5, 0, 0});
    const auto result = extract_foreground(leveled_frame(pts), map, {2.0});

    // Direct arithmetic oracle over the distances {0 x99, 5}.
    std::vector<double> d(99, 0.0);
    d.push_back(5.0);
    double mu = 0;
    for (double v : d) mu += v;
    mu /= 100.0;
    double var = 0;
    for (double v : d) var += (v - mu) * (v - mu);
    const double sigma = std::sqrt(var / 100.0);
    const double tau = mu + 2.0 * sigma;

    CHECK(result.mu_d == doctest::Approx(mu).epsilon(1e-12));
    CHECK(result.sigma_d == doctest::Approx(sigma).epsilon(1e-12));
    CHECK(result.tau == doctest::Approx(tau).epsilon(1e-12));
    CHECK(result.mu_d == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(result.sigma_d == doctest::Approx(0.49749).epsilon(1e-4));
    CHECK(result.tau == doctest::Approx(1.045).epsilon(1e-3));
    REQUIRE(result.foreground.points.size() == 1);
    CHECK(result.foreground.points[0].x == 5.0);
}

TEST_CASE("extract_foreground: empty frame is empty, not an error") {
    const auto map = BackgroundMap::build({leveled_frame({{0, 0, 0}})}, 0.1);
    const auto result = extract_foreground(leveled_frame({}), map, {});
    CHECK(result.foreground.points.empty());
    CHECK(result.input_count == 0);
}

TEST_CASE("extract_foreground: single-point frame thresholds itself out") {
    const auto map = BackgroundMap::build({leveled_frame({{0, 0, 0}})}, 0.1);
    const auto result = extract_foreground(leveled_frame({{3, 0, 0}}), map, {2.0});
    CHECK(result.sigma_d == 0.0);
    CHECK(result.tau == 3.0);
    CHECK(result.foreground.points.empty());
}

TEST_CASE("extract_foreground: threshold consistency against brute force") {
    Rng rng(9);
    const auto bg = testutil::random_points(rng, 60, -8, 8);
    const auto map = BackgroundMap::build({leveled_frame(bg)}, 1e-6);
    const auto frame_pts = testutil::random_points(rng, 250, -10, 10);
    const auto result = extract_foreground(leveled_frame(frame_pts), map, {1.5});

    // Rebuild the expected set with exhaustive-scan distances.
    std::vector<Point3> expected;
    for (const Point3& p : frame_pts) {
        if (testutil::brute_force_nearest(p, map.points()) > result.tau) expected.push_back(p);
    }
    REQUIRE(expected.size() == result.foreground.points.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(expected[i].x == result.foreground.points[i].x);
        CHECK(expected[i].y == result.foreground.points[i].y);
        CHECK(expected[i].z == result.foreground.points[i].z);
    }
}

TEST_CASE("extract_foreground: larger alpha never grows the foreground") {
    Rng rng(10);
    const auto bg = testutil::random_points(rng, 80, -8, 8);
    const auto map = BackgroundMap::build({leveled_frame(bg)}, 1e-6);
    const auto frame = leveled_frame(testutil::random_points(rng, 300, -10, 10));
    std::size_t prev = extract_foreground(frame, map, {0.25}).foreground.points.size();
    for (double alpha : {0.5, 1.0, 2.0, 4.0}) {
        const std::size_t cur = extract_foreground(frame, map, {alpha}).foreground.points.size();
        CHECK(cur <= prev);
        prev = cur;
    }
}

TEST_CASE("extract_foreground: optional clamp bounds tau") {
    const auto map = BackgroundMap::build({leveled_frame({{0, 0, 0}})}, 0.1);
    // Mostly-foreground frame inflates the adaptive tau; the ceiling restores it.
    std::vector<Point3> pts;
    for (int i = 0; i < 50; ++i) pts.push_back({30.0 + i * 0.01, 0, 0});
    ForegroundParams clamped{2.0, true, 0.2, 2.0};
    const auto result = extract_foreground(leveled_frame(pts), map, clamped);
    CHECK(result.tau == 2.0);
    CHECK(result.foreground.points.size() == pts.size());

    // Floor engages when the scene is all background.
    const auto still = extract_foreground(leveled_frame({{0, 0, 0}}), map, clamped);
    CHECK(still.tau == 0.2);
    CHECK(still.foreground.points.empty());
}

TEST_CASE("save/load round trip with sidecar") {
    const std::string path =
        (std::filesystem::temp_directory_path() / "fsp_bg_test.txt").string();
    const auto map = BackgroundMap::build(
        {leveled_frame({{1.25, -3.5, 0.75}, {10.0, 2.0, 0.5}}, 42)}, 0.25);
    save_background(map, path);
    const auto loaded = load_background(path);
    CHECK(loaded.size() == map.size());
    CHECK(loaded.dedup_voxel() == 0.25);
    CHECK(loaded.source_frame_ids() == std::vector<std::int64_t>{42});
    CHECK(loaded.nearest_distance({1.25, -3.5, 0.75}) == 0.0);
    std::filesystem::remove(path);
    std::filesystem::remove(path + ".meta.json");
}

}  // TEST_SUITE
