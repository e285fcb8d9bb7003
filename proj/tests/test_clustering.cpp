#include <doctest.h>

#include <algorithm>
#include <set>

#include "fsp/clustering.hpp"
#include "dbscan_oracle.hpp"
#include "test_util.hpp"

using namespace fsp;
using testutil::Rng;
using testutil::canonicalize;
using testutil::dbscan_oracle;

TEST_SUITE("clustering") {

TEST_CASE("dbscan: two well-separated blobs form two clusters") {
    std::vector<Point3> pts;
    for (int i = 0; i < 10; ++i) pts.push_back({i * 0.1, 0, 0});
    for (int i = 0; i < 10; ++i) pts.push_back({10.0 + i * 0.1, 0, 0});
    const auto result = dbscan(pts, {0.5, 3});
    CHECK(result.clusters.size() == 2);
    CHECK(result.noise.empty());
    CHECK(canonicalize(result) == canonicalize(dbscan_oracle(pts, 0.5, 3)));
}

TEST_CASE("dbscan: an isolated point is noise") {
    const auto result = dbscan({{0, 0, 0}}, {0.5, 3});
    CHECK(result.clusters.empty());
    CHECK(result.noise == std::vector<std::size_t>{0});
}

TEST_CASE("dbscan: chain spaced exactly epsilon is one cluster (inclusive boundary)") {
    // Dyadic spacing keeps the pairwise distances exactly equal to epsilon.
    std::vector<Point3> pts;
    for (int i = 0; i < 5; ++i) pts.push_back({i * 0.5, 0, 0});
    const auto result = dbscan(pts, {0.5, 2});
    REQUIRE(result.clusters.size() == 1);
    CHECK(result.clusters[0].size() == 5);
    CHECK(result.noise.empty());
}

TEST_CASE("dbscan: matches the brute-force reference on random instances") {
    Rng rng(31);
    std::uniform_int_distribution<int> n_dist(0, 120);
    std::uniform_real_distribution<double> eps_dist(0.05, 1.5);
    std::uniform_int_distribution<int> minpts_dist(1, 8);
    std::uniform_real_distribution<double> extent(1.0, 6.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = n_dist(rng);
        const double box = extent(rng);
        const auto pts = testutil::random_points(rng, static_cast<std::size_t>(n), -box, box);
        const double eps = eps_dist(rng);
        const int min_pts = minpts_dist(rng);
        const auto mine = dbscan(pts, {eps, min_pts});
        const auto ref = dbscan_oracle(pts, eps, min_pts);
        CHECK(canonicalize(mine) == canonicalize(ref));
    }
}

TEST_CASE("dbscan: output is a partition of the input") {
    Rng rng(37);
    const auto pts = testutil::random_points(rng, 200, -4, 4);
    const auto result = dbscan(pts, {0.8, 4});
    std::vector<int> seen(pts.size(), 0);
    for (const auto& c : result.clusters) {
        for (std::size_t i : c) seen[i] += 1;
    }
    for (std::size_t i : result.noise) seen[i] += 1;
    CHECK(std::all_of(seen.begin(), seen.end(), [](int v) { return v == 1; }));
}

TEST_CASE("cluster_features: singleton") {
    const Cluster c = cluster_features({{1, 2, 3}});
    CHECK(c.centroid.x == 1.0);
    CHECK(c.centroid.y == 2.0);
    CHECK(c.centroid.z == 3.0);
    CHECK(c.hmax == 3.0);
    CHECK(c.sigma_z == 0.0);
    CHECK(c.abs_height == 0.0);
    CHECK(c.length_xy == 0.0);
}

TEST_CASE("cluster_features: two points on a vertical line") {
    const Cluster c = cluster_features({{0, 0, 0}, {0, 0, 4}});
    CHECK(c.hmax == 4.0);
    CHECK(c.abs_height == 4.0);
    CHECK(c.sigma_z == 2.0);
}

TEST_CASE("cluster_features: empty input is rejected") {
    CHECK_THROWS_AS(cluster_features({}), InvalidParameterError);
}

TEST_CASE("cluster_features: matches direct formula recomputation") {
    Rng rng(41);
    const auto pts = testutil::random_points(rng, 1000, -30, 30);
    const Cluster c = cluster_features(pts);

    double sx = 0, sy = 0, sz = 0, zmin = 1e18, zmax = -1e18;
    for (const Point3& p : pts) {
        sx += p.x;
        sy += p.y;
        sz += p.z;
        zmin = std::min(zmin, p.z);
        zmax = std::max(zmax, p.z);
    }
    const double n = 1000.0;
    double var = 0;
    for (const Point3& p : pts) var += (p.z - sz / n) * (p.z - sz / n);
    CHECK(c.centroid.x == doctest::Approx(sx / n).epsilon(1e-12));
    CHECK(c.centroid.y == doctest::Approx(sy / n).epsilon(1e-12));
    CHECK(c.centroid.z == doctest::Approx(sz / n).epsilon(1e-12));
    CHECK(c.hmax == zmax);
    CHECK(c.abs_height == zmax - zmin);
    CHECK(c.sigma_z == doctest::Approx(std::sqrt(var / n)).epsilon(1e-12));
}

TEST_CASE("cluster_features: permutation invariant") {
    Rng rng(43);
    auto pts = testutil::random_points(rng, 300, -10, 10);
    const Cluster a = cluster_features(pts);
    std::shuffle(pts.begin(), pts.end(), rng);
    const Cluster b = cluster_features(pts);
    CHECK(a.centroid.x == doctest::Approx(b.centroid.x).epsilon(1e-12));
    CHECK(a.sigma_z == doctest::Approx(b.sigma_z).epsilon(1e-12));
    CHECK(a.hmax == b.hmax);
    CHECK(a.abs_height == b.abs_height);
    CHECK(a.length_xy == b.length_xy);
}

TEST_CASE("classify_vehicle: threshold gates") {
    const ClassifierThresholds th;
    Cluster c;
    c.abs_height = 3.5;
    c.hmax = 3.5;
    c.sigma_z = 1.0;
    c.length_xy = 14.0;
    CHECK(classify_vehicle(c, th) == VehicleClass::LongTruck);

    c.length_xy = 6.0;
    c.abs_height = 3.2;
    CHECK(classify_vehicle(c, th) == VehicleClass::CompactTruck);

    c.abs_height = 1.4;  // sedan-like, fails the height gate
    CHECK(classify_vehicle(c, th) == VehicleClass::NonTruck);
}

TEST_CASE("classify_vehicle: monotone in abs_height") {
    Rng rng(47);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    const ClassifierThresholds th;
    for (int i = 0; i < 200; ++i) {
        Cluster c;
        c.abs_height = u(rng);
        c.hmax = u(rng);
        c.sigma_z = u(rng) / 3;
        c.length_xy = u(rng) * 4;
        const bool truck_before = classify_vehicle(c, th) != VehicleClass::NonTruck;
        c.abs_height += u(rng);
        const bool truck_after = classify_vehicle(c, th) != VehicleClass::NonTruck;
        if (truck_before) CHECK(truck_after);
    }
}

TEST_CASE("vehicle class string round trip") {
    for (VehicleClass c :
         {VehicleClass::LongTruck, VehicleClass::CompactTruck, VehicleClass::NonTruck}) {
        CHECK(vehicle_class_from_string(to_string(c)) == c);
    }
    CHECK_THROWS_AS(vehicle_class_from_string("Bus"), InvalidParameterError);
}

}  // TEST_SUITE
