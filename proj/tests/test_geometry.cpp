#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hjbv/geometry.hpp"

#include <random>

using namespace hjbv;

TEST_CASE("min-norm point of segment hulls") {
    // Segment [1,2] x {0}: nearest point to origin is (1,0).
    auto r = min_norm_point({{1, 0}, {2, 0}});
    CHECK(r.distance == doctest::Approx(1.0).epsilon(1e-10));

    // Segment through the origin.
    auto r2 = min_norm_point({{-1, 1}, {1, 1}});
    CHECK(r2.distance == doctest::Approx(1.0).epsilon(1e-10));

    // Triangle containing the origin.
    auto r3 = min_norm_point({{-1, -1}, {2, -1}, {0, 2}});
    CHECK(r3.distance == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("hull projection against a brute-force oracle") {
    // Oracle: dense convex-combination scan over a fixed triangle.
    std::vector<Vec> tri = {{0, 0}, {2, 0}, {0, 1}};
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(-3, 3);
    for (int trial = 0; trial < 50; ++trial) {
        Vec q = {U(rng), U(rng)};
        double oracle = kInf;
        const int N = 200;
        for (int i = 0; i <= N; ++i)
            for (int j = 0; j <= N - i; ++j) {
                double a = double(i) / N, b = double(j) / N, c = 1 - a - b;
                Vec p = {a * tri[0][0] + b * tri[1][0] + c * tri[2][0],
                         a * tri[0][1] + b * tri[1][1] + c * tri[2][1]};
                oracle = std::min(oracle, dist(p, q));
            }
        double got = dist_to_hull(tri, q);
        // Exact distance never exceeds the scanned minimum, and the scan has
        // granularity diam/N.
        CHECK(got <= oracle + 1e-9);
        CHECK(std::fabs(got - oracle) <= 0.02);
    }
}

TEST_CASE("hull-to-hull distance") {
    std::vector<Vec> a = {{0, 0}, {1, 0}, {0, 1}};
    std::vector<Vec> b = {{3, 0}, {4, 0}, {3, 1}};
    CHECK(hull_to_hull_distance(a, b) == doctest::Approx(2.0).epsilon(1e-10));
    // Overlapping hulls.
    std::vector<Vec> c = {{0.5, -1}, {0.5, 1}, {2, 0}};
    CHECK(hull_to_hull_distance(a, c) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("cone projection (NNLS)") {
    // First-quadrant cone in R^2.
    std::vector<Vec> gen = {{1, 0}, {0, 1}};
    auto inside = project_to_cone(gen, {2, 3});
    CHECK(inside.distance == doctest::Approx(0.0).epsilon(1e-10));
    auto outside = project_to_cone(gen, {-1, -1});
    CHECK(outside.distance == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
    auto side = project_to_cone(gen, {-1, 2});
    CHECK(side.distance == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("2D hull is CCW and minimal") {
    std::vector<Vec> pts = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}, {0.2, 0.8}};
    auto h = hull_2d(pts);
    CHECK(h.size() == 4);
    double area2 = 0;
    for (size_t i = 0; i < h.size(); ++i) {
        const auto& a = h[i];
        const auto& b = h[(i + 1) % h.size()];
        area2 += a[0] * b[1] - a[1] * b[0];
    }
    CHECK(area2 > 0);  // CCW
}

TEST_CASE("ConvexBody canonicalization is idempotent") {
    ConvexBody b({{0, 0}, {1, 0}, {1e-14, 0}, {1, 1}, {0, 1}, {0.3, 0.3}});
    ConvexBody b2(b.vertices());
    CHECK(b.vertices() == b2.vertices());
    CHECK(b.vertices().size() == 4);
}

TEST_CASE("ConvexBody support and projection") {
    ConvexBody box({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}});
    CHECK(box.support({1, 0}) == doctest::Approx(1.0));
    CHECK(box.distance({2, 0}) == doctest::Approx(1.0).epsilon(1e-10));
    auto p = box.project({2, 0.5});
    CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(box.interior_depth({0, 0}) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("Chebyshev center of an interval and a rectangle") {
    ConvexBody iv({{-1}, {3}});
    CHECK(iv.chebyshev_center()[0] == doctest::Approx(1.0));
    ConvexBody rect({{0, 0}, {4, 0}, {4, 2}, {0, 2}});
    auto c = rect.chebyshev_center(81);
    CHECK(rect.interior_depth(c) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("direction grids and ball lattices") {
    auto d2 = sphere_directions(2, 64);
    CHECK(d2.size() == 64);
    for (const auto& d : d2) CHECK(norm(d) == doctest::Approx(1.0).epsilon(1e-12));

    auto d3 = sphere_directions(3, 512);
    for (const auto& d : d3) CHECK(norm(d) == doctest::Approx(1.0).epsilon(1e-12));

    auto ball = ball_lattice(2, 256);
    bool has_origin = false, has_e1 = false, has_neg_e1 = false;
    for (const auto& p : ball) {
        CHECK(norm(p) <= 1.0 + 1e-12);
        if (norm(p) < 1e-14) has_origin = true;
        if (dist(p, {1.0, 0.0}) < 1e-12) has_e1 = true;
        if (dist(p, {-1.0, 0.0}) < 1e-12) has_neg_e1 = true;
    }
    CHECK(has_origin);
    CHECK(has_e1);
    CHECK(has_neg_e1);

    double mesh = ball_sample_mesh(ball, 2, 2000);
    CHECK(mesh < 0.25);
}
