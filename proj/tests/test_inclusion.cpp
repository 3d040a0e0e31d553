#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hjbv/inclusion.hpp"

#include <random>

using namespace hjbv;

namespace {

InclusionProblem linear_decay() {
    InclusionProblem p;
    p.dim = 1;
    p.body = [](double, const Vec& x) { return ConvexBody(std::vector<Vec>{{-x[0]}}); };
    p.rho = [](double) { return 1.0; };
    p.rho_integral = [](double a, double b) { return b - a; };
    p.lipschitz = [](double, double) { return 1.0; };
    return p;
}

InclusionProblem interval_problem(double lo, double hi) {
    InclusionProblem p;
    p.dim = 1;
    p.body = [lo, hi](double, const Vec&) { return ConvexBody({{lo}, {hi}}); };
    double m = std::max(std::fabs(lo), std::fabs(hi));
    p.rho = [m](double) { return m; };
    p.rho_integral = [m](double a, double b) { return m * (b - a); };
    p.lipschitz = [](double, double) { return 0.0; };
    return p;
}

InclusionProblem disk_problem(int verts = 64) {
    InclusionProblem p;
    p.dim = 2;
    std::vector<Vec> vs;
    for (int k = 0; k < verts; ++k) {
        double a = 2 * M_PI * k / verts;
        vs.push_back({std::cos(a), std::sin(a)});
    }
    auto body = std::make_shared<ConvexBody>(vs);
    p.body = [body](double, const Vec&) { return *body; };
    p.rho = [](double) { return 1.0; };
    p.rho_integral = [](double a, double b) { return b - a; };
    p.lipschitz = [](double, double) { return 0.0; };
    return p;
}

}  // namespace

TEST_CASE("integrate_selection: linear decay hits e^{-1}") {
    auto p = linear_decay();
    IntegrateOptions opts;
    opts.step = 1e-3;
    auto tr = integrate_selection(p, 0.0, {1.0}, [](double, const Vec& x) { return Vec{-x[0]}; },
                                  1.0, opts);
    CHECK(std::fabs(tr.states.back()[0] - std::exp(-1.0)) <= 2 * opts.step);
}

TEST_CASE("integrate_selection: constant selector is exact") {
    auto p = interval_problem(-1, 1);
    auto tr = integrate_selection(p, 0.0, {0.0}, [](double, const Vec&) { return Vec{1.0}; },
                                  0.5);
    CHECK(tr.states.back()[0] == doctest::Approx(0.5).epsilon(1e-12));
    for (size_t i = 0; i + 1 < tr.times.size(); ++i)
        CHECK(tr.velocity(i)[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("integrate_selection: rotation in the disk drifts O(step)") {
    auto p = disk_problem(256);
    IntegrateOptions opts;
    opts.step = 1e-3;
    auto tr = integrate_selection(
        p, 0.0, {1.0, 0.0}, [](double, const Vec& x) { return Vec{-x[1], x[0]}; },
        2 * M_PI, opts);
    double r_end = norm(tr.states.back());
    CHECK(std::fabs(r_end - 1.0) <= 10 * opts.step + 0.01);  // 256-gon radius bias included
}

TEST_CASE("integrate_selection rejects selectors far from the body") {
    auto p = interval_problem(-1, 1);
    CHECK_THROWS_AS(
        integrate_selection(p, 0.0, {0.0}, [](double, const Vec&) { return Vec{5.0}; }, 0.5),
        std::domain_error);
}

TEST_CASE("filippov_correct: zero defect returns the input") {
    auto p = interval_problem(-1, 1);
    Trajectory y;
    y.times = linspace(0.0, 1.0, 101);
    for (double t : y.times) y.states.push_back({0.5 * t});
    auto res = filippov_correct(p, y);
    CHECK(res.defect_integral == doctest::Approx(0.0));
    CHECK(w11_distance(y, res.x) == doctest::Approx(0.0));
}

TEST_CASE("filippov_correct on the linear testbed") {
    auto p = linear_decay();
    for (double eps : {0.01, 0.05, 0.1}) {
        const double step = 1e-3;
        Trajectory y;
        y.times = linspace(0.0, 1.0, 1001);
        for (double t : y.times) y.states.push_back({std::exp(-t) + eps * (1 - std::exp(-t))});
        auto res = filippov_correct(p, y);
        // defect = eps * (b - a)
        CHECK(res.defect_integral == doctest::Approx(eps).epsilon(5e-3));
        double gap = w11_distance(y, res.x);
        CHECK(gap <= res.bound + 10 * step);
        // closed forms: gap = eps (1 - e^{-1})
        CHECK(gap == doctest::Approx(eps * (1 - std::exp(-1.0))).epsilon(2e-2));
    }
    // linear scaling within 5%
    auto gap_of = [&](double eps) {
        Trajectory y;
        y.times = linspace(0.0, 1.0, 1001);
        for (double t : y.times) y.states.push_back({std::exp(-t) + eps * (1 - std::exp(-t))});
        return w11_distance(y, filippov_correct(linear_decay(), y).x);
    };
    CHECK(gap_of(0.1) / gap_of(0.02) == doctest::Approx(5.0).epsilon(0.05));
}

TEST_CASE("gronwall envelope closed forms") {
    auto e1 = gronwall_envelope(0.0, 0.0, 1.0, 0.0, 2.0);
    CHECK(e1(1.3) == doctest::Approx(1.3));
    for (double t : linspace(0.0, 1.5, 20)) CHECK(std::sin(t) <= e1(t) + 1e-12);

    auto e2 = gronwall_envelope(2.0, 0.7, 0.0, 0.0, 2.0);
    CHECK(e2(1.0) == doctest::Approx(2.0 * std::exp(0.7)));

    auto e3 = gronwall_envelope(1.0, 1.0, 1.0, 0.0, 2.0);
    CHECK(e3(1.0) == doctest::Approx(2 * std::exp(1.0) - 1.0));
}

TEST_CASE("gronwall envelope dominates randomized Dini-bounded polygons") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(0, 1);
    int violations = 0;
    for (int trial = 0; trial < 50; ++trial) {
        double alpha_max = 2.0 * U(rng), beta_max = 1.5 * U(rng);
        double psi0 = 2.0 * U(rng) - 0.5;
        auto ts = linspace(0.0, 1.0, 201);
        std::vector<double> psi{psi0};
        for (size_t i = 0; i + 1 < ts.size(); ++i) {
            double a = alpha_max * U(rng), b = beta_max * (2 * U(rng) - 1);
            double slope = a * psi.back() + b - 2.0 * U(rng);  // random shortfall
            psi.push_back(psi.back() + (ts[i + 1] - ts[i]) * slope);
        }
        auto env = gronwall_envelope(psi0, alpha_max, beta_max, 0.0, 1.0);
        for (size_t i = 0; i < ts.size(); ++i)
            if (psi[i] > env(ts[i]) + 1e-9) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("viable trajectory rides the moving halfline boundary") {
    auto p = interval_problem(0, 2);
    Tube E;
    E.times = linspace(0.0, 1.0, 101);
    for (double t : E.times) E.slices.push_back(CompactSetRep::hull({{t}, {50.0}}));
    auto nodes = linspace(0.0, 1.0, 11);
    auto res = viable_trajectory(p, E, 0.0, {0.0}, 1.0, nodes);
    REQUIRE(res.ok());
    CHECK(res.max_node_distance <= 1e-6);
    for (double t : linspace(0.0, 1.0, 21))
        CHECK(res.x.state_at(t)[0] == doctest::Approx(t).epsilon(1e-6));
    // node distance to tube is zero
    for (double t : nodes) CHECK(E.eval(t).distance(res.x.state_at(t)) <= 1e-9);
}

TEST_CASE("viable trajectory stays in a constant disk") {
    auto p = disk_problem(64);
    Tube E;
    E.times = {0.0, 1.0};
    std::vector<Vec> vs;
    for (int k = 0; k < 128; ++k) {
        double a = 2 * M_PI * k / 128;
        vs.push_back({std::cos(a), std::sin(a)});
    }
    E.slices = {CompactSetRep::hull(vs), CompactSetRep::hull(vs)};
    auto res = viable_trajectory(p, E, 0.0, {1.0, 0.0}, 1.0, linspace(0.0, 1.0, 6));
    REQUIRE(res.ok());
    for (const auto& s : res.x.states) CHECK(norm(s) <= 1.0 + 1e-6);
}

TEST_CASE("viable trajectory respects the stepwise speed bound") {
    auto p = interval_problem(0, 2);
    Tube E;
    E.times = linspace(0.0, 1.0, 101);
    for (double t : E.times) E.slices.push_back(CompactSetRep::hull({{t}, {50.0}}));
    auto res = viable_trajectory(p, E, 0.0, {0.0}, 1.0, linspace(0.0, 1.0, 11));
    REQUIRE(res.ok());
    for (size_t i = 0; i + 1 < res.x.times.size(); ++i) {
        double h = res.x.times[i + 1] - res.x.times[i];
        double sp = dist(res.x.states[i + 1], res.x.states[i]) / h;
        double cap = p.rho(res.x.times[i]) * (1 + norm(res.x.states[i]));
        CHECK(sp <= cap + 0.3);  // node projections add slack at the budgeted scale
    }
}

TEST_CASE("infeasible tangential condition is reported with a witness") {
    // Tube escapes upward faster than any available velocity.
    auto p = interval_problem(-0.2, 0.2);
    Tube E;
    E.times = linspace(0.0, 1.0, 101);
    for (double t : E.times) E.slices.push_back(CompactSetRep::hull({{5 * t}, {5 * t + 0.1}}));
    auto res = viable_trajectory(p, E, 0.0, {0.0}, 1.0, linspace(0.0, 1.0, 6));
    CHECK(!res.ok());
    CHECK(res.status == ViabilityResult::Status::TangentialViolation);
    CHECK(!res.message.empty());
}

TEST_CASE("reachable sample on the interval and the singleton") {
    auto p = interval_problem(-1, 1);
    auto r = reachable_sample(p, 0.0, {0.0}, 1.0, 8);
    Box bb = CompactSetRep::hull(r.hull_vertices()).bounding_box();
    CHECK(bb.lo[0] == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(bb.hi[0] == doctest::Approx(1.0).epsilon(1e-9));

    InclusionProblem single;
    single.dim = 1;
    single.body = [](double, const Vec&) { return ConvexBody(std::vector<Vec>{{0.7}}); };
    single.rho = [](double) { return 1.0; };
    single.rho_integral = [](double a, double b) { return b - a; };
    single.lipschitz = [](double, double) { return 0.0; };
    auto r2 = reachable_sample(single, 0.0, {0.25}, 2.0, 4);
    REQUIRE(r2.hull_vertices().size() == 1);
    CHECK(r2.hull_vertices()[0][0] == doctest::Approx(0.25 + 0.7 * 2.0).epsilon(1e-9));
}

TEST_CASE("reachable sample of the disk approximates the unit ball") {
    auto p = disk_problem(64);
    auto r = reachable_sample(p, 0.0, {0.5, -0.25}, 1.0, 64);
    std::vector<Vec> ball;
    for (int k = 0; k < 256; ++k) {
        double a = 2 * M_PI * k / 256;
        ball.push_back({0.5 + std::cos(a), -0.25 + std::sin(a)});
    }
    CHECK(hausdorff(r, CompactSetRep::hull(ball)) <= 0.1);
}

TEST_CASE("reachable hulls are nested in the selector count") {
    auto p = disk_problem(16);
    auto r8 = reachable_sample(p, 0.0, {0.0, 0.0}, 0.5, 8);
    auto r16 = reachable_sample(p, 0.0, {0.0, 0.0}, 0.5, 16);
    CHECK(excess(r8, r16) <= 1e-9);

    // growth envelope: R(s) within the rho ball
    for (const auto& v : r16.hull_vertices())
        CHECK(norm(v) <= p.rho_integral(0.0, 0.5) * (1 + 1.0) + 1e-6);
}

TEST_CASE("trajectory csv io round trip") {
    Trajectory tr;
    tr.times = {0.0, 0.5, 1.0};
    tr.states = {{0.0, 1.0}, {0.25, 0.5}, {1.0, -1.0}};
    std::stringstream ss;
    tr.save_csv(ss);
    auto tr2 = Trajectory::load_csv(ss);
    CHECK(tr2.times == tr.times);
    CHECK(tr2.states == tr.states);
    CHECK(tr.w11_norm() == doctest::Approx(1.0 + dist(tr.states[1], tr.states[0]) +
                                           dist(tr.states[2], tr.states[1])));
}
