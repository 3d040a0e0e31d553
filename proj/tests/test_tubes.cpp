#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hjbv/tubes.hpp"

#include <random>
#include <sstream>

using namespace hjbv;

namespace {

Tube interval_tube(const std::vector<double>& times,
                   const std::function<double(double)>& lo,
                   const std::function<double(double)>& hi,
                   Tube::Interp interp = Tube::Interp::PiecewiseConstant) {
    Tube tube;
    tube.times = times;
    tube.interp = interp;
    for (double t : times) tube.slices.push_back(CompactSetRep::hull({{lo(t)}, {hi(t)}}));
    return tube;
}

double cantor_function(double x) {
    if (x <= 0) return 0;
    if (x >= 1) return 1;
    double y = 0, f = 0.5;
    for (int i = 0; i < 45; ++i) {
        x *= 3;
        int d = static_cast<int>(x);
        x -= d;
        if (d == 1) { y += f; break; }
        if (d >= 2) y += f;
        f *= 0.5;
    }
    return y;
}

Tube cantor_tube(int knots = 129) {
    auto ts = linspace(0.0, 1.0, knots);
    return interval_tube(ts, [](double t) { return cantor_function(t); },
                         [](double) { return 2.0; });
}

}  // namespace

TEST_CASE("LBV of the growing ball tube is its radius increment") {
    auto ts = linspace(0.0, 1.0, 129);
    auto tube = interval_tube(ts, [](double t) { return -(1 + t); },
                              [](double t) { return 1 + t; });
    Box K{{-3.0}, {3.0}};
    double v = lbv_variation(tube, 0.0, 1.0, K, 6);
    CHECK(std::fabs(v - 1.0) <= 1e-2);
}

TEST_CASE("constant tube has zero variation") {
    auto ts = linspace(0.0, 1.0, 17);
    auto tube = interval_tube(ts, [](double) { return -1.0; }, [](double) { return 1.0; });
    CHECK(lbv_variation(tube, 0.0, 1.0, tube.default_compact(), 6) == doctest::Approx(0.0));
}

TEST_CASE("Cantor tube: LBV is 1") {
    auto tube = cantor_tube();
    Box K{{-1.0}, {2.5}};
    double v = lbv_variation(tube, 0.0, 1.0, K, 6);
    CHECK(std::fabs(v - 1.0) <= 5e-2);
}

TEST_CASE("Cantor tube is a non-AC witness: modulus stays above 0.4") {
    auto tube = cantor_tube();
    for (int k = 1; k <= 7; ++k) {
        double eps = std::pow(2.0, -k);
        double mod = ac_modulus(tube, 0.0, 1.0, eps, 7);
        CHECK(mod >= 0.4);
    }
}

TEST_CASE("Lipschitz interpolated tubes have vanishing AC modulus") {
    auto ts = linspace(0.0, 1.0, 129);
    auto tube = interval_tube(ts, [](double t) { return t; }, [](double) { return 2.0; },
                              Tube::Interp::LinearParams);
    double m3 = ac_modulus(tube, 0.0, 1.0, std::pow(2.0, -3), 7);
    double m7 = ac_modulus(tube, 0.0, 1.0, std::pow(2.0, -7), 7);
    CHECK(m7 <= m3 + 1e-12);
    CHECK(m7 <= 0.05);  // ~ eps * slope
}

TEST_CASE("LBV is monotone in depth and in the compact window") {
    auto ts = linspace(0.0, 1.0, 65);
    auto tube = interval_tube(ts, [](double t) { return std::sin(3 * t); },
                              [](double t) { return 2 + std::cos(2 * t); });
    Box K = tube.default_compact();
    auto curve = lbv_refinement_curve(tube, 0.0, 1.0, K, 6);
    for (size_t i = 1; i < curve.size(); ++i)
        CHECK(curve[i].second >= curve[i - 1].second - 1e-12);

    Box K_small{{0.0}, {1.5}};
    CHECK(lbv_variation(tube, 0.0, 1.0, K_small, 5) <=
          lbv_variation(tube, 0.0, 1.0, K, 5) + 1e-12);
}

TEST_CASE("LBV is additive across dyadic splits") {
    auto ts = linspace(0.0, 1.0, 65);
    auto tube = interval_tube(ts, [](double t) { return cantor_function(t); },
                              [](double) { return 3.0; });
    Box K{{-1.0}, {3.5}};
    double whole = lbv_variation(tube, 0.0, 1.0, K, 5);
    double left = lbv_variation(tube, 0.0, 0.5, K, 4);
    double right = lbv_variation(tube, 0.5, 1.0, K, 4);
    CHECK(whole == doctest::Approx(left + right).epsilon(1e-10));
    CHECK(whole >= left + right - 1e-10);
}

TEST_CASE("Lipschitz tubes obey the continuity surrogate") {
    const double L = 0.7;
    auto ts = linspace(0.0, 2.0, 257);
    auto tube = interval_tube(ts, [L](double t) { return -1 - L * t; },
                              [L](double t) { return 1 + L * t; });
    double v = lbv_variation(tube, 0.0, 2.0, tube.default_compact(), 6);
    CHECK(v <= L * 2.0 + 1e-6);
}

TEST_CASE("epi_tube basics and the value cap") {
    Box xbox{{-2.0}, {2.0}};
    auto ts = linspace(0.0, 1.0, 5);
    std::vector<GridFunction> zero_slices;
    for (size_t i = 0; i < ts.size(); ++i)
        zero_slices.push_back(GridFunction::make(xbox, {41}, 0.0));
    auto tube = epi_tube(ts, zero_slices, 4.0);
    auto s = tube.eval(0.3);
    CHECK(s.member({0.5, 1.0}));
    CHECK(s.member({0.5, 0.0}));
    CHECK(!s.member({0.5, -0.5}));
    CHECK(!s.member({0.5, 4.5}));

    // entirely above cap -> error
    std::vector<GridFunction> high;
    for (size_t i = 0; i < ts.size(); ++i) high.push_back(GridFunction::make(xbox, {41}, 9.0));
    CHECK_THROWS_AS(epi_tube(ts, high, 4.0), std::domain_error);
}

TEST_CASE("epigraph tube of the decaying value function is continuous") {
    Box xbox{{-2.0}, {2.0}};
    auto ts = linspace(0.0, 2.0, 41);
    std::vector<GridFunction> slices;
    for (double t : ts) {
        GridFunction g = GridFunction::make(xbox, {81}, 0.0);
        for (size_t f = 0; f < g.node_count(); ++f) {
            double x = g.node_point(f)[0];
            g.values[f] = std::exp(-t) * (std::fabs(x) - 1 + std::exp(-std::fabs(x)));
        }
        slices.push_back(std::move(g));
    }
    auto tube = epi_tube(ts, slices, 3.0);
    auto rep = tube_continuity_report(tube, tube.default_compact());
    CHECK(rep.max_jump_rate < 1.5);  // the value function is Lipschitz in t

    // A jump in t is caught with a witness knot.
    std::vector<GridFunction> jump = slices;
    for (auto& v : jump[20].values) v += 1.0;
    auto tube2 = epi_tube(ts, jump, 3.0);
    auto rep2 = tube_continuity_report(tube2, tube2.default_compact());
    CHECK(rep2.max_jump_rate > 5.0);
    CHECK((rep2.worst_knot == 19 || rep2.worst_knot == 20));
}

TEST_CASE("psi_distance examples") {
    auto ts = linspace(0.0, 1.0, 11);  // 0.7 is a knot
    auto E = interval_tube(ts, [](double t) { return t; }, [](double) { return 50.0; });
    auto Y = interval_tube(ts, [](double) { return 0.0; }, [](double) { return 0.0; });
    CHECK(psi_distance(E, Y, 0.7) == doctest::Approx(0.7).epsilon(1e-9));

    auto O = interval_tube(ts, [](double) { return -1.0; }, [](double) { return 1.0; });
    CHECK(psi_distance(E, O, 0.2) == doctest::Approx(0.0));

    // Point to the epigraph of |x|: distance 1/sqrt(2).
    Box xbox{{-2.0}, {2.0}};
    std::vector<GridFunction> abs_slices;
    for (int i = 0; i < 2; ++i) {
        GridFunction g = GridFunction::make(xbox, {161}, 0.0);
        for (size_t f = 0; f < g.node_count(); ++f)
            g.values[f] = std::fabs(g.node_point(f)[0]);
        abs_slices.push_back(std::move(g));
    }
    auto epi = epi_tube({0.0, 1.0}, abs_slices, 5.0);
    Tube pt;
    pt.times = {0.0, 1.0};
    pt.slices = {CompactSetRep::hull({{1.0, 0.0}}), CompactSetRep::hull({{1.0, 0.0}})};
    double d = psi_distance(epi, pt, 0.5);
    CHECK(std::fabs(d - 1.0 / std::sqrt(2.0)) <= 0.03);
}

TEST_CASE("psi_bv_report on the stock cases") {
    auto ts = linspace(0.0, 1.0, 65);
    auto rho_zero = [](double, double) { return 0.0; };

    // Psi == 0: trivial pass.
    auto E = interval_tube(ts, [](double t) { return -1 - t; }, [](double t) { return 1 + t; });
    auto Y0 = interval_tube(ts, [](double) { return 0.0; }, [](double) { return 0.0; });
    auto rep = psi_bv_report(E, Y0, 0.0, 1.0, 5, rho_zero);
    CHECK(rep.pass);

    // Psi(t) = 1 + sin t; variation bounded by the tube variation.
    auto ts2 = linspace(0.0, 3.0, 193);
    auto E2 = interval_tube(ts2, [](double t) { return 1 + std::sin(t); },
                            [](double) { return 60.0; });
    auto Y02 = interval_tube(ts2, [](double) { return 0.0; }, [](double) { return 0.0; });
    auto rep2 = psi_bv_report(E2, Y02, 0.0, 3.0, 5, rho_zero);
    CHECK(rep2.pass);

    // Constant everything: 0 <= 0.
    auto E3 = interval_tube(ts, [](double) { return 1.0; }, [](double) { return 2.0; });
    auto rep3 = psi_bv_report(E3, Y0, 0.0, 1.0, 4, rho_zero);
    CHECK(rep3.pass);
    CHECK(rep3.rows.back().psi_variation == doctest::Approx(0.0));
}

TEST_CASE("psi_bv bound holds on random Lipschitz tube/Y pairs") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> U(0.2, 1.0), P(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        double La = U(rng), Lb = U(rng), Ly = U(rng);
        double pa = P(rng), pb = P(rng), py = P(rng);
        auto ts = linspace(0.0, 1.0, 129);
        auto E = interval_tube(ts,
                               [=](double t) { return pa + La * std::sin(2 * t + pa); },
                               [=](double t) { return 3 + pb + Lb * std::cos(t); });
        auto Y = interval_tube(ts, [=](double t) { return py + Ly * std::sin(t + pb); },
                               [=](double t) { return py + Ly * std::sin(t + pb); });
        double rho = Ly;  // |d/dt of the point| <= Ly
        auto rep = psi_bv_report(E, Y, 0.0, 1.0, 5,
                                 [rho](double a, double b) { return rho * (b - a); }, 1e-6);
        CHECK(rep.pass);
    }
}

TEST_CASE("tube io round trip") {
    auto ts = linspace(0.0, 1.0, 5);
    auto tube = interval_tube(ts, [](double t) { return t; }, [](double t) { return 2 + t; });
    std::stringstream ss;
    tube.save(ss);
    auto tube2 = Tube::load(ss);
    CHECK(tube2.times == tube.times);
    CHECK(tube2.slices.size() == tube.slices.size());
    CHECK(tube2.slices[2].hull_vertices() == tube.slices[2].hull_vertices());
}
