#pragma once

#include "hjbv/inclusion.hpp"

namespace hjbv {

/// State constraint data for the neighboring-feasible-trajectory run:
/// the set A with its inward constants (eta, r, M), the boundary speed
/// modulus q(t), and the dynamics Q.
struct ConstraintData {
    CompactSetRep A;
    double eta = 0, r = 0, M = 0;
    std::function<double(double)> q_bound;
    std::function<double(double, double)> q_integral;
    InclusionProblem Q;
    int normal_sphere_count = 256;

    void validate() const;
};

/// Interval indices of the outward-pushing time set: some sampled boundary
/// point within eta of xhat(s) carries a Clarke normal n with
/// <n, xhat'(s)> >= 0. Empty when the path keeps margin eta/4 from the
/// boundary. Breakpoints belong to the left interval.
std::vector<int> classify_outward(const ConstraintData& cd, const Trajectory& xhat);

double intervals_measure(const Trajectory& tr, const std::vector<int>& idx);

struct InwardResult {
    Trajectory y;
    double tau = 0;        // substitution stops when mu(A+ ∩ [t0,t]) reaches k*rho
    double mu_total = 0;   // mu(A+ ∩ [t0, tau])
    bool feasible = true;
    double witness_time = 0;
    std::string message;
    std::vector<char> substituted;  // per interval of y
};

/// Substitute the inward velocity w on A+ ∩ [t0, tau]: w minimizes |w - xhat'|
/// over Q(t, xhat(t)) subject to w and w - xhat' lying in -Sigma_A(y; eta, r),
/// ties broken lexicographically. Guarantees ||xhat - y||_W11 <= 2M mu.
InwardResult inward_substitute(const ConstraintData& cd, const Trajectory& xhat,
                               const std::vector<int>& Aplus, double k, double rho);

struct NftEstimate {
    double lhs = 0, rhs = 0;
    bool ok = true;
};

struct NftResult {
    Trajectory x;
    bool early_exit = false;
    bool interior_ok = true;
    bool constants_ok = true;
    bool feasible = true;
    std::string failure;  // empty on success

    double Delta = 0, k = 0, beta = 0, theta_phi = 0, rho = 0;
    double mu_Aplus = 0;
    double M_eff = 0;
    bool delta_within_window = true;  // t1 - t0 <= Delta

    std::vector<double> margin_times;
    std::vector<double> interior_margin;  // -signed_distance along x

    NftEstimate est_substitution;  // ||xhat-y|| <= 2 M mu
    NftEstimate est_defect;        // int defect <= 2 theta_phi M mu
    NftEstimate est_inward;        // <xi, y - y0> <= -r mu
    NftEstimate est_final;         // sup|xhat-x| <= beta rho

    bool pass() const {
        return feasible && interior_ok && est_substitution.ok && est_defect.ok &&
               est_inward.ok && est_final.ok;
    }
};

struct NftOptions {
    double step_slack_factor = 10.0;  // discretization slack in the estimates
    double inward_tol = 1e-9;
};

/// The appendix pipeline: classify A+, substitute inward velocities up to
/// tau, Filippov-correct, then certify strict interiority on (t0,t1] and the
/// linear estimate sup|xhat - x| <= beta rho with
/// beta = 2M(e^{theta_phi} theta_phi + 1)k. Constants are validated against
/// 8 Delta M <= eta, 2 e^{theta} theta M < r and the k-clause; Delta is the
/// largest admissible window, capped at delta = t1 - t0.
NftResult neighboring_feasible(const ConstraintData& cd, const Trajectory& xhat, double rho,
                               double delta, const NftOptions& opts = {});

}  // namespace hjbv
