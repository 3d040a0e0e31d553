#pragma once

#include "hjbv/tubes.hpp"

namespace hjbv {

/// Polygonal path with piecewise-constant derivative per interval.
struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> states;

    void validate() const;
    int dim() const { return states.empty() ? 0 : static_cast<int>(states[0].size()); }
    double t0() const { return times.front(); }
    double t1() const { return times.back(); }

    Vec velocity(size_t interval) const;
    Vec state_at(double t) const;  // linear interpolation

    /// |x(t0)| + sum |dx| up to time t (whole path by default).
    double w11_norm(double up_to = kInf) const;

    /// CSV: header `t,x1,...,xd`, one row per node.
    void save_csv(std::ostream& os) const;
    static Trajectory load_csv(std::istream& is);
    static Trajectory load_csv_file(const std::string& path);
    void save_csv_file(const std::string& path) const;
};

/// W^{1,1} distance of two paths resampled onto the union grid, up to time t.
double w11_distance(const Trajectory& a, const Trajectory& b, double up_to = kInf);
double sup_distance(const Trajectory& a, const Trajectory& b);

/// Velocity-body dynamics x' in Phi(t,x) with growth and Lipschitz moduli.
struct InclusionProblem {
    int dim = 1;
    std::function<ConvexBody(double t, const Vec& x)> body;
    std::function<double(double)> rho;                      // sup |v| <= rho(t)(1+|x|)
    std::function<double(double, double)> rho_integral;     // int_a^b rho
    std::function<double(double t, double r)> lipschitz;    // k_r(t)

    void validate_body(double t, const Vec& x, double tol = 1e-6) const;
};

struct IntegrateOptions {
    double step = 0;              // 0: min(1e-3, (t1-t0)/1000)
    double proj_tol_abs = 1e-2;   // selector defect allowance, scaled by (1+|x|)
};

/// Explicit Euler with the selector projected onto the body each step.
/// Throws when the selector strays from the body beyond proj_tol.
Trajectory integrate_selection(const InclusionProblem& prob, double t0, const Vec& x0,
                               const std::function<Vec(double, const Vec&)>& selector,
                               double t1, const IntegrateOptions& opts = {});

struct FilippovResult {
    Trajectory x;            // genuine Phi-trajectory from y(t0)
    double defect_integral;  // int dist(y'(s), Phi(s, y(s))) ds
    double bound;            // e^{int phi} * defect_integral
    double phi_integral;
};

/// Stepwise Filippov correction: at each node the Phi(t,x)-velocity nearest
/// to y'(t) is taken. Guarantees ||y - x||_{W11,[t0,t]} <= bound + C*step.
FilippovResult filippov_correct(const InclusionProblem& prob, const Trajectory& y);

/// Closed-form Gronwall-Dini envelope psi0 e^{a(t-tau)} + b(e^{a(t-tau)}-1)/a.
struct GronwallEnvelope {
    double psi0, alpha, beta, tau, T;
    double operator()(double t) const;
};

GronwallEnvelope gronwall_envelope(double psi0, double alpha_sup, double beta_sup, double tau,
                                   double T);

struct ViabilityOptions {
    double substep = 1e-3;
    double viab_tol = 1e-2;
    double tang_tol = 1e-3;   // scaled by (1+|y|)
    double tang_slack = 2.0;  // per unit of knot horizon: discrete tubes carry
                              // an O(spacing) feasibility defect
    double jump_tol = 0.25;   // max node projection jump
    bool check_tangential = true;
    int tangential_samples = 8;  // per node time
};

struct ViabilityResult {
    enum class Status { Ok, TangentialViolation, JumpTooLarge };
    Status status = Status::Ok;
    Trajectory x;
    std::vector<double> node_jumps;
    double jump_total = 0;
    double max_node_distance = 0;  // dist(x(t_i), E(t_i)) before projection
    double witness_t = 0;
    Vec witness_y;
    std::string message;
    bool ok() const { return status == Status::Ok; }
};

/// Viable trajectory inside a continuous LBV tube: steer with the
/// Phi-velocity nearest to the tube's contingent direction, Filippov-correct,
/// project at node times, restart. Projection jumps are budgeted and
/// reported.
ViabilityResult viable_trajectory(const InclusionProblem& prob, const Tube& E, double t0,
                                  const Vec& x0, double t1,
                                  const std::vector<double>& node_times,
                                  const ViabilityOptions& opts = {});

/// Inner approximation of the reachable set at time s: endpoint hull of
/// extremal bang selections (round-robin over body vertices, then seeded
/// random mixtures). Nondecreasing in n_selectors.
CompactSetRep reachable_sample(const InclusionProblem& prob, double t0, const Vec& x0, double s,
                               int n_selectors, unsigned seed = 42,
                               const IntegrateOptions& opts = {});

}  // namespace hjbv
