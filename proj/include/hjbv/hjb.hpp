#pragma once

#include "hjbv/inclusion.hpp"
#include "hjbv/representation.hpp"

namespace hjbv {

/// Infinite-horizon control problem on a state constraint, truncated at T_max
/// under the vanishing condition. The augmented body
///   PhiHat(t,x) = {(f(t,x,th), -L(t,x,th) - r) : th in B^{n+1},
///                  r in [0, sigma_hat(t)(1+|x|) - L(t,x,th)]}
/// drives the epigraph viability runs.
struct ControlProblem {
    CompactSetRep Omega;
    Representation rep;
    double T_max = 9.0;
    double vanish_tol = 1e-3;
    std::function<double(double)> tail_estimator;  // int_T^inf sup_x |L| ds

    ConvexBody phi_hat(double t, const Vec& x, int dom_samples = 17) const;

    /// PhiHat as inclusion dynamics on the (x, z) state.
    InclusionProblem phi_hat_problem() const;
};

/// Registry-model problem with the horizon chosen so the tail estimator sits
/// inside vanish_tol/2.
ControlProblem make_control_problem(const std::string& model_name, const CompactSetRep& omega,
                                    double vanish_tol = 1e-3, int theta_count = 256);

struct ValueField {
    GridFunction grid;  // axes [t, x1..xn]
    std::string provenance;  // computed-DP | closed-form | user-supplied

    double t_max() const { return grid.hi[0]; }
    double dt() const { return grid.step(0); }
    double dx() const { return grid.step(1); }
    double at(double t, const Vec& x) const;

    struct Vanish {
        bool pass = false;
        double t_star = 0;           // onset of the nonincreasing tail
        double sup_at_tmax = 0;
        std::vector<double> sup_curve;
    };
    Vanish vanish_check(double tol) const;

    /// First grid time from which sup_x |V| stays <= eps (fails when none).
    struct Horizon {
        bool exists = false;
        double time = 0;
    };
    Horizon vanish_time(double eps) const;

    void save_file(const std::string& path) const;
    static ValueField load_file(const std::string& path);
};

struct DpOptions {
    int t_res = 901;
    int x_res = 201;
    bool project_mode = false;  // diagnosis only: project instead of discard
};

/// Backward dynamic programming for the representation value function:
/// V(T_max,.) = 0, one implicit-free Euler step per slice, multiliear
/// interpolation in x, steps leaving Omega discarded (inf when all are).
ValueField value_function(const ControlProblem& cp, const DpOptions& opts = {});

/// Closed form e^{-t}(|x| - 1 + e^{-|x|}) of the decaying eikonal testbed.
double eikonal_decay_value(double t, double x);

/// H*(t,x,v,1) tabulated on a coarse t lattice for the alpha recursion.
struct ConjugateStack {
    std::vector<double> t_samples;
    Box x_box{};
    Box v_box{};
    int x_res = 0, v_res = 0;
    std::vector<GridFunction> slices;  // per coarse t, over (x, v); +inf off dom

    double hstar(double t, double x, double v) const;
    bool covers_domain(const ControlProblem& cp) const;
};

ConjugateStack build_conjugate_stack(const HamiltonianModel& model, const Box& x_box,
                                     int t_coarse, double t_max, const Box& v_box, int v_res,
                                     int x_res, const Box& p_box, int p_res);

/// alpha(t,x): the same backward recursion with the velocity as the decision
/// variable and H* from the conjugate grids as the running cost.
GridFunction alpha_field(const ControlProblem& cp, const ConjugateStack& stack,
                         const DpOptions& opts = {});

double alpha_infimum(const ControlProblem& cp, double t, const Vec& x,
                     const ConjugateStack& stack, const GridFunction* field = nullptr);

struct ResidualPlan {
    int t_samples = 9;
    int x_samples = 13;
    int cone_directions = 512;  // base sphere; band refinement carries precision
    double polar_tol = 0;  // 0: auto = sphere mesh sqrt(4 pi / N)
    double cone_tol = 1e-6;
    double z_span = 0.75;
    bool include_boundary = true;
};

struct ResidualReport {
    double interior_max_abs = 0;   // max |F(t,x,-phi)| over interior samples
    double boundary_min = 0;       // min F over boundary samples (target >= 0)
    double fd_max_abs = 0;         // finite-difference residual cross-check
    double cone_fd_max_gap = 0;    // |cone metric - |fd|/|ray|| worst case
    double C_reported = 0;         // interior_max / (dt + dx)
    double polar_tol_used = 0;     // effective polar acceptance (mesh-scaled)
    int samples = 0, skipped = 0;
    std::string witness;
    bool pass(double tol_interior) const { return interior_max_abs <= tol_interior; }
};

/// Definition-style weak-solution check: sample the contingent cone of
/// epi u, polar it, and evaluate F(t,x,-phi) = -phi_t + H(t,x,-phi_x,-phi_z).
/// The sign convention is anchored to the smooth-point reduction
/// -du/dt + H(t,x,-du/dx,1), which the checker also evaluates by finite
/// differences as a cross-check. Cone route implemented for n = 1.
ResidualReport epigraphical_residual(const ValueField& u, const HamiltonianModel& model,
                                     const CompactSetRep& omega, const ResidualPlan& plan = {});

struct ComparisonOptions {
    std::vector<double> epsilon_schedule{0.1};
    double loose_residual_factor = 6.0;  // precondition: factor * (dt+dx)
    double comparison_tol = 2e-2;
    std::vector<double> x0_starts{1.0, -0.5};
    double t0 = 0.0;
    double leg_tol = 5e-2;
    int tube_stride = 8;
    // NFT push constants on Omega for leg (B)
    double eta = 0.5, r = 0.5, M = 2.0;
};

struct LegReport {
    bool pass = true;
    double metric = 0;
    std::string note;
};

struct ComparisonReport {
    bool preconditions_ok = true;
    std::string abort_reason;
    LegReport A, B, C;
    double max_gap = 0;
    bool pass() const { return preconditions_ok && A.pass && B.pass && C.pass; }
};

/// Theorem-style sandwich replay: (A) epigraph viability certifies
/// whigh >= int L along PhiHat trajectories; (B) DP-optimal trajectories
/// pushed interior by the NFT machinery certify wlow <= int L + eps;
/// (C) the grid gap |wlow - whigh| stays within comparison_tol.
ComparisonReport comparison_experiment(const ValueField& wlow, const ValueField& whigh,
                                       const ControlProblem& cp,
                                       const ComparisonOptions& opts = {},
                                       const ValueField* value_hint = nullptr);

}  // namespace hjbv
