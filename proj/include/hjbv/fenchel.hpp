#pragma once

#include "hjbv/setgeom.hpp"

namespace hjbv {

/// Discrete Legendre-Fenchel transform: for each dual node v, the max over
/// primal nodes p of <v,p> - f(p). Output is convex and lsc by construction
/// (a max of affine functions sampled on a grid); +inf primal nodes are
/// skipped. O(N*M) scan, parallel over dual nodes.
GridFunction conjugate(const GridFunction& f, const Box& dual_box,
                       const std::vector<int>& dual_res);

/// Dual box heuristic: primal box scaled by 1.5 plus the Lipschitz estimate
/// of f (the conjugate of a Lipschitz function lives on its slope range).
Box default_dual_box(const GridFunction& f);

/// Nodes with value < finite_threshold as a sublevel-grid set.
CompactSetRep effective_domain(const GridFunction& fstar, double finite_threshold = 1e12);

/// Hamiltonian evaluator plus the structural data of H.1/H.2/C.1.
/// The analytic channel (dom_hstar/hstar) is optional; when absent,
/// conjugate slices are computed on declared boxes.
struct HamiltonianModel {
    int n = 1;
    std::string name;
    std::function<double(double t, const Vec& x, const Vec& p, double q)> H;
    std::function<double(double)> sigma_x, sigma_p, sigma_hat, sigma_bdr;
    bool convex_in_p = true;
    bool homogeneous = true;

    std::function<ConvexBody(double t, const Vec& x, double q)> dom_hstar;
    std::function<double(double t, const Vec& x, const Vec& v, double q)> hstar;
    bool dom_constant = false;  // dom H*(t,x,.,1) does not depend on (t,x)
    bool has_analytic_conjugate() const { return dom_hstar && hstar; }
};

/// Built-in registry: `eikonal-decay`, `norm-h`, `quadratic` (a deliberate
/// H.1(c) violator), or `grid:<path>` for a tabulated H(p) at q=1.
HamiltonianModel model_registry(const std::string& name);

struct SamplePlan {
    std::vector<double> t_samples;
    std::vector<Vec> x_samples;
    std::vector<Vec> p_samples;
    std::vector<double> q_samples;
    std::vector<double> lambda_samples;
    // boxes for grid-route conjugation when no analytic channel exists
    Box p_box{};
    int p_res = 801;
    Box v_box{};
    int v_res = 81;
};

SamplePlan default_sample_plan(int n);

struct H1Report {
    double max_convexity_violation = 0;
    double max_homogeneity_violation = 0;
    std::string convexity_witness, homogeneity_witness;
    double tol = 1e-9;
    bool convex_pass = true, homogeneous_pass = true;
    bool pass() const { return convex_pass && homogeneous_pass; }
};

H1Report check_H1(const HamiltonianModel& model, const SamplePlan& plan, double tol = 1e-9);

struct H2C1Report {
    double max_bdr_value = 0;      // worst |p| + |H*(t,x,p,1)| seen
    double max_bdr_excess = 0;     // over sigma_bdr(t)
    double max_growth_excess = 0;  // H*(t,y,p,q) over sigma_hat(t)(1+|y|)
    bool unbounded_domain = false;
    std::string witness;
    std::string caveat =
        "moduli sampled at finitely many t; a.e.-t and all-t clauses are not distinguishable";
    bool pass(double tol = 1e-9) const {
        return !unbounded_domain && max_bdr_excess <= tol && max_growth_excess <= tol;
    }
};

H2C1Report check_H2_C1(const HamiltonianModel& model, const CompactSetRep& constraint,
                       const SamplePlan& plan);

/// Conjugate slice of p -> H(t,x,p,q) with a stability-based effective domain:
/// a dual node is in dom H* iff doubling the primal box leaves its value
/// unchanged (the sup is attained inside). `unbounded` flags domains that
/// reach the dual box edge.
struct ConjugateSlice {
    GridFunction hstar;   // finite values on dom, +inf outside
    ConvexBody dom;
    bool unbounded = false;
};

ConjugateSlice conjugate_slice(const std::function<double(const Vec&)>& h_of_p, int n,
                               const Box& p_box, const Box& v_box, int v_res,
                               double stability_tol = 1e-7);

}  // namespace hjbv
