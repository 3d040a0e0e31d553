#pragma once

#include "hjbv/setgeom.hpp"

namespace hjbv {

/// Time-sampled family of closed sets. Evaluation between knots follows the
/// interpolation tag: piecewise-constant takes the left knot; linear-in-
/// parameters interpolates matching vertex lists (and falls back to the left
/// knot otherwise).
struct Tube {
    enum class Interp { PiecewiseConstant, LinearParams };

    std::vector<double> times;
    std::vector<CompactSetRep> slices;
    Interp interp = Interp::PiecewiseConstant;

    void validate() const;
    int dim() const { return slices.empty() ? 0 : slices[0].dim(); }
    double t_min() const { return times.front(); }
    double t_max() const { return times.back(); }

    CompactSetRep eval(double t) const;

    /// Smallest knot strictly after t (t_max when none).
    double next_knot(double t) const;

    /// Bounding box of all slices inflated by 10%: the default compact K of
    /// the LBV definition at desk scale.
    Box default_compact() const;

    /// File format: `tube v1 knots=<m>` then per knot a `t=<time>` line
    /// followed by the slice in CompactSetRep text form.
    void save(std::ostream& os) const;
    static Tube load(std::istream& is);
    static Tube load_file(const std::string& path);
    void save_file(const std::string& path) const;
};

/// Partition sum of exc(E(t_{i+1}) ∩ K | E(t_i)) v exc(E(t_i) ∩ K | E(t_{i+1}))
/// over the dyadic partition of [a,b] of the given depth merged with tube
/// knots. Monotone nondecreasing in depth; empty window intersections
/// contribute zero (flagged through the optional diagnostics).
struct LbvDiagnostics {
    int empty_intersections = 0;
    std::vector<double> partition;
};

double lbv_variation(const Tube& tube, double a, double b, const Box& compact,
                     int partition_depth, LbvDiagnostics* diag = nullptr);

/// (depth, value) refinement curve up to max_depth; the certified LBV
/// estimate is the last entry.
std::vector<std::pair<int, double>> lbv_refinement_curve(const Tube& tube, double a, double b,
                                                         const Box& compact, int max_depth);

/// Absolute-continuity modulus surrogate: the variation captured by straddle
/// intervals of total measure <= eps around the variation partition points.
/// Stays near the full variation for jump-like tubes (the non-AC witness) and
/// decays like eps * slope for Lipschitz interpolated tubes.
double ac_modulus(const Tube& tube, double a, double b, double eps, int partition_depth);

/// Epigraph tube of a time-indexed family of grid functions: slice i is
/// {(x,z) : u_i(x) <= z <= value_cap} on the product grid. Slices get an lsc
/// regularization pass first. Throws if some slice lies entirely above cap.
Tube epi_tube(const std::vector<double>& times, std::vector<GridFunction> u_slices,
              double value_cap);

/// Psi(t) = dist(E(t), Y(t)).
double psi_distance(const Tube& E, const Tube& Y, double t);

struct PsiBvReport {
    struct DepthRow {
        int depth;
        double psi_variation;  // sum |Psi(t_{i+1}) - Psi(t_i)|
        double bound;          // tube variation at this depth + int rho
        bool pass;
    };
    std::vector<DepthRow> rows;
    bool pass = true;
};

/// Checks the Lemma-4.2 style inequality: partition sums of |d Psi| are
/// bounded by the tube variation plus the integral modulus of Y.
PsiBvReport psi_bv_report(const Tube& E, const Tube& Y, double a, double b,
                          int partition_depth,
                          const std::function<double(double, double)>& rho_integral,
                          double tol = 1e-9);

struct TubeContinuityReport {
    double max_knot_jump = 0;     // hausdorff between consecutive localized slices
    double max_jump_rate = 0;     // jump / dt
    size_t worst_knot = 0;
    bool pass(double rate_cap) const { return max_jump_rate <= rate_cap; }
};

TubeContinuityReport tube_continuity_report(const Tube& tube, const Box& compact);

}  // namespace hjbv
