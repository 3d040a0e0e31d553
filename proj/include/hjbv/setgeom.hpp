#pragma once

#include "hjbv/geometry.hpp"
#include "hjbv/gridfn.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace hjbv {

enum class SetKind { VertexHull, Oracle, SublevelGrid };

/// Compact set in R^k under one of three representations:
///  - vertex hull: canonical finite vertex list (the hull is the set);
///  - membership oracle: predicate + bounding box + resolution, with optional
///    signed-margin and projection callables for sub-resolution accuracy;
///  - sublevel grid: GridFunction with threshold 0 (member iff value <= 0).
///
/// All representations are immutable after construction and safe to share
/// across threads; lazily-built sample clouds are guarded by a mutex.
class CompactSetRep {
public:
    static CompactSetRep hull(std::vector<Vec> vertices);
    static CompactSetRep oracle(std::function<bool(const Vec&)> member, Box bbox,
                                double resolution,
                                std::function<double(const Vec&)> signed_margin = {},
                                std::function<Vec(const Vec&)> project_fn = {});
    static CompactSetRep sublevel(GridFunction g,
                                  std::function<double(const Vec&)> signed_margin = {},
                                  std::function<Vec(const Vec&)> project_fn = {});

    /// Oracle with caller-supplied clouds (skips the lazy volumetric scan).
    /// Used for epigraph slices whose boundary is a known graph.
    static CompactSetRep oracle_with_clouds(std::function<bool(const Vec&)> member, Box bbox,
                                            double resolution,
                                            std::function<double(const Vec&)> signed_margin,
                                            std::function<Vec(const Vec&)> project_fn,
                                            std::vector<Vec> boundary_cloud,
                                            std::vector<Vec> sample_cloud,
                                            bool has_interior = true);

    SetKind kind() const;
    int dim() const;
    Box bounding_box() const;

    /// Sampling granularity: 0 for exact reps (hulls, margin-backed oracles).
    double metric_accuracy() const;

    bool member(const Vec& x, double tol = 0.0) const;
    double distance(const Vec& x) const;             // dist(x, set)
    double complement_distance(const Vec& x) const;  // dist(x, set^c)
    Vec project(const Vec& x) const;                 // nearest set point (approx for clouds)

    /// Representative point cloud of the set itself (hull: vertices; grid:
    /// member nodes; oracle: boundary cloud plus a coarse member lattice).
    const std::vector<Vec>& sample_points() const;
    /// Points of the set near its boundary (lazily built for grids/oracles).
    const std::vector<Vec>& boundary_cloud() const;
    /// Non-member points hugging the boundary from outside.
    const std::vector<Vec>& outer_cloud() const;

    const std::vector<Vec>& hull_vertices() const;  // VertexHull only
    const GridFunction& grid() const;               // SublevelGrid only

    bool has_interior_flagged() const;  // degenerate (empty interior) detection

    /// Structured-text IO: vertex lists as `hull v1 n=<k> dim=<d>` + CSV rows,
    /// or a gridfn block for sublevel sets.
    void save(std::ostream& os) const;
    static CompactSetRep load(std::istream& is);
    static CompactSetRep load_file(const std::string& path);
    void save_file(const std::string& path) const;

    struct Impl;
    std::shared_ptr<const Impl> impl;
};

/// Finite sample of a cone: apex plus unit directions.
struct ConeSample {
    enum class Kind { Contingent, ClarkeNormalHull, NegativePolar };
    Vec apex;
    std::vector<Vec> directions;
    Kind kind = Kind::Contingent;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// sup over sampled points of a of dist(point, b). Exact for vertex hulls
/// against convex b (the sup sits at a vertex).
double excess(const CompactSetRep& a, const CompactSetRep& b);

/// Excess with the left set restricted to a compact box (Definition-style
/// localization). Hull sets are clipped exactly in dimensions 1 and 2.
double excess_restricted(const CompactSetRep& a, const Box& window, const CompactSetRep& b);

double hausdorff(const CompactSetRep& a, const CompactSetRep& b);

/// dist(a, b) between two set representations.
double set_distance(const CompactSetRep& a, const CompactSetRep& b);

struct ContingentOptions {
    double cone_tol = 1e-6;   // relative, scaled by (1+|x|)
    double apex_tol = 1e-6;   // how far x may sit from the set
    double accuracy_floor_factor = 3.0;  // floor = factor * metric_accuracy
};

/// Directions d with dist(x + h d, set) <= cone_tol*(1+|x|)*h at the two
/// smallest usable steps (Limsup surrogate). Steps below the representation's
/// accuracy floor are skipped; the acceptance threshold never drops below
/// accuracy_floor_factor * metric_accuracy.
ConeSample contingent_cone(const CompactSetRep& set, const Vec& x,
                           const std::vector<double>& step_sequence,
                           const std::vector<Vec>& direction_grid,
                           const ContingentOptions& opts = {});

std::vector<double> default_step_sequence();  // 2^-3 .. 2^-12

/// Unit vectors p with <p,d> <= polar_tol for every cone direction. The polar
/// of a full sphere sample is {0}: an empty direction list.
ConeSample negative_polar(const ConeSample& cone, const std::vector<Vec>& dual_grid,
                          double polar_tol = 1e-9);

struct BoundaryNormalSets {
    ConeSample N;  // sampled Clarke-normal-hull generators near x
    std::function<bool(const Vec&)> sigma_test;  // <p,n> >= r for every n
    std::function<bool(const Vec&)> gamma_test;  // <p,n> <= 0 for some n
};

struct NormalOptions {
    double prox_slack = 0.05;      // proximality acceptance slack
    double boundary_band = 1.5;    // in grid cells, for grid-backed sets
    int boundary_samples = 128;    // per-edge sampling for 2D hulls
};

/// The N_E / Sigma_E / Gamma_E triple at x with localization radius eta and
/// inner-product threshold r. Empty N makes sigma vacuously true and gamma
/// always false.
BoundaryNormalSets boundary_normal_sets(const CompactSetRep& set, const Vec& x, double eta,
                                        double r, const std::vector<Vec>& sphere_sample,
                                        const NormalOptions& opts = {});

struct SignedDistance {
    double value;
    bool degenerate = false;  // empty interior (or empty complement)
};

/// Non-smooth oriented distance: dist(x,set) - dist(x,set^c).
SignedDistance signed_distance(const CompactSetRep& set, const Vec& x);

}  // namespace hjbv
