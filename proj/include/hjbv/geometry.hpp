#pragma once

#include "hjbv/util.hpp"

namespace hjbv {

/// Result of a minimum-norm-point computation over a convex hull.
struct MinNormResult {
    Vec point;        // the minimizer inside the hull
    double distance;  // |point|
};

/// Minimum-norm point of conv{points} (Wolfe's method, finite termination at
/// desk scale). Exact up to floating point for the small vertex counts used
/// here.
MinNormResult min_norm_point(const std::vector<Vec>& points);

/// Nearest point of conv{vertices} to q, and the distance.
struct HullProjection {
    Vec point;
    double distance;
};
HullProjection project_to_hull(const std::vector<Vec>& vertices, const Vec& q);

double dist_to_hull(const std::vector<Vec>& vertices, const Vec& q);

/// dist(conv A, conv B) via the min-norm point of the Minkowski difference.
double hull_to_hull_distance(const std::vector<Vec>& a, const std::vector<Vec>& b);

/// Distance from `target` to the convex cone generated by `generators`
/// (Lawson-Hanson nonnegative least squares). Also returns the projection.
struct ConeProjection {
    Vec point;
    double distance;
};
ConeProjection project_to_cone(const std::vector<Vec>& generators, const Vec& target);

/// Counterclockwise convex hull of a 2D point cloud (monotone chain).
/// Collinear interior points are dropped.
std::vector<Vec> hull_2d(std::vector<Vec> points);

/// Signed distance helpers for convex polygons given as CCW vertex loops.
bool point_in_convex_polygon(const std::vector<Vec>& poly, const Vec& p, double tol = 1e-12);
double convex_polygon_boundary_distance(const std::vector<Vec>& poly, const Vec& p);

double point_segment_distance(const Vec& a, const Vec& b, const Vec& p);

/// Unit direction grids. dim 1: {-1,+1}; dim 2: uniform circle; dim 3:
/// Fibonacci sphere with the coordinate axes appended.
std::vector<Vec> sphere_directions(int dim, int count);

/// Concentric-shell lattice sampling the closed unit ball, origin included.
/// Shell counts grow with radius; shells keep the coordinate axes so extreme
/// parameters are hit exactly.
std::vector<Vec> ball_lattice(int dim, int count);

/// Covering radius of a unit-ball sample, estimated on a deterministic probe
/// set. Used to turn lattice density into a certified mesh value.
double ball_sample_mesh(const std::vector<Vec>& sample, int dim, int probes = 4096);

/// Canonical finite vertex list for a compact convex set.
/// Canonicalization: dedupe within tolerance, lexicographic sort, and (in
/// dimensions 1 and 2) reduction to extreme points. Idempotent.
class ConvexBody {
public:
    ConvexBody() = default;
    explicit ConvexBody(std::vector<Vec> vertices);

    int dim() const { return verts_.empty() ? 0 : static_cast<int>(verts_[0].size()); }
    bool empty() const { return verts_.empty(); }
    const std::vector<Vec>& vertices() const { return verts_; }

    double support(const Vec& dir) const;
    Vec support_point(const Vec& dir) const;
    Vec project(const Vec& x) const;
    double distance(const Vec& x) const;
    bool contains(const Vec& x, double tol = 1e-9) const;

    /// Chebyshev center by grid scan (spec'd construction for desk scale) and
    /// the circumradius about it.
    Vec chebyshev_center(int scan_res = 41) const;
    double radius_about(const Vec& c) const;

    /// Distance from an interior point to the boundary (0 outside).
    double interior_depth(const Vec& x) const;

    Box bounding_box() const;

    /// CCW vertex loop (cached at construction; stored order is lexicographic).
    std::pair<std::vector<Vec>, bool> verts_as_loop() const;

private:
    std::vector<Vec> verts_;
    std::vector<Vec> loop_;  // 2D only
};

std::vector<Vec> canonicalize_vertices(std::vector<Vec> verts, double tol = 1e-12);

}  // namespace hjbv
