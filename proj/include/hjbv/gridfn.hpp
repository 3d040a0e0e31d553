#pragma once

#include "hjbv/util.hpp"

#include <iosfwd>
#include <string>

namespace hjbv {

/// Extended-real function sampled on a uniform box grid (row-major values,
/// last axis fastest). +inf marks points outside the effective domain; -inf
/// is rejected for conjugation inputs.
///
/// File format (shared repo-wide):
///   gridfn v1 dim=<d> box=<l1,u1;...> res=<r1,...>
///   # provenance=<tag>            (optional comment lines)
///   <one value per line, `inf` for +infinity>
struct GridFunction {
    int dim = 0;
    Vec lo, hi;
    std::vector<int> res;
    std::vector<double> values;
    std::string provenance;

    static GridFunction make(const Box& box, std::vector<int> res, double fill = 0.0);

    size_t node_count() const;
    double step(int axis) const { return (hi[axis] - lo[axis]) / (res[axis] - 1); }

    size_t flat_index(const std::vector<int>& idx) const;
    std::vector<int> unflatten(size_t flat) const;
    Vec node_point(const std::vector<int>& idx) const;
    Vec node_point(size_t flat) const;

    double& at(const std::vector<int>& idx) { return values[flat_index(idx)]; }
    double at(const std::vector<int>& idx) const { return values[flat_index(idx)]; }

    /// Multilinear interpolation; any +inf corner makes the result +inf so
    /// domain walls stay walls. Points outside the box return +inf.
    double interp(const Vec& x) const;

    /// Nearest-node value.
    double nearest(const Vec& x) const;

    Box box() const { return Box{lo, hi}; }

    /// Validate invariants; `for_conjugation` additionally rejects -inf.
    void validate(bool for_conjugation = false) const;

    /// One-pass lsc regularization: clип finite up-spikes to the smallest
    /// finite axis-neighbor value plus `tol`. +inf nodes are left alone
    /// (closed-domain walls are legitimately lsc).
    void lsc_regularize(double tol);

    /// Estimated Lipschitz constant from finite neighbor differences.
    double lipschitz_estimate() const;

    double max_finite() const;
    double min_finite() const;

    void save(std::ostream& os) const;
    void save_file(const std::string& path) const;
    static GridFunction load(std::istream& is);
    static GridFunction load_file(const std::string& path);
};

}  // namespace hjbv
