#include "hjbv/geometry.hpp"

#include <algorithm>
#include <cassert>

namespace hjbv {

namespace {

// Solve the small dense system A z = b in place (partial pivoting).
// Matrices here are (m+1)x(m+1) with m <= dim+2, so no library is warranted.
bool solve_dense(std::vector<std::vector<double>>& A, std::vector<double>& b) {
    const size_t n = A.size();
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        for (size_t r = col + 1; r < n; ++r)
            if (std::fabs(A[r][col]) > std::fabs(A[piv][col])) piv = r;
        if (std::fabs(A[piv][col]) < 1e-14) return false;
        std::swap(A[piv], A[col]);
        std::swap(b[piv], b[col]);
        for (size_t r = col + 1; r < n; ++r) {
            double f = A[r][col] / A[col][col];
            if (f == 0) continue;
            for (size_t c = col; c < n; ++c) A[r][c] -= f * A[col][c];
            b[r] -= f * b[col];
        }
    }
    for (size_t col = n; col-- > 0;) {
        double s = b[col];
        for (size_t c = col + 1; c < n; ++c) s -= A[col][c] * b[c];
        b[col] = s / A[col][col];
    }
    return true;
}

// Affine minimizer of |sum a_i s_i| with sum a_i = 1 over the points indexed
// by S. Falls back to dropping the last point on a singular Gram system.
bool affine_min_norm(const std::vector<Vec>& pts, const std::vector<int>& S,
                     std::vector<double>& alpha) {
    const size_t m = S.size();
    std::vector<std::vector<double>> A(m + 1, std::vector<double>(m + 1, 0.0));
    std::vector<double> b(m + 1, 0.0);
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < m; ++j) A[i][j] = dot(pts[S[i]], pts[S[j]]);
        A[i][i] += 1e-13;  // ridge for duplicate points
        A[i][m] = 1.0;
        A[m][i] = 1.0;
    }
    b[m] = 1.0;
    if (!solve_dense(A, b)) return false;
    alpha.assign(b.begin(), b.begin() + m);
    return true;
}

}  // namespace

MinNormResult min_norm_point(const std::vector<Vec>& points) {
    if (points.empty()) throw std::invalid_argument("min_norm_point: empty point set");
    const size_t m = points.size();
    const size_t d = points[0].size();

    // Seed with the smallest-norm point.
    size_t best = 0;
    double bn = norm2(points[0]);
    for (size_t i = 1; i < m; ++i) {
        double v = norm2(points[i]);
        if (v < bn) { bn = v; best = i; }
    }
    std::vector<int> S{static_cast<int>(best)};
    std::vector<double> lambda{1.0};

    Vec x = points[best];
    const double scale2 = std::max(1.0, bn);
    const double eps = 1e-12 * scale2;

    for (int major = 0; major < 200; ++major) {
        // Support point in direction -x.
        size_t j = 0;
        double bestdot = kInf;
        for (size_t i = 0; i < m; ++i) {
            double v = dot(points[i], x);
            if (v < bestdot) { bestdot = v; j = i; }
        }
        if (dot(x, x) <= bestdot + eps) break;  // optimality
        if (std::find(S.begin(), S.end(), static_cast<int>(j)) != S.end()) break;
        S.push_back(static_cast<int>(j));
        lambda.push_back(0.0);

        for (int minor = 0; minor < 100; ++minor) {
            std::vector<double> alpha;
            if (!affine_min_norm(points, S, alpha)) {
                S.pop_back();
                lambda.pop_back();
                break;
            }
            bool interior = true;
            for (double a : alpha)
                if (a < 1e-12) { interior = false; break; }
            if (interior) {
                lambda = alpha;
                break;
            }
            double theta = 1.0;
            for (size_t i = 0; i < S.size(); ++i)
                if (alpha[i] < 1e-12 && lambda[i] > alpha[i])
                    theta = std::min(theta, lambda[i] / (lambda[i] - alpha[i]));
            for (size_t i = 0; i < S.size(); ++i)
                lambda[i] = (1 - theta) * lambda[i] + theta * alpha[i];
            // Drop vanished points.
            std::vector<int> S2;
            std::vector<double> l2;
            for (size_t i = 0; i < S.size(); ++i)
                if (lambda[i] > 1e-12) { S2.push_back(S[i]); l2.push_back(lambda[i]); }
            if (S2.empty()) { S2.push_back(S[0]); l2.push_back(1.0); }
            S = std::move(S2);
            lambda = std::move(l2);
        }
        x.assign(d, 0.0);
        for (size_t i = 0; i < S.size(); ++i)
            for (size_t k = 0; k < d; ++k) x[k] += lambda[i] * points[S[i]][k];
    }
    return {x, norm(x)};
}

HullProjection project_to_hull(const std::vector<Vec>& vertices, const Vec& q) {
    std::vector<Vec> shifted(vertices.size());
    for (size_t i = 0; i < vertices.size(); ++i) shifted[i] = sub(vertices[i], q);
    MinNormResult r = min_norm_point(shifted);
    return {add(q, r.point), r.distance};
}

double dist_to_hull(const std::vector<Vec>& vertices, const Vec& q) {
    return project_to_hull(vertices, q).distance;
}

double hull_to_hull_distance(const std::vector<Vec>& a, const std::vector<Vec>& b) {
    std::vector<Vec> diffs;
    diffs.reserve(a.size() * b.size());
    for (const auto& p : a)
        for (const auto& r : b) diffs.push_back(sub(p, r));
    return min_norm_point(diffs).distance;
}

ConeProjection project_to_cone(const std::vector<Vec>& generators, const Vec& target) {
    const size_t d = target.size();
    if (generators.empty()) return {Vec(d, 0.0), norm(target)};
    const size_t m = generators.size();
    std::vector<double> lambda(m, 0.0);
    std::vector<int> P;
    Vec r = target;
    const double eps = 1e-12 * std::max(1.0, norm2(target));

    for (int outer = 0; outer < 200; ++outer) {
        int j = -1;
        double bw = eps;
        for (size_t i = 0; i < m; ++i) {
            if (std::find(P.begin(), P.end(), static_cast<int>(i)) != P.end()) continue;
            double w = dot(generators[i], r);
            if (w > bw) { bw = w; j = static_cast<int>(i); }
        }
        if (j < 0) break;
        P.push_back(j);

        for (int inner = 0; inner < 100; ++inner) {
            // Unconstrained least squares on the passive set (normal equations).
            const size_t k = P.size();
            std::vector<std::vector<double>> A(k, std::vector<double>(k, 0.0));
            std::vector<double> b(k, 0.0);
            for (size_t i = 0; i < k; ++i) {
                for (size_t l = 0; l < k; ++l) A[i][l] = dot(generators[P[i]], generators[P[l]]);
                A[i][i] += 1e-13;
                b[i] = dot(generators[P[i]], target);
            }
            if (!solve_dense(A, b)) { P.pop_back(); break; }
            bool positive = true;
            for (double z : b)
                if (z <= 1e-13) { positive = false; break; }
            if (positive) {
                for (size_t i = 0; i < k; ++i) lambda[P[i]] = b[i];
                break;
            }
            double alpha = 1.0;
            for (size_t i = 0; i < k; ++i)
                if (b[i] <= 1e-13 && lambda[P[i]] > b[i])
                    alpha = std::min(alpha, lambda[P[i]] / (lambda[P[i]] - b[i]));
            for (size_t i = 0; i < k; ++i)
                lambda[P[i]] = (1 - alpha) * lambda[P[i]] + alpha * b[i];
            std::vector<int> P2;
            for (int idx : P)
                if (lambda[idx] > 1e-13) P2.push_back(idx);
                else lambda[idx] = 0.0;
            P = std::move(P2);
            if (P.empty()) break;
        }
        Vec proj(d, 0.0);
        for (size_t i = 0; i < m; ++i)
            if (lambda[i] > 0)
                for (size_t k2 = 0; k2 < d; ++k2) proj[k2] += lambda[i] * generators[i][k2];
        r = sub(target, proj);
    }
    Vec proj(d, 0.0);
    for (size_t i = 0; i < m; ++i)
        if (lambda[i] > 0)
            for (size_t k2 = 0; k2 < d; ++k2) proj[k2] += lambda[i] * generators[i][k2];
    return {proj, dist(target, proj)};
}

std::vector<Vec> hull_2d(std::vector<Vec> points) {
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    const size_t n = points.size();
    if (n <= 2) return points;
    auto cross = [](const Vec& o, const Vec& a, const Vec& b) {
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };
    std::vector<Vec> h(2 * n);
    size_t k = 0;
    for (size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], points[i]) <= 1e-14) --k;
        h[k++] = points[i];
    }
    for (size_t i = n - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(h[k - 2], h[k - 1], points[i]) <= 1e-14) --k;
        h[k++] = points[i];
    }
    h.resize(k - 1);
    return h;
}

double point_segment_distance(const Vec& a, const Vec& b, const Vec& p) {
    Vec ab = sub(b, a);
    double den = norm2(ab);
    double t = den == 0 ? 0.0 : std::clamp(dot(sub(p, a), ab) / den, 0.0, 1.0);
    return dist(p, axpy(a, t, ab));
}

bool point_in_convex_polygon(const std::vector<Vec>& poly, const Vec& p, double tol) {
    const size_t n = poly.size();
    if (n == 0) return false;
    if (n == 1) return dist(poly[0], p) <= tol;
    if (n == 2) return point_segment_distance(poly[0], poly[1], p) <= tol;
    for (size_t i = 0; i < n; ++i) {
        const Vec& a = poly[i];
        const Vec& b = poly[(i + 1) % n];
        double cr = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
        if (cr < -tol) return false;
    }
    return true;
}

double convex_polygon_boundary_distance(const std::vector<Vec>& poly, const Vec& p) {
    double best = kInf;
    const size_t n = poly.size();
    for (size_t i = 0; i < n; ++i)
        best = std::min(best, point_segment_distance(poly[i], poly[(i + 1) % n], p));
    return best;
}

std::vector<Vec> sphere_directions(int dim, int count) {
    std::vector<Vec> dirs;
    if (dim == 1) {
        dirs.push_back({1.0});
        dirs.push_back({-1.0});
        return dirs;
    }
    if (dim == 2) {
        count = std::max(count, 4);
        for (int k = 0; k < count; ++k) {
            double a = 2.0 * M_PI * k / count;
            dirs.push_back({std::cos(a), std::sin(a)});
        }
        return dirs;
    }
    if (dim == 3) {
        count = std::max(count, 8);
        const double ga = M_PI * (3.0 - std::sqrt(5.0));
        for (int k = 0; k < count; ++k) {
            double z = 1.0 - 2.0 * (k + 0.5) / count;
            double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            double a = ga * k;
            dirs.push_back({r * std::cos(a), r * std::sin(a), z});
        }
        for (int ax = 0; ax < 3; ++ax)
            for (double s : {1.0, -1.0}) {
                Vec e(3, 0.0);
                e[ax] = s;
                dirs.push_back(e);
            }
        return dirs;
    }
    throw std::invalid_argument("sphere_directions: dim must be 1, 2 or 3");
}

std::vector<Vec> ball_lattice(int dim, int count) {
    std::vector<Vec> pts;
    if (dim == 1) {
        int n = std::max(3, count | 1);  // odd so 0 is included
        for (double v : linspace(-1.0, 1.0, n)) pts.push_back({v});
        return pts;
    }
    if (dim == 2) {
        int K = std::max(2, static_cast<int>(std::lround(std::sqrt(count / 2.0))));
        pts.push_back({0.0, 0.0});
        for (int k = 1; k <= K; ++k) {
            double r = static_cast<double>(k) / K;
            int mk = 4 * k * std::max(1, count / (2 * K * (K + 1)));
            mk = ((mk + 3) / 4) * 4;  // multiple of 4 keeps the axes in every shell
            for (int j = 0; j < mk; ++j) {
                double a = 2.0 * M_PI * j / mk;
                pts.push_back({r * std::cos(a), r * std::sin(a)});
            }
        }
        return pts;
    }
    if (dim == 3) {
        int K = std::max(2, static_cast<int>(std::lround(std::cbrt(count / 2.0))));
        double csum = 0;
        for (int k = 1; k <= K; ++k) csum += double(k) * k;
        pts.push_back({0.0, 0.0, 0.0});
        for (int k = 1; k <= K; ++k) {
            double r = static_cast<double>(k) / K;
            int mk = std::max(6, static_cast<int>(std::lround(count * k * double(k) / csum)));
            for (const auto& d : sphere_directions(3, mk)) pts.push_back(scale(d, r));
        }
        return pts;
    }
    throw std::invalid_argument("ball_lattice: dim must be 1, 2 or 3");
}

double ball_sample_mesh(const std::vector<Vec>& sample, int dim, int probes) {
    // Deterministic low-discrepancy probe points inside the unit ball.
    double worst = 0;
    uint64_t state = 0x9e3779b97f4a7c15ULL;
    auto next = [&state]() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        return (state >> 11) * (1.0 / 9007199254740992.0);
    };
    for (int p = 0; p < probes; ++p) {
        Vec q(dim);
        double n2;
        do {
            n2 = 0;
            for (int i = 0; i < dim; ++i) {
                q[i] = 2.0 * next() - 1.0;
                n2 += q[i] * q[i];
            }
        } while (n2 > 1.0);
        double best = kInf;
        for (const auto& s : sample) best = std::min(best, dist(s, q));
        worst = std::max(worst, best);
    }
    return worst;
}

std::vector<Vec> canonicalize_vertices(std::vector<Vec> verts, double tol) {
    std::sort(verts.begin(), verts.end());
    std::vector<Vec> out;
    for (auto& v : verts) {
        bool dup = false;
        for (const auto& u : out)
            if (dist(u, v) <= tol) { dup = true; break; }
        if (!dup) out.push_back(std::move(v));
    }
    return out;
}

ConvexBody::ConvexBody(std::vector<Vec> vertices) {
    if (vertices.empty()) throw std::invalid_argument("ConvexBody: empty vertex list");
    const int d = static_cast<int>(vertices[0].size());
    double sc = 0;
    for (const auto& v : vertices) sc = std::max(sc, norm(v));
    std::vector<Vec> canon = canonicalize_vertices(std::move(vertices), 1e-12 * (1 + sc));
    if (d == 1) {
        double lo = canon.front()[0], hi = canon.back()[0];
        verts_ = (hi - lo < 1e-15) ? std::vector<Vec>{{lo}} : std::vector<Vec>{{lo}, {hi}};
    } else if (d == 2 && canon.size() > 2) {
        auto h = hull_2d(canon);
        loop_ = h;
        std::sort(h.begin(), h.end());
        verts_ = std::move(h);
    } else {
        verts_ = std::move(canon);  // dim >= 3: keep the sampled list
    }
}

double ConvexBody::support(const Vec& dir) const {
    double best = -kInf;
    for (const auto& v : verts_) best = std::max(best, dot(v, dir));
    return best;
}

Vec ConvexBody::support_point(const Vec& dir) const {
    double best = -kInf;
    const Vec* arg = &verts_[0];
    for (const auto& v : verts_) {
        double s = dot(v, dir);
        if (s > best) { best = s; arg = &v; }
    }
    return *arg;
}

Vec ConvexBody::project(const Vec& x) const {
    if (verts_.size() == 1) return verts_[0];
    if (dim() == 1)
        return {std::clamp(x[0], verts_.front()[0], verts_.back()[0])};
    if (dim() == 2 && verts_.size() > 2) {
        auto loop = verts_as_loop().first;
        if (point_in_convex_polygon(loop, x)) return x;
        double best = kInf;
        Vec arg = loop[0];
        const size_t n = loop.size();
        for (size_t i = 0; i < n; ++i) {
            const Vec& a = loop[i];
            const Vec& b = loop[(i + 1) % n];
            Vec ab = sub(b, a);
            double den = norm2(ab);
            double t = den == 0 ? 0.0 : std::clamp(dot(sub(x, a), ab) / den, 0.0, 1.0);
            Vec p = axpy(a, t, ab);
            double d = dist(p, x);
            if (d < best) {
                best = d;
                arg = std::move(p);
            }
        }
        return arg;
    }
    return project_to_hull(verts_, x).point;
}

double ConvexBody::distance(const Vec& x) const {
    if (verts_.size() == 1) return dist(verts_[0], x);
    if (dim() == 1) {
        double lo = verts_.front()[0], hi = verts_.back()[0];
        return std::max({lo - x[0], x[0] - hi, 0.0});
    }
    if (dim() == 2 && !loop_.empty()) {
        if (point_in_convex_polygon(loop_, x)) return 0.0;
        double best = kInf;
        const size_t n = loop_.size();
        for (size_t i = 0; i < n; ++i)
            best = std::min(best, point_segment_distance(loop_[i], loop_[(i + 1) % n], x));
        return best;
    }
    return dist_to_hull(verts_, x);
}

bool ConvexBody::contains(const Vec& x, double tol) const { return distance(x) <= tol; }

Vec ConvexBody::chebyshev_center(int scan_res) const {
    const int d = dim();
    if (verts_.size() == 1) return verts_[0];
    if (d == 1) return {0.5 * (verts_.front()[0] + verts_.back()[0])};
    Box bb = bounding_box();
    Vec best = verts_[0];
    double depth = -1;
    std::vector<int> idx(d, 0);
    std::vector<std::vector<double>> axes(d);
    for (int i = 0; i < d; ++i) axes[i] = linspace(bb.lo[i], bb.hi[i], scan_res);
    // Full scan; scan_res^d stays small for d <= 3.
    size_t total = 1;
    for (int i = 0; i < d; ++i) total *= scan_res;
    for (size_t flat = 0; flat < total; ++flat) {
        size_t rem = flat;
        Vec p(d);
        for (int i = d - 1; i >= 0; --i) {
            p[i] = axes[i][rem % scan_res];
            rem /= scan_res;
        }
        double depth_p = interior_depth(p);
        if (depth_p > depth) { depth = depth_p; best = p; }
    }
    return best;
}

double ConvexBody::radius_about(const Vec& c) const {
    double r = 0;
    for (const auto& v : verts_) r = std::max(r, dist(v, c));
    return r;
}

double ConvexBody::interior_depth(const Vec& x) const {
    const int d = dim();
    if (d == 1) {
        double lo = verts_.front()[0], hi = verts_.back()[0];
        if (x[0] < lo || x[0] > hi) return 0;
        return std::min(x[0] - lo, hi - x[0]);
    }
    if (d == 2) {
        if (verts_.size() <= 2) return 0;
        auto loop = verts_as_loop().first;
        if (!point_in_convex_polygon(loop, x)) return 0;
        return convex_polygon_boundary_distance(loop, x);
    }
    // dim >= 3: conservative estimate via sampled supporting directions.
    auto dirs = sphere_directions(d, 64);
    double depth = kInf;
    for (const auto& dir : dirs) depth = std::min(depth, support(dir) - dot(dir, x));
    return std::max(0.0, depth);
}

Box ConvexBody::bounding_box() const {
    const int d = dim();
    Box b{Vec(d, kInf), Vec(d, -kInf)};
    for (const auto& v : verts_)
        for (int i = 0; i < d; ++i) {
            b.lo[i] = std::min(b.lo[i], v[i]);
            b.hi[i] = std::max(b.hi[i], v[i]);
        }
    return b;
}

std::pair<std::vector<Vec>, bool> ConvexBody::verts_as_loop() const {
    if (!loop_.empty()) return {loop_, true};
    return {hull_2d(verts_), true};
}

}  // namespace hjbv
