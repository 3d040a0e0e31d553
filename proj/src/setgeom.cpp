#include "hjbv/setgeom.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>

namespace hjbv {

struct CompactSetRep::Impl {
    SetKind kind;
    int dim = 0;

    // VertexHull
    ConvexBody body;

    // Oracle
    std::function<bool(const Vec&)> member_fn;
    Box bbox{};
    double resolution = 0;
    std::function<double(const Vec&)> margin_fn;
    std::function<Vec(const Vec&)> project_fn;

    // SublevelGrid
    GridFunction grid;

    // Lazily built clouds (guarded: reps are shared read-only across workers).
    mutable std::mutex mtx;
    mutable bool clouds_built = false;
    mutable std::vector<Vec> samples, inner, outer;
    mutable bool has_interior = true;

    void build_clouds() const;
    void ensure_clouds() const {
        std::lock_guard<std::mutex> lk(mtx);
        if (!clouds_built) {
            build_clouds();
            clouds_built = true;
        }
    }
    bool raw_member(const Vec& x) const;
};

namespace {

constexpr size_t kScanCap = 20'000'000;  // total nodes a lazy scan may visit
constexpr size_t kSampleCap = 4096;      // interior lattice points kept

std::vector<int> scan_shape(const Box& b, double res, double* step_out) {
    int d = b.dim();
    double step = std::max(res, 1e-12);
    size_t total;
    std::vector<int> shape(d);
    for (;;) {
        total = 1;
        for (int a = 0; a < d; ++a) {
            shape[a] = std::max(2, static_cast<int>(std::floor((b.hi[a] - b.lo[a]) / step)) + 1);
            total *= static_cast<size_t>(shape[a]);
        }
        if (total <= kScanCap) break;
        step *= 2;  // coarsen rather than blow up; accuracy reported via metric_accuracy
    }
    *step_out = step;
    return shape;
}

}  // namespace

bool CompactSetRep::Impl::raw_member(const Vec& x) const {
    switch (kind) {
        case SetKind::VertexHull:
            return body.distance(x) <= 1e-10 * (1 + norm(x));
        case SetKind::Oracle:
            return member_fn(x);
        case SetKind::SublevelGrid: {
            if (!grid.box().contains(x, 0.5 * grid.step(0))) return false;
            return grid.nearest(x) <= 0.0;
        }
    }
    return false;
}

void CompactSetRep::Impl::build_clouds() const {
    if (kind == SetKind::VertexHull) {
        samples = body.vertices();
        // Boundary cloud: vertices, plus edge samples in 2D.
        inner = body.vertices();
        if (dim == 2 && body.vertices().size() > 2) {
            auto loop = body.verts_as_loop().first;
            for (size_t i = 0; i < loop.size(); ++i) {
                const Vec& a = loop[i];
                const Vec& b = loop[(i + 1) % loop.size()];
                for (int s = 1; s < 64; ++s)
                    inner.push_back(axpy(a, s / 64.0, sub(b, a)));
            }
        }
        has_interior = body.interior_depth(body.chebyshev_center()) > 1e-12;
        return;
    }

    const Box b = (kind == SetKind::Oracle) ? bbox : grid.box();
    const int d = b.dim();
    double step = 0;
    std::vector<int> shape;
    if (kind == SetKind::SublevelGrid) {
        shape = grid.res;
        step = grid.step(0);
        for (int a = 1; a < d; ++a) step = std::max(step, grid.step(a));
    } else {
        shape = scan_shape(b, resolution, &step);
    }

    size_t total = 1;
    for (int a = 0; a < d; ++a) total *= static_cast<size_t>(shape[a]);

    std::vector<char> mem(total, 0);
    std::vector<double> hstep(d);
    for (int a = 0; a < d; ++a)
        hstep[a] = (kind == SetKind::SublevelGrid) ? grid.step(a)
                                                   : (b.hi[a] - b.lo[a]) / (shape[a] - 1);
    auto point_of = [&](size_t flat) {
        Vec p(d);
        for (int a = d - 1; a >= 0; --a) {
            p[a] = b.lo[a] + (flat % shape[a]) * hstep[a];
            flat /= shape[a];
        }
        return p;
    };
    if (kind == SetKind::SublevelGrid) {
        for (size_t f = 0; f < total; ++f) mem[f] = grid.values[f] <= 0.0 ? 1 : 0;
    } else {
        for (size_t f = 0; f < total; ++f) mem[f] = member_fn(point_of(f)) ? 1 : 0;
    }

    has_interior = false;
    size_t member_count = 0;
    for (size_t f = 0; f < total; ++f) member_count += mem[f];
    size_t stride = std::max<size_t>(1, member_count / kSampleCap);

    size_t seen = 0;
    std::vector<size_t> mults(d);
    {
        size_t m = 1;
        for (int a = d - 1; a >= 0; --a) {
            mults[a] = m;
            m *= shape[a];
        }
    }
    for (size_t f = 0; f < total; ++f) {
        bool m = mem[f];
        // Neighbor inspection along axes.
        bool all_nb_member = true, any_nb_diff = false;
        size_t rem = f;
        for (int a = d - 1; a >= 0; --a) {
            size_t ia = rem % shape[a];
            rem /= shape[a];
            for (int dlt = -1; dlt <= 1; dlt += 2) {
                long j = static_cast<long>(ia) + dlt;
                if (j < 0 || j >= shape[a]) {
                    if (m) all_nb_member = false;  // set touching scan edge counts as boundary
                    continue;
                }
                bool nb = mem[f + static_cast<size_t>(dlt) * mults[a]];
                if (nb != m) {
                    any_nb_diff = true;
                    if (m) all_nb_member = false;
                }
            }
        }
        if (m) {
            if (all_nb_member) has_interior = true;
            if (any_nb_diff || !all_nb_member) inner.push_back(point_of(f));
            if (seen++ % stride == 0) samples.push_back(point_of(f));
        } else if (any_nb_diff) {
            outer.push_back(point_of(f));
        }
    }
    if (samples.empty() && !inner.empty()) samples = inner;
    if (samples.empty())
        throw std::domain_error("set: no member points found (empty set)");
}

CompactSetRep CompactSetRep::hull(std::vector<Vec> vertices) {
    if (vertices.empty()) throw std::domain_error("set: empty vertex list");
    auto impl = std::make_shared<Impl>();
    impl->kind = SetKind::VertexHull;
    impl->dim = static_cast<int>(vertices[0].size());
    impl->body = ConvexBody(std::move(vertices));
    CompactSetRep s;
    s.impl = impl;
    return s;
}

CompactSetRep CompactSetRep::oracle(std::function<bool(const Vec&)> member, Box bbox,
                                    double resolution,
                                    std::function<double(const Vec&)> signed_margin,
                                    std::function<Vec(const Vec&)> project_fn) {
    if (!member) throw std::invalid_argument("set: oracle needs a membership predicate");
    auto impl = std::make_shared<Impl>();
    impl->kind = SetKind::Oracle;
    impl->dim = bbox.dim();
    impl->member_fn = std::move(member);
    impl->bbox = std::move(bbox);
    impl->resolution = resolution;
    impl->margin_fn = std::move(signed_margin);
    impl->project_fn = std::move(project_fn);
    CompactSetRep s;
    s.impl = impl;
    return s;
}

CompactSetRep CompactSetRep::oracle_with_clouds(std::function<bool(const Vec&)> member,
                                                Box bbox, double resolution,
                                                std::function<double(const Vec&)> signed_margin,
                                                std::function<Vec(const Vec&)> project_fn,
                                                std::vector<Vec> boundary_cloud,
                                                std::vector<Vec> sample_cloud,
                                                bool has_interior) {
    CompactSetRep s = oracle(std::move(member), std::move(bbox), resolution,
                             std::move(signed_margin), std::move(project_fn));
    auto* impl = const_cast<Impl*>(s.impl.get());
    std::lock_guard<std::mutex> lk(impl->mtx);
    impl->inner = std::move(boundary_cloud);
    impl->samples = sample_cloud.empty() ? impl->inner : std::move(sample_cloud);
    impl->has_interior = has_interior;
    impl->clouds_built = true;
    return s;
}

CompactSetRep CompactSetRep::sublevel(GridFunction g,
                                      std::function<double(const Vec&)> signed_margin,
                                      std::function<Vec(const Vec&)> project_fn) {
    g.validate();
    auto impl = std::make_shared<Impl>();
    impl->kind = SetKind::SublevelGrid;
    impl->dim = g.dim;
    impl->grid = std::move(g);
    impl->margin_fn = std::move(signed_margin);
    impl->project_fn = std::move(project_fn);
    bool any = false;
    for (double v : impl->grid.values)
        if (v <= 0.0) { any = true; break; }
    if (!any) throw std::domain_error("set: sublevel grid has no member nodes");
    CompactSetRep s;
    s.impl = impl;
    return s;
}

SetKind CompactSetRep::kind() const { return impl->kind; }
int CompactSetRep::dim() const { return impl->dim; }

Box CompactSetRep::bounding_box() const {
    switch (impl->kind) {
        case SetKind::VertexHull: return impl->body.bounding_box();
        case SetKind::Oracle: return impl->bbox;
        case SetKind::SublevelGrid: return impl->grid.box();
    }
    return {};
}

double CompactSetRep::metric_accuracy() const {
    switch (impl->kind) {
        case SetKind::VertexHull: return 0.0;
        case SetKind::Oracle: return impl->margin_fn ? 0.0 : 0.5 * impl->resolution;
        case SetKind::SublevelGrid: {
            if (impl->margin_fn) return 0.0;
            double h = 0;
            for (int a = 0; a < impl->dim; ++a) h = std::max(h, impl->grid.step(a));
            return 0.5 * h;
        }
    }
    return 0.0;
}

bool CompactSetRep::member(const Vec& x, double tol) const {
    if (impl->raw_member(x)) return true;
    if (tol > 0) return distance(x) <= tol;
    return false;
}

double CompactSetRep::distance(const Vec& x) const {
    if (impl->kind == SetKind::VertexHull) return impl->body.distance(x);
    if (impl->raw_member(x)) return 0.0;
    if (impl->margin_fn && impl->kind == SetKind::SublevelGrid) {
        // The margin callable gives sub-cell accuracy but may measure a
        // non-Euclidean gap; keep the cloud value as a cross-bound.
        double m = std::max(0.0, impl->margin_fn(x));
        impl->ensure_clouds();
        double d = kInf;
        for (const auto& p : impl->inner) d = std::min(d, dist(p, x));
        return std::min(m, d);
    }
    if (impl->margin_fn) return std::max(0.0, impl->margin_fn(x));
    impl->ensure_clouds();
    double d = kInf;
    for (const auto& p : impl->inner) d = std::min(d, dist(p, x));
    return d;
}

double CompactSetRep::complement_distance(const Vec& x) const {
    if (impl->kind == SetKind::VertexHull) return impl->body.interior_depth(x);
    if (!impl->raw_member(x)) return 0.0;
    if (impl->margin_fn) {
        double m = impl->margin_fn(x);
        if (m < 0) return -m;
    }
    impl->ensure_clouds();
    double d = kInf;
    for (const auto& p : impl->outer) d = std::min(d, dist(p, x));
    // Points beyond the scan window count as complement too.
    Box b = bounding_box();
    for (int a = 0; a < impl->dim; ++a) {
        d = std::min(d, std::max(0.0, x[a] - b.lo[a]));
        d = std::min(d, std::max(0.0, b.hi[a] - x[a]));
    }
    return d;
}

Vec CompactSetRep::project(const Vec& x) const {
    if (impl->kind == SetKind::VertexHull) return impl->body.project(x);
    if (impl->project_fn) return impl->project_fn(x);
    if (impl->raw_member(x)) return x;
    impl->ensure_clouds();
    double best = kInf;
    const Vec* arg = nullptr;
    for (const auto& p : impl->inner) {
        double d = dist(p, x);
        if (d < best) { best = d; arg = &p; }
    }
    if (!arg) throw std::domain_error("set: projection target is empty");
    return *arg;
}

const std::vector<Vec>& CompactSetRep::sample_points() const {
    impl->ensure_clouds();
    return impl->samples;
}

const std::vector<Vec>& CompactSetRep::boundary_cloud() const {
    impl->ensure_clouds();
    return impl->inner;
}

const std::vector<Vec>& CompactSetRep::outer_cloud() const {
    impl->ensure_clouds();
    return impl->outer;
}

const std::vector<Vec>& CompactSetRep::hull_vertices() const {
    if (impl->kind != SetKind::VertexHull)
        throw std::logic_error("set: hull_vertices on non-hull representation");
    return impl->body.vertices();
}

const GridFunction& CompactSetRep::grid() const {
    if (impl->kind != SetKind::SublevelGrid)
        throw std::logic_error("set: grid on non-grid representation");
    return impl->grid;
}

bool CompactSetRep::has_interior_flagged() const {
    impl->ensure_clouds();
    return impl->has_interior;
}

// ---------------------------------------------------------------------------
// IO
// ---------------------------------------------------------------------------

void CompactSetRep::save(std::ostream& os) const {
    if (impl->kind == SetKind::VertexHull) {
        const auto& vs = impl->body.vertices();
        os << "hull v1 n=" << vs.size() << " dim=" << impl->dim << '\n';
        os << std::setprecision(17);
        for (const auto& v : vs) {
            for (size_t i = 0; i < v.size(); ++i) {
                if (i) os << ',';
                os << v[i];
            }
            os << '\n';
        }
        return;
    }
    if (impl->kind == SetKind::SublevelGrid) {
        impl->grid.save(os);
        return;
    }
    throw std::runtime_error("set: oracle representations are not serializable");
}

void CompactSetRep::save_file(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("set: cannot write " + path);
    save(os);
}

CompactSetRep CompactSetRep::load(std::istream& is) {
    std::streampos start = is.tellg();
    std::string first;
    if (!std::getline(is, first)) throw std::runtime_error("set: empty stream");
    std::istringstream hs(first);
    std::string magic;
    hs >> magic;
    if (magic == "gridfn") {
        is.seekg(start);
        return sublevel(GridFunction::load(is));
    }
    std::vector<Vec> verts;
    auto parse_row = [](const std::string& line) {
        Vec v;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) v.push_back(std::stod(cell));
        return v;
    };
    if (magic == "hull") {
        size_t n = 0;
        std::string tok;
        while (hs >> tok)
            if (tok.rfind("n=", 0) == 0) n = std::stoul(tok.substr(2));
        std::string line;
        while (verts.size() < n && std::getline(is, line))
            if (!line.empty() && line[0] != '#') verts.push_back(parse_row(line));
    } else {
        verts.push_back(parse_row(first));
        std::string line;
        while (std::getline(is, line))
            if (!line.empty() && line[0] != '#') verts.push_back(parse_row(line));
    }
    return hull(std::move(verts));
}

CompactSetRep CompactSetRep::load_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("set: cannot read " + path);
    return load(is);
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

double excess(const CompactSetRep& a, const CompactSetRep& b) {
    const auto& pts = a.sample_points();
    if (pts.empty()) throw std::domain_error("excess: empty left set");
    double e = 0;
    for (const auto& p : pts) e = std::max(e, b.distance(p));
    return e;
}

namespace {

// Sutherland-Hodgman clip of a CCW polygon loop against an axis-aligned box.
std::vector<Vec> clip_polygon_box(std::vector<Vec> poly, const Box& w) {
    for (int axis = 0; axis < 2; ++axis) {
        for (int side = 0; side < 2; ++side) {
            double bound = side == 0 ? w.lo[axis] : w.hi[axis];
            auto inside = [&](const Vec& p) {
                return side == 0 ? p[axis] >= bound - 1e-15 : p[axis] <= bound + 1e-15;
            };
            std::vector<Vec> out;
            const size_t n = poly.size();
            for (size_t i = 0; i < n; ++i) {
                const Vec& cur = poly[i];
                const Vec& nxt = poly[(i + 1) % n];
                bool ci = inside(cur), ni = inside(nxt);
                if (ci) out.push_back(cur);
                if (ci != ni) {
                    double t = (bound - cur[axis]) / (nxt[axis] - cur[axis]);
                    out.push_back(axpy(cur, t, sub(nxt, cur)));
                }
            }
            poly = std::move(out);
            if (poly.empty()) return poly;
        }
    }
    return poly;
}

std::vector<Vec> restricted_samples(const CompactSetRep& a, const Box& w) {
    if (a.kind() == SetKind::VertexHull) {
        const auto& vs = a.hull_vertices();
        const int d = a.dim();
        if (d == 1) {
            double lo = std::max(vs.front()[0], w.lo[0]);
            double hi = std::min(vs.back()[0], w.hi[0]);
            if (lo > hi) return {};
            return {{lo}, {hi}};
        }
        if (d == 2 && vs.size() > 2) {
            auto loop = hull_2d(vs);
            return clip_polygon_box(loop, w);
        }
        // dim >= 3 (or degenerate): filter vertices; exact clipping is a
        // non-goal beyond the plane.
        std::vector<Vec> out;
        for (const auto& v : vs)
            if (w.contains(v, 1e-12)) out.push_back(v);
        return out;
    }
    std::vector<Vec> out;
    for (const auto& p : a.sample_points())
        if (w.contains(p, 1e-12)) out.push_back(p);
    return out;
}

}  // namespace

double excess_restricted(const CompactSetRep& a, const Box& window, const CompactSetRep& b) {
    auto pts = restricted_samples(a, window);
    if (pts.empty()) return 0.0;  // empty intersection contributes zero by convention
    double e = 0;
    for (const auto& p : pts) e = std::max(e, b.distance(p));
    return e;
}

double hausdorff(const CompactSetRep& a, const CompactSetRep& b) {
    return std::max(excess(a, b), excess(b, a));
}

double set_distance(const CompactSetRep& a, const CompactSetRep& b) {
    if (a.kind() == SetKind::VertexHull && b.kind() == SetKind::VertexHull)
        return hull_to_hull_distance(a.hull_vertices(), b.hull_vertices());
    double d = kInf;
    for (const auto& p : a.sample_points()) d = std::min(d, b.distance(p));
    for (const auto& p : b.sample_points()) d = std::min(d, a.distance(p));
    return d;
}

std::vector<double> default_step_sequence() {
    std::vector<double> s;
    for (int k = 3; k <= 12; ++k) s.push_back(std::pow(2.0, -k));
    return s;
}

ConeSample contingent_cone(const CompactSetRep& set, const Vec& x,
                           const std::vector<double>& step_sequence,
                           const std::vector<Vec>& direction_grid,
                           const ContingentOptions& opts) {
    const double scale = 1.0 + norm(x);
    const double acc = set.metric_accuracy();
    if (set.distance(x) > opts.apex_tol * scale + 2 * acc)
        throw std::domain_error("contingent_cone: point is not on the set");
    Vec apex = set.distance(x) > 0 ? set.project(x) : x;

    std::vector<double> steps = step_sequence;
    std::sort(steps.begin(), steps.end(), std::greater<double>());
    std::vector<double> usable;
    for (double h : steps)
        if (acc == 0.0 || h >= 20.0 * acc) usable.push_back(h);
    if (usable.size() < 2) {
        usable.clear();
        usable.push_back(steps.front());
        if (steps.size() > 1) usable.push_back(steps[1]);
    }
    // Two smallest usable steps: the Limsup surrogate.
    double h1 = usable[usable.size() - 1];
    double h2 = usable.size() > 1 ? usable[usable.size() - 2] : h1;

    ConeSample cone;
    cone.apex = apex;
    cone.kind = ConeSample::Kind::Contingent;
    for (const auto& d : direction_grid) {
        bool ok = true;
        for (double h : {h1, h2}) {
            double thr = std::max(opts.cone_tol * scale * h, opts.accuracy_floor_factor * acc);
            if (set.distance(axpy(apex, h, d)) > thr) {
                ok = false;
                break;
            }
        }
        if (ok) cone.directions.push_back(d);
    }
    return cone;
}

ConeSample negative_polar(const ConeSample& cone, const std::vector<Vec>& dual_grid,
                          double polar_tol) {
    ConeSample polar;
    polar.apex = cone.apex;
    polar.kind = ConeSample::Kind::NegativePolar;
    for (const auto& p : dual_grid) {
        bool ok = true;
        for (const auto& d : cone.directions)
            if (dot(p, d) > polar_tol) {
                ok = false;
                break;
            }
        if (ok) polar.directions.push_back(p);
    }
    return polar;
}

namespace {

void append_normal(std::vector<Vec>& normals, const Vec& n) {
    for (const auto& m : normals)
        if (dot(m, n) > 1.0 - 1e-9) return;
    normals.push_back(n);
}

void hull_normals_2d(const ConvexBody& body, const Vec& x, double eta,
                     const std::vector<Vec>& sphere, int edge_samples,
                     std::vector<Vec>& normals) {
    auto loop = body.verts_as_loop().first;
    const size_t n = loop.size();
    if (n < 3) {
        // Degenerate polygon: probe normals around the segment.
        for (const auto& s : sphere) {
            Vec y = body.project(x);
            if (body.distance(axpy(y, 1e-6, s)) >= 1e-6 * (1 - 1e-3)) append_normal(normals, s);
        }
        return;
    }
    for (size_t i = 0; i < n; ++i) {
        const Vec& a = loop[i];
        const Vec& b = loop[(i + 1) % n];
        Vec t = sub(b, a);
        Vec nrm = normalized(Vec{t[1], -t[0]});  // outward for CCW loops
        for (int s = 0; s <= edge_samples; ++s) {
            Vec y = axpy(a, double(s) / edge_samples, t);
            if (dist(y, x) <= eta) {
                append_normal(normals, nrm);
                break;
            }
        }
    }
    // Vertex fans: sphere directions inside the normal cone of a near vertex.
    for (size_t i = 0; i < n; ++i) {
        if (dist(loop[i], x) > eta) continue;
        Vec e_prev = sub(loop[(i + n - 1) % n], loop[i]);
        Vec e_next = sub(loop[(i + 1) % n], loop[i]);
        for (const auto& s : sphere)
            if (dot(s, e_prev) <= 1e-12 && dot(s, e_next) <= 1e-12) append_normal(normals, s);
    }
}

}  // namespace

BoundaryNormalSets boundary_normal_sets(const CompactSetRep& set, const Vec& x, double eta,
                                        double r, const std::vector<Vec>& sphere_sample,
                                        const NormalOptions& opts) {
    if (eta <= 0) throw std::invalid_argument("boundary_normal_sets: eta must be > 0");
    std::vector<Vec> normals;

    if (set.kind() == SetKind::VertexHull) {
        const auto& vs = set.hull_vertices();
        const int d = set.dim();
        if (d == 1) {
            double lo = vs.front()[0], hi = vs.back()[0];
            if (std::fabs(x[0] - lo) <= eta) append_normal(normals, {-1.0});
            if (std::fabs(x[0] - hi) <= eta) append_normal(normals, {1.0});
        } else if (d == 2) {
            ConvexBody body(vs);
            hull_normals_2d(body, x, eta, sphere_sample, opts.boundary_samples, normals);
        } else {
            // dim >= 3: proximal probing from vertices near x.
            for (const auto& v : vs) {
                if (dist(v, x) > eta) continue;
                for (const auto& s : sphere_sample) {
                    double delta = 1e-5 * (1 + norm(v));
                    if (set.distance(axpy(v, delta, s)) >= delta * (1 - opts.prox_slack))
                        append_normal(normals, s);
                }
            }
        }
    } else {
        double acc = set.metric_accuracy();
        double band = opts.boundary_band * std::max(acc * 2, 1e-12);
        (void)band;
        double delta = std::max(8 * acc, 1e-4 * (1 + norm(x)));
        for (const auto& y : set.boundary_cloud()) {
            if (dist(y, x) > eta) continue;
            for (const auto& s : sphere_sample) {
                Vec probe = axpy(y, delta, s);
                if (!set.member(probe) && set.distance(probe) >= delta * (1 - opts.prox_slack))
                    append_normal(normals, s);
            }
        }
    }

    BoundaryNormalSets out;
    out.N.apex = x;
    out.N.kind = ConeSample::Kind::ClarkeNormalHull;
    out.N.directions = normals;
    auto dirs = std::make_shared<std::vector<Vec>>(std::move(normals));
    out.sigma_test = [dirs, r](const Vec& p) {
        for (const auto& n : *dirs)
            if (dot(p, n) < r) return false;
        return true;  // vacuously true on empty N
    };
    out.gamma_test = [dirs](const Vec& p) {
        for (const auto& n : *dirs)
            if (dot(p, n) <= 0) return true;
        return false;
    };
    return out;
}

SignedDistance signed_distance(const CompactSetRep& set, const Vec& x) {
    if (!set.has_interior_flagged()) return {kInf, true};
    double d_in = set.distance(x);
    double d_out = set.complement_distance(x);
    return {d_in - d_out, false};
}

}  // namespace hjbv
