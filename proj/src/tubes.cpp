#include "hjbv/tubes.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace hjbv {

void Tube::validate() const {
    if (times.size() < 2) throw std::invalid_argument("tube: needs at least 2 knots");
    if (times.size() != slices.size())
        throw std::invalid_argument("tube: knot/slice count mismatch");
    for (size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument("tube: times must be strictly increasing");
}

CompactSetRep Tube::eval(double t) const {
    if (t <= times.front()) return slices.front();
    if (t >= times.back()) return slices.back();
    auto it = std::upper_bound(times.begin(), times.end(), t);
    size_t i = static_cast<size_t>(it - times.begin()) - 1;
    if (interp == Interp::PiecewiseConstant) return slices[i];
    // linear-in-parameters: vertex interpolation when the lists match up
    if (slices[i].kind() == SetKind::VertexHull && slices[i + 1].kind() == SetKind::VertexHull) {
        const auto& a = slices[i].hull_vertices();
        const auto& b = slices[i + 1].hull_vertices();
        if (a.size() == b.size()) {
            double lam = (t - times[i]) / (times[i + 1] - times[i]);
            std::vector<Vec> verts(a.size());
            for (size_t k = 0; k < a.size(); ++k) verts[k] = axpy(a[k], lam, sub(b[k], a[k]));
            return CompactSetRep::hull(std::move(verts));
        }
    }
    return slices[i];
}

double Tube::next_knot(double t) const {
    auto it = std::upper_bound(times.begin(), times.end(), t + 1e-12);
    if (it == times.end()) return times.back();
    return *it;
}

Box Tube::default_compact() const {
    Box b = slices[0].bounding_box();
    for (size_t i = 1; i < slices.size(); ++i) b = b.merged(slices[i].bounding_box());
    return b.inflated(0.1);
}

void Tube::save(std::ostream& os) const {
    os << "tube v1 knots=" << times.size() << '\n';
    for (size_t i = 0; i < times.size(); ++i) {
        os << "t=" << std::setprecision(17) << times[i] << '\n';
        slices[i].save(os);
    }
}

void Tube::save_file(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("tube: cannot write " + path);
    save(os);
}

Tube Tube::load(std::istream& is) {
    std::string header;
    if (!std::getline(is, header) || header.rfind("tube v1", 0) != 0)
        throw std::runtime_error("tube: bad header");
    size_t knots = 0;
    auto pos = header.find("knots=");
    if (pos != std::string::npos) knots = std::stoul(header.substr(pos + 6));
    Tube tube;
    for (size_t i = 0; i < knots; ++i) {
        std::string tline;
        if (!std::getline(is, tline) || tline.rfind("t=", 0) != 0)
            throw std::runtime_error("tube: expected t= line");
        tube.times.push_back(std::stod(tline.substr(2)));
        tube.slices.push_back(CompactSetRep::load(is));
    }
    tube.validate();
    return tube;
}

Tube Tube::load_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("tube: cannot read " + path);
    return load(is);
}

namespace {

// Dyadic partition of [a,b] merged with the tube knots inside.
std::vector<double> build_partition(const Tube& tube, double a, double b, int depth) {
    std::set<double> pts{a, b};
    int cells = 1 << depth;
    for (int i = 1; i < cells; ++i) pts.insert(a + (b - a) * i / cells);
    for (double t : tube.times)
        if (t > a && t < b) pts.insert(t);
    return {pts.begin(), pts.end()};
}

double pair_term(const CompactSetRep& e0, const CompactSetRep& e1, const Box& window,
                 LbvDiagnostics* diag) {
    double e01 = excess_restricted(e1, window, e0);
    double e10 = excess_restricted(e0, window, e1);
    if (diag) {
        // emptiness of the localized sets is visible as zero-sample windows;
        // excess_restricted already returns 0 for them
        (void)e01;
    }
    return std::max(e01, e10);
}

}  // namespace

double lbv_variation(const Tube& tube, double a, double b, const Box& compact,
                     int partition_depth, LbvDiagnostics* diag) {
    tube.validate();
    if (a < tube.t_min() - 1e-12 || b > tube.t_max() + 1e-12 || !(a < b))
        throw std::invalid_argument("lbv_variation: [a,b] outside tube range");
    auto part = build_partition(tube, a, b, partition_depth);
    if (diag) diag->partition = part;
    double sum = 0;
    for (size_t i = 0; i + 1 < part.size(); ++i) {
        CompactSetRep e0 = tube.eval(part[i]);
        CompactSetRep e1 = tube.eval(part[i + 1]);
        sum += pair_term(e0, e1, compact, diag);
    }
    return sum;
}

std::vector<std::pair<int, double>> lbv_refinement_curve(const Tube& tube, double a, double b,
                                                         const Box& compact, int max_depth) {
    std::vector<std::pair<int, double>> curve;
    for (int d = 0; d <= max_depth; ++d)
        curve.emplace_back(d, lbv_variation(tube, a, b, compact, d));
    return curve;
}

double ac_modulus(const Tube& tube, double a, double b, double eps, int partition_depth) {
    if (eps <= 0) return 0;
    auto part = build_partition(tube, a, b, partition_depth);
    Box window = tube.default_compact();
    // Straddle candidates: interior partition points. Width per straddle keeps
    // the total measure within eps and avoids swallowing neighbors.
    std::vector<double> interior(part.begin() + 1, part.end() - 1);
    if (interior.empty()) return 0;
    double min_gap = kInf;
    for (size_t i = 0; i + 1 < part.size(); ++i) min_gap = std::min(min_gap, part[i + 1] - part[i]);
    double w = std::min(eps / (2.0 * interior.size()), 0.49 * min_gap);
    if (w <= 0) return 0;
    double captured = 0;
    for (double p : interior) {
        CompactSetRep left = tube.eval(std::max(a, p - w));
        CompactSetRep mid = tube.eval(p);
        CompactSetRep right = tube.eval(std::min(b, p + w));
        captured += pair_term(left, mid, window, nullptr);
        captured += pair_term(mid, right, window, nullptr);
    }
    return captured;
}

Tube epi_tube(const std::vector<double>& times, std::vector<GridFunction> u_slices,
              double value_cap) {
    if (times.size() != u_slices.size() || times.size() < 2)
        throw std::invalid_argument("epi_tube: need matching times and >= 2 slices");
    const GridFunction& first = u_slices[0];
    for (const auto& g : u_slices) {
        if (g.dim != first.dim || g.res != first.res || g.lo != first.lo || g.hi != first.hi)
            throw std::invalid_argument("epi_tube: slices must share box and resolution");
    }
    Tube tube;
    tube.times = times;
    tube.interp = Tube::Interp::PiecewiseConstant;
    const int nx = first.dim;

    for (auto& g : u_slices) {
        double spread = std::max(1e-12, (g.max_finite() - g.min_finite()));
        g.lsc_regularize(1e-6 * spread + 3 * spread / g.res[0]);
        double mn = g.min_finite();
        if (!(mn <= value_cap)) throw std::domain_error("epi_tube: slice entirely above cap");

        auto gp = std::make_shared<GridFunction>(g);
        Box bb{Vec(nx + 1), Vec(nx + 1)};
        for (int a = 0; a < nx; ++a) {
            bb.lo[a] = g.lo[a];
            bb.hi[a] = g.hi[a];
        }
        bb.lo[nx] = mn - 0.05 * (value_cap - mn) - 1e-9;
        bb.hi[nx] = value_cap;

        auto split = [nx](const Vec& p) {
            Vec x(p.begin(), p.begin() + nx);
            return std::make_pair(x, p[nx]);
        };
        auto member = [gp, value_cap, split](const Vec& p) {
            auto [x, z] = split(p);
            double u = gp->interp(x);
            return is_finite(u) && z >= u - 1e-12 && z <= value_cap + 1e-12;
        };
        auto margin = [gp, value_cap, split](const Vec& p) {
            auto [x, z] = split(p);
            double u = gp->interp(x);
            if (!is_finite(u)) return kInf;
            return std::max(u - z, z - value_cap);  // <= 0 inside
        };
        auto project = [gp, value_cap, split, nx](const Vec& p) {
            auto [x, z] = split(p);
            double u = gp->interp(x);
            Vec out = p;
            if (!is_finite(u)) {
                // clamp into the slice box first
                for (int a = 0; a < nx; ++a)
                    out[a] = std::clamp(out[a], gp->lo[a], gp->hi[a]);
                Vec x2(out.begin(), out.begin() + nx);
                u = gp->interp(x2);
                if (!is_finite(u)) u = gp->nearest(x2);
            }
            out[nx] = std::clamp(std::max(out[nx], u), u, value_cap);
            return out;
        };

        // Graph cloud: boundary points of the epigraph for distance queries.
        std::vector<Vec> cloud;
        for (size_t f = 0; f < gp->node_count(); ++f) {
            double v = gp->values[f];
            if (!is_finite(v) || v > value_cap) continue;
            Vec p = gp->node_point(f);
            p.push_back(v);
            cloud.push_back(std::move(p));
        }
        double res = 0;
        for (int a = 0; a < nx; ++a) res = std::max(res, g.step(a));

        tube.slices.push_back(CompactSetRep::oracle_with_clouds(
            member, bb, res, margin, project, std::move(cloud), {}, /*has_interior=*/true));
    }
    tube.validate();
    return tube;
}

double psi_distance(const Tube& E, const Tube& Y, double t) {
    if (t < E.t_min() - 1e-12 || t > E.t_max() + 1e-12 || t < Y.t_min() - 1e-12 ||
        t > Y.t_max() + 1e-12)
        throw std::domain_error("psi_distance: t outside tube range");
    return set_distance(E.eval(t), Y.eval(t));
}

PsiBvReport psi_bv_report(const Tube& E, const Tube& Y, double a, double b, int partition_depth,
                          const std::function<double(double, double)>& rho_integral,
                          double tol) {
    PsiBvReport rep;
    double rho_total = rho_integral(a, b);
    Box window = E.default_compact().merged(Y.default_compact());
    for (int d = 0; d <= partition_depth; ++d) {
        auto part = build_partition(E, a, b, d);
        double sum = 0;
        double prev = psi_distance(E, Y, part[0]);
        for (size_t i = 1; i < part.size(); ++i) {
            double cur = psi_distance(E, Y, part[i]);
            sum += std::fabs(cur - prev);
            prev = cur;
        }
        double bound = lbv_variation(E, a, b, window, d) + rho_total;
        bool ok = sum <= bound + tol;
        rep.rows.push_back({d, sum, bound, ok});
        rep.pass = rep.pass && ok;
    }
    return rep;
}

TubeContinuityReport tube_continuity_report(const Tube& tube, const Box& compact) {
    TubeContinuityReport rep;
    for (size_t i = 0; i + 1 < tube.times.size(); ++i) {
        double jump = pair_term(tube.slices[i], tube.slices[i + 1], compact, nullptr);
        double rate = jump / (tube.times[i + 1] - tube.times[i]);
        if (rate > rep.max_jump_rate) {
            rep.max_jump_rate = rate;
            rep.max_knot_jump = jump;
            rep.worst_knot = i;
        }
    }
    return rep;
}

}  // namespace hjbv
