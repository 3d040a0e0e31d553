#include "hjbv/fenchel.hpp"

#include <algorithm>
#include <sstream>

namespace hjbv {

GridFunction conjugate(const GridFunction& f, const Box& dual_box,
                       const std::vector<int>& dual_res) {
    f.validate(/*for_conjugation=*/true);
    GridFunction out = GridFunction::make(dual_box, dual_res, 0.0);

    // Flatten the primal nodes once; the inner scan is the hot path.
    const size_t np = f.node_count();
    const int d = f.dim;
    std::vector<double> coords(np * d);
    std::vector<double> fv(np);
    size_t kept = 0;
    for (size_t i = 0; i < np; ++i) {
        double v = f.values[i];
        if (!is_finite(v)) continue;  // +inf nodes never attain the sup
        Vec p = f.node_point(i);
        for (int a = 0; a < d; ++a) coords[kept * d + a] = p[a];
        fv[kept] = v;
        ++kept;
    }
    if (kept == 0) throw std::domain_error("conjugate: function is identically +inf");

    const size_t nd = out.node_count();
    parallel_for(nd, [&](size_t j) {
        Vec v = out.node_point(j);
        double best = -kInf;
        for (size_t i = 0; i < kept; ++i) {
            double s = -fv[i];
            for (int a = 0; a < d; ++a) s += v[a] * coords[i * d + a];
            if (s > best) best = s;
        }
        out.values[j] = best;
    });
    out.provenance = "conjugate";
    return out;
}

Box default_dual_box(const GridFunction& f) {
    double lip = f.lipschitz_estimate();
    Box b{Vec(f.dim), Vec(f.dim)};
    for (int a = 0; a < f.dim; ++a) {
        double r = 1.5 * std::max(std::fabs(f.lo[a]), std::fabs(f.hi[a])) + lip;
        b.lo[a] = -r;
        b.hi[a] = r;
    }
    return b;
}

CompactSetRep effective_domain(const GridFunction& fstar, double finite_threshold) {
    GridFunction ind = fstar;
    bool any = false;
    for (auto& v : ind.values) {
        bool in = is_finite(v) && v < finite_threshold;
        any = any || in;
        v = in ? -1.0 : 1.0;
    }
    if (!any) throw std::domain_error("effective_domain: empty domain");
    ind.provenance = "effective-domain";
    return CompactSetRep::sublevel(std::move(ind));
}

ConjugateSlice conjugate_slice(const std::function<double(const Vec&)>& h_of_p, int n,
                               const Box& p_box, const Box& v_box, int v_res,
                               double stability_tol) {
    auto tabulate = [&](const Box& pb, int pr) {
        std::vector<int> res(n, pr);
        GridFunction g = GridFunction::make(pb, res, 0.0);
        for (size_t i = 0; i < g.node_count(); ++i) g.values[i] = h_of_p(g.node_point(i));
        return g;
    };
    int pr = (n == 1) ? 801 : 161;
    GridFunction g1 = tabulate(p_box, pr);
    // Doubled primal box with node-aligned grid: for v in dom the sup is
    // attained at a shared node, so the two conjugates agree exactly.
    GridFunction g2 = tabulate(p_box.inflated(1.0), 2 * (pr - 1) + 1);

    std::vector<int> vres(n, v_res);
    GridFunction c1 = conjugate(g1, v_box, vres);
    GridFunction c2 = conjugate(g2, v_box, vres);

    ConjugateSlice out;
    out.hstar = c1;
    std::vector<Vec> dom_nodes;
    for (size_t j = 0; j < c1.node_count(); ++j) {
        double a = c1.values[j], b = c2.values[j];
        if (std::fabs(a - b) <= stability_tol * (1 + std::fabs(a))) {
            dom_nodes.push_back(c1.node_point(j));
        } else {
            out.hstar.values[j] = kInf;
        }
    }
    if (dom_nodes.empty()) throw std::domain_error("conjugate_slice: empty effective domain");
    out.dom = ConvexBody(dom_nodes);

    Box domBox = out.dom.bounding_box();
    for (int a = 0; a < n; ++a) {
        double h = (v_box.hi[a] - v_box.lo[a]) / (v_res - 1);
        if (domBox.lo[a] <= v_box.lo[a] + 0.5 * h || domBox.hi[a] >= v_box.hi[a] - 0.5 * h)
            out.unbounded = true;
    }
    out.hstar.provenance = "conjugate-slice";
    return out;
}

SamplePlan default_sample_plan(int n) {
    SamplePlan plan;
    plan.t_samples = {0.0, 0.25, 0.7, 1.5, 3.0};
    plan.q_samples = {0.5, 1.0, 2.0};
    plan.lambda_samples = {0.25, 0.5, 1.0, 2.0, 5.0};
    auto coords = linspace(-2.0, 2.0, 5);
    if (n == 1) {
        for (double c : coords) plan.x_samples.push_back({c});
        for (double c : linspace(-3.0, 3.0, 13)) plan.p_samples.push_back({c});
        plan.p_box = Box{{-6}, {6}};
        plan.v_box = Box{{-3}, {3}};
    } else {
        for (double c1 : coords)
            for (double c2 : coords) plan.x_samples.push_back({c1, c2});
        for (double c1 : linspace(-2.0, 2.0, 5))
            for (double c2 : linspace(-2.0, 2.0, 5)) plan.p_samples.push_back({c1, c2});
        plan.p_box = Box{{-6, -6}, {6, 6}};
        plan.v_box = Box{{-3, -3}, {3, 3}};
        plan.p_res = 161;
        plan.v_res = 41;
    }
    return plan;
}

H1Report check_H1(const HamiltonianModel& model, const SamplePlan& plan, double tol) {
    H1Report rep;
    rep.tol = tol;
    std::ostringstream cw, hw;
    for (double t : plan.t_samples)
        for (const auto& x : plan.x_samples)
            for (double q : plan.q_samples) {
                for (size_t i = 0; i < plan.p_samples.size(); ++i)
                    for (size_t j = i + 1; j < plan.p_samples.size(); ++j) {
                        const Vec& p1 = plan.p_samples[i];
                        const Vec& p2 = plan.p_samples[j];
                        Vec mid = scale(add(p1, p2), 0.5);
                        double v = model.H(t, x, mid, q) -
                                   0.5 * (model.H(t, x, p1, q) + model.H(t, x, p2, q));
                        if (v > rep.max_convexity_violation) {
                            rep.max_convexity_violation = v;
                            cw.str("");
                            cw << "t=" << t << " q=" << q << " p1[0]=" << p1[0]
                               << " p2[0]=" << p2[0];
                        }
                    }
                for (const auto& p : plan.p_samples)
                    for (double lam : plan.lambda_samples) {
                        double v = std::fabs(model.H(t, x, scale(p, lam), lam * q) -
                                             lam * model.H(t, x, p, q));
                        if (v > rep.max_homogeneity_violation) {
                            rep.max_homogeneity_violation = v;
                            hw.str("");
                            hw << "t=" << t << " q=" << q << " lambda=" << lam
                               << " p[0]=" << p[0];
                        }
                    }
            }
    rep.convexity_witness = cw.str();
    rep.homogeneity_witness = hw.str();
    rep.convex_pass = rep.max_convexity_violation <= tol;
    rep.homogeneous_pass = rep.max_homogeneity_violation <= tol;
    return rep;
}

namespace {

// dom/H* access for one (t,x,q): analytic channel or a grid slice.
struct SliceView {
    ConvexBody dom;
    std::function<double(const Vec&)> value;
    bool unbounded = false;
};

SliceView slice_view(const HamiltonianModel& model, double t, const Vec& x, double q,
                     const SamplePlan& plan) {
    SliceView sv;
    if (model.has_analytic_conjugate()) {
        sv.dom = model.dom_hstar(t, x, q);
        Vec xc = x;
        const HamiltonianModel* mp = &model;
        sv.value = [mp, t, xc, q](const Vec& v) { return mp->hstar(t, xc, v, q); };
        return sv;
    }
    auto h_of_p = [&model, t, x, q](const Vec& p) { return model.H(t, x, p, q); };
    auto cs = std::make_shared<ConjugateSlice>(
        conjugate_slice(h_of_p, model.n, plan.p_box, plan.v_box, plan.v_res));
    sv.dom = cs->dom;
    sv.unbounded = cs->unbounded;
    sv.value = [cs](const Vec& v) { return cs->hstar.interp(v); };
    return sv;
}

std::vector<Vec> dom_samples(const ConvexBody& dom, int n) {
    std::vector<Vec> out = dom.vertices();
    Box bb = dom.bounding_box();
    if (n == 1) {
        for (double v : linspace(bb.lo[0], bb.hi[0], 17)) out.push_back({v});
    } else {
        for (double a : linspace(bb.lo[0], bb.hi[0], 7))
            for (double b : linspace(bb.lo[1], bb.hi[1], 7)) {
                Vec p = {a, b};
                if (dom.contains(p, 1e-9)) out.push_back(p);
            }
    }
    return out;
}

}  // namespace

H2C1Report check_H2_C1(const HamiltonianModel& model, const CompactSetRep& constraint,
                       const SamplePlan& plan) {
    H2C1Report rep;
    std::ostringstream w;

    std::vector<Vec> bdr;
    {
        const auto& cloud = constraint.boundary_cloud();
        size_t stride = std::max<size_t>(1, cloud.size() / 16);
        for (size_t i = 0; i < cloud.size(); i += stride) bdr.push_back(cloud[i]);
    }

    for (double t : plan.t_samples) {
        for (const auto& x : bdr) {
            SliceView sv1 = slice_view(model, t, x, 1.0, plan);
            if (sv1.unbounded) {
                rep.unbounded_domain = true;
                w << "unbounded dom H* at t=" << t << " x[0]=" << x[0] << "; ";
                continue;
            }
            for (const auto& p : dom_samples(sv1.dom, model.n)) {
                double hv = sv1.value(p);
                if (!is_finite(hv)) continue;
                double val = norm(p) + std::fabs(hv);
                rep.max_bdr_value = std::max(rep.max_bdr_value, val);
                double exc = val - model.sigma_bdr(t);
                if (exc > rep.max_bdr_excess) {
                    rep.max_bdr_excess = exc;
                    w << "C.1 worst at t=" << t << " p[0]=" << p[0] << "; ";
                }
            }
            for (double q : plan.q_samples) {
                SliceView svq = slice_view(model, t, x, q, plan);
                if (svq.unbounded) {
                    rep.unbounded_domain = true;
                    continue;
                }
                for (const auto& p : dom_samples(svq.dom, model.n))
                    for (const auto& y : plan.x_samples) {
                        double hv;
                        if (model.has_analytic_conjugate()) {
                            hv = model.hstar(t, y, p, q);
                        } else {
                            hv = slice_view(model, t, y, q, plan).value(p);
                        }
                        if (!is_finite(hv)) continue;  // p outside dom at y
                        double exc = hv - model.sigma_hat(t) * (1 + norm(y));
                        if (exc > rep.max_growth_excess) {
                            rep.max_growth_excess = exc;
                            w << "H.2(c) worst at t=" << t << " q=" << q << "; ";
                        }
                    }
            }
        }
    }
    rep.witness = w.str();
    return rep;
}

HamiltonianModel model_registry(const std::string& name) {
    HamiltonianModel m;
    m.name = name;
    if (name == "eikonal-decay") {
        m.n = 1;
        m.H = [](double t, const Vec& x, const Vec& p, double q) {
            return norm(p) - q * norm(x) * std::exp(-t);
        };
        m.sigma_x = [](double t) { return std::exp(-t); };
        m.sigma_p = [](double) { return 1.0; };
        m.sigma_hat = [](double t) { return 2.0 * std::exp(-t); };
        m.sigma_bdr = [](double) { return 3.0; };
        m.dom_hstar = [](double, const Vec&, double) { return ConvexBody({{-1.0}, {1.0}}); };
        m.hstar = [](double t, const Vec& x, const Vec& v, double q) {
            if (norm(v) > 1.0 + 1e-12) return kInf;
            return q * norm(x) * std::exp(-t);
        };
        m.dom_constant = true;
        return m;
    }
    if (name == "norm-h") {
        m.n = 1;
        m.H = [](double, const Vec&, const Vec& p, double) { return norm(p); };
        m.sigma_x = [](double) { return 0.0; };
        m.sigma_p = [](double) { return 1.0; };
        m.sigma_hat = [](double) { return 1.0; };
        m.sigma_bdr = [](double) { return 1.0; };
        m.dom_hstar = [](double, const Vec&, double) { return ConvexBody({{-1.0}, {1.0}}); };
        m.hstar = [](double, const Vec&, const Vec& v, double) {
            return norm(v) > 1.0 + 1e-12 ? kInf : 0.0;
        };
        m.dom_constant = true;
        return m;
    }
    if (name == "quadratic") {
        // H.1(c) violator with an unbounded conjugate domain; exercises the
        // rejection paths.
        m.n = 1;
        m.homogeneous = false;
        m.H = [](double, const Vec&, const Vec& p, double) { return 0.5 * norm2(p); };
        m.sigma_x = [](double) { return 0.0; };
        m.sigma_p = [](double) { return 10.0; };
        m.sigma_hat = [](double) { return 1.0; };
        m.sigma_bdr = [](double) { return 1.0; };
        return m;
    }
    if (name.rfind("grid:", 0) == 0) {
        auto g = std::make_shared<GridFunction>(GridFunction::load_file(name.substr(5)));
        m.n = g->dim;
        m.H = [g](double, const Vec&, const Vec& p, double q) {
            if (q <= 0) q = 1.0;
            return q * g->interp(scale(p, 1.0 / q));
        };
        double lip = g->lipschitz_estimate();
        m.sigma_x = [](double) { return 0.0; };
        m.sigma_p = [lip](double) { return lip; };
        m.sigma_hat = [g](double) { return std::max(1.0, -g->min_finite()); };
        m.sigma_bdr = [g, lip](double) { return lip + std::max(1.0, -g->min_finite()); };
        return m;
    }
    throw std::invalid_argument("model_registry: unknown model '" + name + "'");
}

}  // namespace hjbv
