#include "hjbv/representation.hpp"

#include <sstream>

namespace hjbv {

Representation::Representation(HamiltonianModel model, RepresentationOptions opts)
    : model_(std::move(model)), opts_(std::move(opts)) {
    thetas_ = ball_lattice(model_.n + 1, opts_.theta_count);
    theta_mesh_ = ball_sample_mesh(thetas_, model_.n + 1);
    if (opts_.p_box.dim() == 0) {
        opts_.p_box = Box{Vec(model_.n, -6.0), Vec(model_.n, 6.0)};
        opts_.v_box = Box{Vec(model_.n, -4.0), Vec(model_.n, 4.0)};
        if (model_.n == 2) opts_.v_res = 81;
    }
}

Representation::DomainInfo Representation::domain_info_value(double t, const Vec& x) const {
    if (model_.has_analytic_conjugate() && model_.dom_constant) {
        {
            std::lock_guard<std::mutex> lk(memo_->mtx);
            if (memo_->constant_info) return *memo_->constant_info;
        }
        DomainInfo info;
        info.body = model_.dom_hstar(t, x, 1.0);
        info.center = info.body.chebyshev_center();
        info.radius = std::max(info.body.radius_about(info.center), 1e-12);
        auto shared = std::make_shared<DomainInfo>(info);
        std::lock_guard<std::mutex> lk(memo_->mtx);
        if (!memo_->constant_info) memo_->constant_info = shared;
        return *memo_->constant_info;
    }
    DomainInfo info;
    if (model_.has_analytic_conjugate()) {
        info.body = model_.dom_hstar(t, x, 1.0);
    } else {
        auto slice = conjugate_slice(
            [this, t, &x](const Vec& p) { return model_.H(t, x, p, 1.0); }, model_.n,
            opts_.p_box, opts_.v_box, opts_.v_res);
        info.body = slice.dom;
        info.unbounded = slice.unbounded;
        info.hstar_grid = std::make_shared<GridFunction>(std::move(slice.hstar));
    }
    if (info.body.empty()) throw std::domain_error("representation: empty conjugate domain");
    info.center = info.body.chebyshev_center();
    info.radius = std::max(info.body.radius_about(info.center), 1e-12);
    return info;
}

const Representation::DomainInfo& Representation::domain_info(double t, const Vec& x) const {
    std::pair<double, Vec> key{t, x};
    {
        std::lock_guard<std::mutex> lk(memo_->mtx);
        auto it = memo_->map.find(key);
        if (it != memo_->map.end()) return *it->second;
    }
    auto info = std::make_shared<DomainInfo>(domain_info_value(t, x));
    std::lock_guard<std::mutex> lk(memo_->mtx);
    auto [it, ok] = memo_->map.emplace(key, info);
    (void)ok;
    return *it->second;
}

double Representation::hstar_at(double t, const Vec& x, const Vec& v) const {
    if (model_.has_analytic_conjugate()) return model_.hstar(t, x, v, 1.0);
    const DomainInfo& di = domain_info(t, x);
    double val = di.hstar_grid->interp(v);
    if (!is_finite(val)) {
        // Interpolation cells straddling the domain edge: fall back to the
        // nearest finite node (the projection keeps v on the body anyway).
        val = di.hstar_grid->nearest(v);
    }
    return val;
}

Vec Representation::velocity(double t, const Vec& x, const Vec& theta) const {
    const DomainInfo& di = domain_info(t, x);
    Vec tv(theta.begin(), theta.begin() + model_.n);
    return di.body.project(axpy(di.center, di.radius, tv));
}

double Representation::cost_canonical(double t, const Vec& x, const Vec& theta) const {
    return hstar_at(t, x, velocity(t, x, theta));
}

double Representation::cap(double t, const Vec& x) const {
    return model_.sigma_hat(t) * (1.0 + norm(x));
}

double Representation::cost(double t, const Vec& x, const Vec& theta) const {
    double canonical = cost_canonical(t, x, theta);
    double theta_c = theta[model_.n];
    if (theta_c <= 0) return canonical;
    return canonical + theta_c * (cap(t, x) - canonical);
}

Representation build_representation(const HamiltonianModel& model, RepresentationOptions opts) {
    auto plan = default_sample_plan(model.n);
    auto h1 = check_H1(model, plan);
    if (!h1.convex_pass)
        throw std::invalid_argument("build_representation: H not convex in p (witness: " +
                                    h1.convexity_witness + ")");
    // Non-homogeneous models are admitted at q = 1 only; q-slices rely on
    // H.1(c) and verify_identity refuses them.
    return Representation(model, std::move(opts));
}

VerifyPlan default_verify_plan(int n) {
    VerifyPlan plan;
    if (n == 1) {
        for (double p : linspace(-3.0, 3.0, 61)) plan.p_samples.push_back({p});
        for (double x : {-1.5, 0.0, 1.0}) plan.x_samples.push_back({x});
    } else {
        for (double a : linspace(-2.0, 2.0, 9))
            for (double b : linspace(-2.0, 2.0, 9)) plan.p_samples.push_back({a, b});
        plan.x_samples = {{0.0, 0.0}, {1.0, -0.5}};
    }
    return plan;
}

VerifyReport verify_identity(const Representation& rep, const HamiltonianModel& model,
                             const VerifyPlan& plan) {
    if (!model.homogeneous)
        throw std::invalid_argument("verify_identity: model must satisfy H.1(c)");
    VerifyReport out;
    out.rep_tol = rep.options().rep_tol;
    std::ostringstream w;
    for (double t : plan.t_samples)
        for (const auto& x : plan.x_samples) {
            // Evaluate (f, L) once per theta at this (t,x).
            const auto& thetas = rep.theta_samples();
            std::vector<Vec> fs(thetas.size());
            std::vector<double> Ls(thetas.size());
            for (size_t i = 0; i < thetas.size(); ++i) {
                fs[i] = rep.velocity(t, x, thetas[i]);
                Ls[i] = rep.cost(t, x, thetas[i]);
            }
            for (const auto& p : plan.p_samples)
                for (double q : plan.q_samples) {
                    double sup = -kInf;
                    for (size_t i = 0; i < thetas.size(); ++i)
                        sup = std::max(sup, dot(p, fs[i]) - q * Ls[i]);
                    double href = model.H(t, x, p, q);
                    double err = std::fabs(href - sup);
                    double nerr = err / (1.0 + norm(p) + q);
                    if (nerr > out.max_normalized_error) {
                        out.max_normalized_error = nerr;
                        out.max_error = err;
                        w.str("");
                        w << "t=" << t << " x[0]=" << x[0] << " p[0]=" << p[0] << " q=" << q;
                    }
                }
        }
    out.witness = w.str();
    return out;
}

double lipschitz_estimate(const Representation& rep, double t, const Vec& x1, const Vec& x2,
                          const Vec& theta1, const Vec& theta2, double q) {
    const HamiltonianModel& m = rep.model();
    auto gamma = [&](const Vec& x) -> double {
        if (m.has_analytic_conjugate()) {
            const auto& di = rep.domain_info(t, x);
            double sup = -kInf;
            for (const auto& v : di.body.vertices()) {
                double hv = m.hstar(t, x, v, q);
                if (is_finite(hv)) sup = std::max(sup, hv);
            }
            // Coarse interior sweep; keeps non-vertex maxima honest.
            Box bb = di.body.bounding_box();
            if (m.n == 1)
                for (double v : linspace(bb.lo[0], bb.hi[0], 33)) {
                    double hv = m.hstar(t, x, {v}, q);
                    if (is_finite(hv)) sup = std::max(sup, hv);
                }
            return std::max(0.0, sup);
        }
        const auto& di = rep.domain_info(t, x);
        if (di.unbounded) return kInf;
        double sup = 0.0;
        for (double v : di.hstar_grid->values)
            if (is_finite(v)) sup = std::max(sup, v);
        return sup;
    };
    auto eta = [&](const Vec& x) -> double {
        double g = gamma(x);
        if (!is_finite(g)) return kInf;
        Vec zero(m.n, 0.0);
        return m.sigma_p(t) * (1 + norm(x)) + g + std::fabs(m.H(t, x, zero, q));
    };
    double e1 = eta(x1), e2 = eta(x2);
    if (!is_finite(e1) || !is_finite(e2)) return kInf;
    double mixed = dist(scale(theta1, e1), scale(theta2, e2));
    return 5.0 * (m.n + 1) * (m.sigma_x(t) * dist(x1, x2) + mixed);
}

}  // namespace hjbv
