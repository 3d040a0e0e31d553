#include "hjbv/nft.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace hjbv {

void ConstraintData::validate() const {
    if (eta <= 0 || r <= 0 || M < 0)
        throw std::invalid_argument("constraint data: need eta > 0, r > 0, M >= 0");
    if (!q_bound || !q_integral) throw std::invalid_argument("constraint data: missing q");
    if (!Q.body) throw std::invalid_argument("constraint data: missing dynamics Q");
}

namespace {

std::vector<Vec> normals_near(const ConstraintData& cd, const Vec& y) {
    auto sphere = sphere_directions(static_cast<int>(y.size()), cd.normal_sphere_count);
    return boundary_normal_sets(cd.A, y, cd.eta, cd.r, sphere).N.directions;
}

bool deep_inside(const ConstraintData& cd, const Trajectory& tr) {
    for (const auto& s : tr.states) {
        auto sd = signed_distance(cd.A, s);
        if (sd.degenerate || sd.value > -cd.eta / 4) return false;
    }
    return true;
}

// Inward-velocity selection at (t, y): minimize |w - v| over Q(t,y) inside
// B(v,M) subject to <w,n> <= -r and <w-v,n> <= -r for all sampled normals.
// Lexicographic tie-break keeps golden runs stable.
struct WSelect {
    bool feasible = false;
    Vec w;
};

WSelect select_inward(const ConstraintData& cd, double t, const Vec& y, const Vec& v,
                      const std::vector<Vec>& normals, double tol) {
    ConvexBody B = cd.Q.body(t, y);
    std::vector<Vec> candidates = B.vertices();
    Box bb = B.bounding_box();
    const int d = B.dim();
    if (d == 1) {
        for (double c : linspace(bb.lo[0], bb.hi[0], 129)) candidates.push_back({c});
    } else if (d == 2) {
        for (double a : linspace(bb.lo[0], bb.hi[0], 33))
            for (double b : linspace(bb.lo[1], bb.hi[1], 33)) {
                Vec c = {a, b};
                if (B.contains(c, 1e-9)) candidates.push_back(c);
            }
    }
    WSelect out;
    double best = kInf;
    for (const auto& w : candidates) {
        if (dist(w, v) > cd.M + tol) continue;
        bool ok = true;
        for (const auto& n : normals) {
            if (dot(w, n) > -cd.r + tol) { ok = false; break; }
            if (dot(sub(w, v), n) > -cd.r + tol) { ok = false; break; }
        }
        if (!ok) continue;
        double score = dist(w, v);
        if (score < best - 1e-12 || (score < best + 1e-12 && out.feasible && w < out.w)) {
            best = score;
            out.w = w;
            out.feasible = true;
        }
    }
    return out;
}

}  // namespace

std::vector<int> classify_outward(const ConstraintData& cd, const Trajectory& xhat) {
    cd.validate();
    xhat.validate();
    if (deep_inside(cd, xhat)) return {};
    std::vector<int> idx;
    for (size_t i = 0; i + 1 < xhat.times.size(); ++i) {
        double s = 0.5 * (xhat.times[i] + xhat.times[i + 1]);
        Vec y = xhat.state_at(s);
        Vec v = xhat.velocity(i);
        for (const auto& n : normals_near(cd, y)) {
            if (dot(n, v) >= 0) {
                idx.push_back(static_cast<int>(i));
                break;
            }
        }
    }
    return idx;
}

double intervals_measure(const Trajectory& tr, const std::vector<int>& idx) {
    double mu = 0;
    for (int i : idx) mu += tr.times[i + 1] - tr.times[i];
    return mu;
}

InwardResult inward_substitute(const ConstraintData& cd, const Trajectory& xhat,
                               const std::vector<int>& Aplus, double k, double rho) {
    cd.validate();
    xhat.validate();
    if (!(k > 1.0 / cd.r))
        throw std::invalid_argument("inward_substitute: need k > 1/r");
    std::set<int> plus(Aplus.begin(), Aplus.end());

    // tau: first time mu(A+ ∩ [t0,t]) reaches k*rho (t1 if never).
    double budget = k * rho;
    double tau = xhat.t1();
    {
        double acc = 0;
        for (size_t i = 0; i + 1 < xhat.times.size(); ++i) {
            if (!plus.count(static_cast<int>(i))) continue;
            double len = xhat.times[i + 1] - xhat.times[i];
            if (acc + len >= budget - 1e-15) {
                tau = xhat.times[i] + (budget - acc);
                break;
            }
            acc += len;
        }
    }

    InwardResult out;
    out.tau = tau;
    out.y.times.push_back(xhat.t0());
    out.y.states.push_back(xhat.states.front());

    for (size_t i = 0; i + 1 < xhat.times.size(); ++i) {
        double a = xhat.times[i], b = xhat.times[i + 1];
        Vec v = xhat.velocity(i);
        bool in_plus = plus.count(static_cast<int>(i)) > 0;

        auto emit = [&](double upto, const Vec& slope, bool subst) {
            double h = upto - out.y.times.back();
            if (h <= 1e-15) return;
            out.y.states.push_back(axpy(out.y.states.back(), h, slope));
            out.y.times.push_back(upto);
            out.substituted.push_back(subst ? 1 : 0);
        };

        if (in_plus && a < tau - 1e-15) {
            double s = 0.5 * (a + std::min(b, tau));
            Vec ypt = xhat.state_at(s);
            auto normals = normals_near(cd, ypt);
            auto sel = select_inward(cd, s, ypt, v, normals, 1e-9);
            if (!sel.feasible) {
                out.feasible = false;
                out.witness_time = s;
                std::ostringstream msg;
                msg << "controllability violation: no inward velocity at t=" << s;
                out.message = msg.str();
                return out;
            }
            if (b <= tau + 1e-15) {
                emit(b, sel.w, true);
                out.mu_total += b - a;
            } else {
                emit(tau, sel.w, true);
                out.mu_total += tau - a;
                emit(b, v, false);
            }
        } else {
            emit(b, v, false);
        }
    }
    out.y.validate();
    return out;
}

NftResult neighboring_feasible(const ConstraintData& cd, const Trajectory& xhat, double rho,
                               double delta, const NftOptions& opts) {
    cd.validate();
    xhat.validate();
    NftResult res;
    res.rho = rho;

    if (std::fabs((xhat.t1() - xhat.t0()) - delta) > 1e-9)
        throw std::invalid_argument("neighboring_feasible: delta must equal t1 - t0");
    if (cd.A.distance(xhat.states.front()) > 1e-9)
        throw std::invalid_argument("neighboring_feasible: xhat(t0) must lie in A");
    for (const auto& s : xhat.states)
        if (cd.A.distance(s) > rho + 1e-9)
            throw std::invalid_argument("neighboring_feasible: rho < dist(xhat, A)");

    // Window-integral strengthening of M, and the phi modulus of Q.
    double r_run = 1.0;
    for (const auto& s : xhat.states) r_run = std::max(r_run, norm(s) + 1.0);
    res.M_eff = std::max(cd.M, cd.q_integral(xhat.t0(), xhat.t1()));
    auto theta_phi_of = [&](double window) {
        double worst = 0;
        for (double s : linspace(xhat.t0(), std::max(xhat.t0(), xhat.t1() - window), 33)) {
            double acc = 0;
            int steps = 32;
            double h = window / steps;
            for (int i = 0; i < steps; ++i) {
                double t = s + (i + 0.5) * h;
                acc += h * cd.Q.lipschitz(t, r_run);
            }
            worst = std::max(worst, acc);
        }
        return worst;
    };

    // cond2_1: (i) 8 Delta M <= eta, (ii) 2 e^{th} th M < r,
    // (iii) k (r - 2 e^{th} th M) > 1. Delta is the largest admissible value
    // capped at delta; admissibility shrinks as Delta grows.
    double cap_i = cd.eta / (8.0 * std::max(res.M_eff, 1e-12));
    auto clause_ii = [&](double D) {
        double th = theta_phi_of(D);
        return 2.0 * std::exp(th) * th * res.M_eff < cd.r;
    };
    double Delta = std::min(delta, cap_i);
    if (Delta <= 0) {
        res.constants_ok = false;
        res.failure = "cond2_1(i): 8*Delta*M <= eta admits no positive Delta";
        return res;
    }
    if (!clause_ii(Delta)) {
        double lo = 0, hi = Delta;
        for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (lo + hi);
            (clause_ii(mid) ? lo : hi) = mid;
        }
        Delta = lo;
        if (Delta <= 1e-9 * delta) {
            res.constants_ok = false;
            res.failure = "cond2_1(ii): 2 e^{theta} theta M < r fails for every window";
            return res;
        }
    }
    res.Delta = Delta;
    res.delta_within_window = delta <= Delta + 1e-12;
    res.theta_phi = theta_phi_of(Delta);
    double margin_r = cd.r - 2.0 * std::exp(res.theta_phi) * res.theta_phi * res.M_eff;
    if (margin_r <= 0) {
        res.constants_ok = false;
        res.failure = "cond2_1(iii): no k with k(r - 2e^{theta} theta M) > 1";
        return res;
    }
    res.k = std::max(2.0 / margin_r, 1.0 / cd.r + 1e-9);
    res.beta = 2.0 * res.M_eff * (std::exp(res.theta_phi) * res.theta_phi + 1.0) * res.k;

    auto record_margins = [&](const Trajectory& tr) {
        res.margin_times.clear();
        res.interior_margin.clear();
        for (size_t i = 0; i < tr.times.size(); ++i) {
            auto sd = signed_distance(cd.A, tr.states[i]);
            res.margin_times.push_back(tr.times[i]);
            res.interior_margin.push_back(-sd.value);
        }
    };
    auto check_interior = [&](const Trajectory& tr) {
        for (size_t i = 1; i < tr.times.size(); ++i) {
            auto sd = signed_distance(cd.A, tr.states[i]);
            if (!(sd.value < 0)) {
                res.interior_ok = false;
                std::ostringstream msg;
                msg << "interiority violated at t=" << tr.times[i]
                    << " (signed distance " << sd.value << ")";
                res.failure = msg.str();
                return;
            }
        }
    };

    // Early exit: the path keeps margin eta/4 from the boundary.
    if (deep_inside(cd, xhat)) {
        res.x = xhat;
        res.early_exit = true;
        record_margins(res.x);
        check_interior(res.x);
        return res;
    }

    auto Aplus = classify_outward(cd, xhat);
    res.mu_Aplus = intervals_measure(xhat, Aplus);

    if (Aplus.empty()) {
        // Case 1: the mean-value argument already gives strict interiority.
        res.x = xhat;
        record_margins(res.x);
        check_interior(res.x);
        return res;
    }

    auto inward = inward_substitute(cd, xhat, Aplus, res.k, rho);
    if (!inward.feasible) {
        res.feasible = false;
        res.failure = inward.message;
        return res;
    }
    double mu_used = inward.mu_total;

    auto fil = filippov_correct(cd.Q, inward.y);
    res.x = fil.x;
    record_margins(res.x);
    check_interior(res.x);

    double step = 0;
    for (size_t i = 0; i + 1 < xhat.times.size(); ++i)
        step = std::max(step, xhat.times[i + 1] - xhat.times[i]);
    double slack = opts.step_slack_factor * step;

    // (stima_y_1'): ||xhat - y||_{W11,[t0,t]} <= 2 M mu(A+ ∩ [t0, tau ^ t]).
    {
        double lhs = w11_distance(xhat, inward.y);
        double rhs = 2.0 * res.M_eff * mu_used;
        res.est_substitution = {lhs, rhs, lhs <= rhs + 1e-9};
        double acc_mu = 0;
        for (size_t i = 0; i + 1 < inward.y.times.size() && res.est_substitution.ok; ++i) {
            if (inward.substituted[i]) acc_mu += inward.y.times[i + 1] - inward.y.times[i];
            double t = inward.y.times[i + 1];
            double l = w11_distance(xhat, inward.y, t);
            if (l > 2.0 * res.M_eff * acc_mu + 1e-9) res.est_substitution.ok = false;
        }
    }

    // (stima_d_F'): int dist(y', Q(s,y)) <= 2 theta_phi M mu + step slack.
    {
        double lhs = fil.defect_integral;
        double rhs = 2.0 * res.theta_phi * res.M_eff * mu_used + slack;
        res.est_defect = {lhs, rhs, lhs <= rhs + 1e-9};
    }

    // (stima_xi_chiave'): every sampled normal keeps
    // int_{[t0,tau] off A+} <n, xhat'> + int_{A+} <n, w> <= -r mu.
    {
        std::vector<Vec> pool;
        for (size_t i = 0; i + 1 < inward.y.times.size(); ++i) {
            if (!inward.substituted[i]) continue;
            double s = 0.5 * (inward.y.times[i] + inward.y.times[i + 1]);
            for (const auto& n : normals_near(cd, inward.y.state_at(s))) pool.push_back(n);
        }
        double worst = -kInf;
        for (const auto& n : pool) {
            double acc = 0;
            for (size_t i = 0; i + 1 < inward.y.times.size(); ++i) {
                double a = inward.y.times[i], b = inward.y.times[i + 1];
                if (a >= inward.tau - 1e-15) break;
                acc += (b - a) * dot(n, inward.y.velocity(i));
            }
            worst = std::max(worst, acc);
        }
        double rhs = -cd.r * mu_used;
        bool ok = pool.empty() || worst <= rhs + opts.inward_tol + slack;
        res.est_inward = {worst, rhs, ok};
    }

    // Final linear estimate: sup |xhat - x| <= ||xhat - x||_W11 <= beta rho.
    {
        double sup_gap = sup_distance(xhat, res.x);
        double w11_gap = w11_distance(xhat, res.x);
        double rhs = res.beta * rho + slack;
        res.est_final = {w11_gap, rhs, sup_gap <= w11_gap + 1e-9 && w11_gap <= rhs};
    }
    return res;
}

}  // namespace hjbv
