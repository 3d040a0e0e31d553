#include "hjbv/inclusion.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>

namespace hjbv {

void Trajectory::validate() const {
    if (times.size() < 2 || times.size() != states.size())
        throw std::invalid_argument("trajectory: needs >= 2 matching nodes");
    for (size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument("trajectory: times must be strictly increasing");
}

Vec Trajectory::velocity(size_t interval) const {
    double dt = times[interval + 1] - times[interval];
    return scale(sub(states[interval + 1], states[interval]), 1.0 / dt);
}

Vec Trajectory::state_at(double t) const {
    if (t <= times.front()) return states.front();
    if (t >= times.back()) return states.back();
    auto it = std::upper_bound(times.begin(), times.end(), t);
    size_t i = static_cast<size_t>(it - times.begin()) - 1;
    double lam = (t - times[i]) / (times[i + 1] - times[i]);
    return axpy(states[i], lam, sub(states[i + 1], states[i]));
}

double Trajectory::w11_norm(double up_to) const {
    double s = norm(states.front());
    for (size_t i = 0; i + 1 < times.size(); ++i) {
        if (times[i] >= up_to) break;
        double clipped = std::min(times[i + 1], up_to);
        double frac = (clipped - times[i]) / (times[i + 1] - times[i]);
        s += frac * dist(states[i + 1], states[i]);
    }
    return s;
}

void Trajectory::save_csv(std::ostream& os) const {
    os << "t";
    for (int a = 0; a < dim(); ++a) os << ",x" << (a + 1);
    os << '\n' << std::setprecision(17);
    for (size_t i = 0; i < times.size(); ++i) {
        os << times[i];
        for (double c : states[i]) os << ',' << c;
        os << '\n';
    }
}

void Trajectory::save_csv_file(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("trajectory: cannot write " + path);
    save_csv(os);
}

Trajectory Trajectory::load_csv(std::istream& is) {
    Trajectory tr;
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("trajectory: empty csv");
    // header `t,x1,...`
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::getline(ls, cell, ',');
        tr.times.push_back(std::stod(cell));
        Vec x;
        while (std::getline(ls, cell, ',')) x.push_back(std::stod(cell));
        tr.states.push_back(std::move(x));
    }
    tr.validate();
    return tr;
}

Trajectory Trajectory::load_csv_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("trajectory: cannot read " + path);
    return load_csv(is);
}

double w11_distance(const Trajectory& a, const Trajectory& b, double up_to) {
    std::set<double> grid(a.times.begin(), a.times.end());
    grid.insert(b.times.begin(), b.times.end());
    std::vector<double> ts;
    for (double t : grid)
        if (t <= up_to + 1e-15) ts.push_back(t);
    if (ts.size() < 2) return dist(a.state_at(ts.front()), b.state_at(ts.front()));
    double s = dist(a.state_at(ts.front()), b.state_at(ts.front()));
    Vec prev = sub(a.state_at(ts[0]), b.state_at(ts[0]));
    for (size_t i = 1; i < ts.size(); ++i) {
        Vec cur = sub(a.state_at(ts[i]), b.state_at(ts[i]));
        s += dist(cur, prev);
        prev = cur;
    }
    return s;
}

double sup_distance(const Trajectory& a, const Trajectory& b) {
    std::set<double> grid(a.times.begin(), a.times.end());
    grid.insert(b.times.begin(), b.times.end());
    double s = 0;
    for (double t : grid) s = std::max(s, dist(a.state_at(t), b.state_at(t)));
    return s;
}

void InclusionProblem::validate_body(double t, const Vec& x, double tol) const {
    ConvexBody B = body(t, x);
    if (B.empty()) throw std::domain_error("inclusion: empty velocity body");
    double cap = rho(t) * (1 + norm(x));
    for (const auto& v : B.vertices())
        if (norm(v) > cap + tol)
            throw std::domain_error("inclusion: velocity body violates the growth modulus");
}

Trajectory integrate_selection(const InclusionProblem& prob, double t0, const Vec& x0,
                               const std::function<Vec(double, const Vec&)>& selector,
                               double t1, const IntegrateOptions& opts) {
    double step = opts.step > 0 ? opts.step : std::min(1e-3, (t1 - t0) / 1000.0);
    Trajectory tr;
    tr.times.push_back(t0);
    tr.states.push_back(x0);
    Vec x = x0;
    double t = t0;
    while (t < t1 - 1e-12) {
        double h = std::min(step, t1 - t);
        ConvexBody B = prob.body(t, x);
        Vec want = selector(t, x);
        Vec v = B.project(want);
        if (dist(v, want) > opts.proj_tol_abs * (1 + norm(x)))
            throw std::domain_error("integrate_selection: selector leaves the velocity body");
        x = axpy(x, h, v);
        t += h;
        tr.times.push_back(t);
        tr.states.push_back(x);
    }
    return tr;
}

FilippovResult filippov_correct(const InclusionProblem& prob, const Trajectory& y) {
    y.validate();
    const double t0 = y.t0();

    // Radius for the Lipschitz modulus: run once to size it, then correct.
    double r = 1.0;
    for (const auto& s : y.states) r = std::max(r, norm(s) + 1.0);

    FilippovResult out;
    out.x.times = y.times;
    out.x.states.resize(y.states.size());
    out.x.states[0] = y.states[0];
    out.defect_integral = 0;
    out.phi_integral = 0;

    Vec x = y.states[0];
    for (size_t i = 0; i + 1 < y.times.size(); ++i) {
        double t = y.times[i];
        double h = y.times[i + 1] - y.times[i];
        Vec yv = y.velocity(i);
        ConvexBody Bx = prob.body(t, x);
        Vec v = Bx.project(yv);
        ConvexBody By = prob.body(t, y.states[i]);
        out.defect_integral += h * By.distance(yv);
        out.phi_integral += h * prob.lipschitz(t, r);
        x = axpy(x, h, v);
        out.x.states[i + 1] = x;
        r = std::max(r, norm(x) + 1.0);
    }
    out.bound = std::exp(out.phi_integral) * out.defect_integral;
    return out;
}

double GronwallEnvelope::operator()(double t) const {
    double dt = t - tau;
    if (std::fabs(alpha) < 1e-14) return psi0 + beta * dt;
    double e = std::exp(alpha * dt);
    return psi0 * e + beta * (e - 1.0) / alpha;
}

GronwallEnvelope gronwall_envelope(double psi0, double alpha_sup, double beta_sup, double tau,
                                   double T) {
    if (!(T > tau)) throw std::invalid_argument("gronwall_envelope: need T > tau");
    if (alpha_sup < 0) throw std::invalid_argument("gronwall_envelope: alpha must be >= 0");
    return GronwallEnvelope{psi0, alpha_sup, beta_sup, tau, T};
}

namespace {

// Contingent-direction feasibility at (t, y): some body velocity v with
// (1, v) inside the sampled graph cone, measured by the forward surrogate
// dist(y + h v, E(t+h)) / h evaluated at the next knot horizon.
double tangential_gap(const InclusionProblem& prob, const Tube& E, double t, const Vec& y,
                      double h) {
    double t_next = std::min(E.next_knot(t), E.t_max());
    if (t_next <= t + 1e-12) t_next = std::min(t + h, E.t_max());
    double horizon = std::max(t_next - t, 1e-9);
    ConvexBody B = prob.body(t, y);
    CompactSetRep slice = E.eval(t_next);
    double best = kInf;
    for (const auto& v : B.vertices())
        best = std::min(best, slice.distance(axpy(y, horizon, v)) / horizon);
    // Interior mixtures can do better than vertices when the body is fat.
    Vec pull = slice.project(y);
    Vec w = scale(sub(pull, y), 1.0 / horizon);
    best = std::min(best, slice.distance(axpy(y, horizon, B.project(w))) / horizon);
    return best;
}

}  // namespace

ViabilityResult viable_trajectory(const InclusionProblem& prob, const Tube& E, double t0,
                                  const Vec& x0, double t1,
                                  const std::vector<double>& node_times,
                                  const ViabilityOptions& opts) {
    ViabilityResult res;
    std::vector<double> nodes{t0};
    for (double t : node_times)
        if (t > t0 + 1e-12 && t < t1 - 1e-12) nodes.push_back(t);
    nodes.push_back(t1);
    std::sort(nodes.begin(), nodes.end());

    if (E.eval(t0).distance(x0) > opts.viab_tol)
        throw std::invalid_argument("viable_trajectory: x0 not on E(t0)");

    // Tangential precondition at sampled (t, y in E(t)).
    if (opts.check_tangential) {
        for (double t : nodes) {
            if (t >= t1 - 1e-12) break;
            auto slice = E.eval(t);
            const auto& cloud = slice.sample_points();
            size_t stride = std::max<size_t>(1, cloud.size() / opts.tangential_samples);
            double horizon = std::max(E.next_knot(t) - t, opts.substep);
            for (size_t i = 0; i < cloud.size(); i += stride) {
                double gap = tangential_gap(prob, E, t, cloud[i], opts.substep);
                if (gap > opts.tang_tol * (1 + norm(cloud[i])) + opts.tang_slack * horizon +
                              2 * E.eval(t).metric_accuracy()) {
                    res.status = ViabilityResult::Status::TangentialViolation;
                    res.witness_t = t;
                    res.witness_y = cloud[i];
                    std::ostringstream msg;
                    msg << "tangential condition violated at t=" << t << " (gap " << gap << ")";
                    res.message = msg.str();
                    return res;
                }
            }
        }
    }

    Trajectory tr;
    tr.times.push_back(t0);
    tr.states.push_back(x0);
    Vec x = x0;

    for (size_t k = 0; k + 1 < nodes.size(); ++k) {
        double segment_end = nodes[k + 1];
        double t = nodes[k];
        while (t < segment_end - 1e-12) {
            // Steer with the Phi-velocity closest to the tube's contingent
            // direction: aim at the next knot slice over its horizon.
            double t_next = std::min(E.next_knot(t), segment_end);
            if (t_next <= t + 1e-12) t_next = segment_end;
            double horizon = t_next - t;
            double h = std::min({opts.substep, segment_end - t, horizon});
            CompactSetRep target = E.eval(t_next);
            Vec pull = target.project(x);
            Vec want = scale(sub(pull, x), 1.0 / horizon);
            Vec v = prob.body(t, x).project(want);
            x = axpy(x, h, v);
            t += h;
            tr.times.push_back(t);
            tr.states.push_back(x);
        }
        // Node projection with jump budget.
        CompactSetRep node_set = E.eval(segment_end);
        double d = node_set.distance(x);
        res.max_node_distance = std::max(res.max_node_distance, d);
        Vec projected = node_set.project(x);
        double jump = dist(projected, x);
        res.node_jumps.push_back(jump);
        res.jump_total += jump;
        if (jump > opts.jump_tol) {
            res.status = ViabilityResult::Status::JumpTooLarge;
            res.witness_t = segment_end;
            res.witness_y = x;
            std::ostringstream msg;
            msg << "projection jump " << jump << " at node t=" << segment_end
                << " exceeds jump_tol (tube too coarse)";
            res.message = msg.str();
            res.x = tr;
            return res;
        }
        x = projected;
        tr.states.back() = x;
    }
    res.x = std::move(tr);
    return res;
}

CompactSetRep reachable_sample(const InclusionProblem& prob, double t0, const Vec& x0, double s,
                               int n_selectors, unsigned seed, const IntegrateOptions& opts) {
    if (s < t0) throw std::invalid_argument("reachable_sample: s must be >= t0");
    std::vector<Vec> endpoints;
    if (s == t0) return CompactSetRep::hull({x0});
    int base_vertices = static_cast<int>(prob.body(t0, x0).vertices().size());
    for (int i = 0; i < n_selectors; ++i) {
        std::function<Vec(double, const Vec&)> selector;
        if (i < base_vertices) {
            int idx = i;
            selector = [&prob, idx](double t, const Vec& x) {
                ConvexBody B = prob.body(t, x);
                const auto& vs = B.vertices();
                return vs[idx % vs.size()];
            };
        } else {
            // Seeded random convex mixture, fixed per trajectory.
            std::mt19937 rng(seed + static_cast<unsigned>(i));
            std::uniform_real_distribution<double> U(0, 1);
            std::vector<double> w(static_cast<size_t>(base_vertices));
            double tot = 0;
            for (auto& c : w) {
                c = U(rng);
                tot += c;
            }
            for (auto& c : w) c /= tot;
            selector = [&prob, w](double t, const Vec& x) {
                ConvexBody B = prob.body(t, x);
                const auto& vs = B.vertices();
                double tot = 0;
                for (size_t j = 0; j < vs.size(); ++j) tot += w[j % w.size()];
                Vec v(x.size(), 0.0);
                for (size_t j = 0; j < vs.size(); ++j)
                    v = axpy(v, w[j % w.size()] / tot, vs[j]);
                return v;
            };
        }
        Trajectory tr = integrate_selection(prob, t0, x0, selector, s, opts);
        endpoints.push_back(tr.states.back());
    }
    return CompactSetRep::hull(std::move(endpoints));
}

}  // namespace hjbv
