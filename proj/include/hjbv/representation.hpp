#pragma once

#include "hjbv/fenchel.hpp"

#include <map>
#include <mutex>

namespace hjbv {

struct RepresentationOptions {
    int theta_count = 256;       // ball-lattice size in R^{n+1}
    double rep_tol = 1e-6;       // sup-identity tolerance
    // grid-route conjugation boxes (used when the model has no analytic channel)
    Box p_box{};
    Box v_box{};
    int v_res = 241;
    double domain_threshold = 1e12;
};

/// Parametrization (f, L) of H over theta in B^{n+1}:
///   theta = (theta_v, theta_c), theta_v in R^n, theta_c in R;
///   f(t,x,theta)    = projection of c(t,x) + R(t,x)*theta_v onto dom H*(t,x,.,1);
///   canonical cost  = H*(t,x,f(t,x,theta),1);
///   blended cost    = canonical + max(0,theta_c)*(cap(t,x) - canonical),
/// with cap(t,x) = sigma_hat(t)(1+|x|). The blend may be negative; nothing
/// forces nonnegative running costs.
class Representation {
public:
    Representation() = default;
    Representation(HamiltonianModel model, RepresentationOptions opts);

    int n() const { return model_.n; }
    const HamiltonianModel& model() const { return model_; }
    const RepresentationOptions& options() const { return opts_; }

    struct DomainInfo {
        ConvexBody body;
        Vec center;
        double radius = 0;
        // grid-route H* slice (empty when the analytic channel is used)
        std::shared_ptr<const GridFunction> hstar_grid;
        bool unbounded = false;
    };

    /// Per-(t,x) domain data; memoized behind a mutex, read-only afterwards.
    const DomainInfo& domain_info(double t, const Vec& x) const;

    /// Memo-free variant for single-visit sweeps (DP slices).
    DomainInfo domain_info_value(double t, const Vec& x) const;

    Vec velocity(double t, const Vec& x, const Vec& theta) const;         // f
    double cost_canonical(double t, const Vec& x, const Vec& theta) const;  // script-L
    double cost(double t, const Vec& x, const Vec& theta) const;            // frak-L
    double cap(double t, const Vec& x) const;  // sigma_hat(t)(1+|x|)

    double hstar_at(double t, const Vec& x, const Vec& v) const;  // H*(t,x,v,1)

    const std::vector<Vec>& theta_samples() const { return thetas_; }
    double theta_mesh() const { return theta_mesh_; }

private:
    HamiltonianModel model_;
    RepresentationOptions opts_;
    std::vector<Vec> thetas_;
    double theta_mesh_ = 0;

    // Copies share the cache; entries are immutable once inserted.
    struct Memo {
        std::mutex mtx;
        std::map<std::pair<double, Vec>, std::shared_ptr<const DomainInfo>> map;
        std::shared_ptr<const DomainInfo> constant_info;
    };
    std::shared_ptr<Memo> memo_ = std::make_shared<Memo>();
};

/// Construct the representation; convexity of H in p is mandatory (check_H1),
/// homogeneity is required for q-slices beyond q=1.
Representation build_representation(const HamiltonianModel& model,
                                    RepresentationOptions opts = {});

struct VerifyPlan {
    std::vector<double> t_samples{0.0, 0.5, 1.5};
    std::vector<Vec> x_samples;
    std::vector<Vec> p_samples;
    std::vector<double> q_samples{0.5, 1.0, 2.0};
};

VerifyPlan default_verify_plan(int n);

struct VerifyReport {
    double max_error = 0;            // raw |H - sup|
    double max_normalized_error = 0; // error / (1+|p|+q)
    std::string witness;
    double rep_tol = 1e-6;
    bool pass() const { return max_normalized_error <= rep_tol; }
};

/// Checks H(t,x,p,q) = sup_theta <(p,-q), (f,L)> over the theta sample.
VerifyReport verify_identity(const Representation& rep, const HamiltonianModel& model,
                             const VerifyPlan& plan);

/// The Lipschitz bound C(t,x1,x2,theta1,theta2,q) =
///   5(n+1)( sigma_X(t)|x1-x2| + |eta(t,x1)theta1 - eta(t,x2)theta2| )
/// with eta(t,x) = sigma_P(t)(1+|x|) + gamma(t,x) + |H(t,x,0,q)| and
/// gamma(t,x) = 0 v sup dom H*(t,x,.,q). Returns +inf when gamma is flagged
/// unbounded on the conjugate window.
double lipschitz_estimate(const Representation& rep, double t, const Vec& x1, const Vec& x2,
                          const Vec& theta1, const Vec& theta2, double q);

}  // namespace hjbv
