#include "hjbv/scenario.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

namespace hjbv {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void fail_validation(const std::string& what) {
    throw std::invalid_argument("scenario: " + what);
}

std::string resolve(const Scenario& sc, const std::string& path) {
    fs::path p(path);
    if (p.is_absolute()) return path;
    return (fs::path(sc.base_dir) / p).string();
}

CompactSetRep parse_set(const Scenario& sc, const json& spec) {
    if (spec.contains("file")) {
        std::string p = resolve(sc, spec.at("file").get<std::string>());
        if (!fs::exists(p)) fail_validation("referenced file does not exist: " + p);
        return CompactSetRep::load_file(p);
    }
    if (spec.contains("lo") && spec.contains("hi")) {
        Vec lo = spec.at("lo").get<Vec>();
        Vec hi = spec.at("hi").get<Vec>();
        if (lo.size() != hi.size() || lo.empty()) fail_validation("bad box in set spec");
        if (lo.size() == 1) return CompactSetRep::hull({{lo[0]}, {hi[0]}});
        if (lo.size() == 2)
            return CompactSetRep::hull(
                {{lo[0], lo[1]}, {hi[0], lo[1]}, {hi[0], hi[1]}, {lo[0], hi[1]}});
        fail_validation("box sets supported in dimensions 1 and 2");
    }
    fail_validation("set spec needs either file or lo/hi");
}

double tol_of(const Scenario& sc, const std::string& key, double fallback) {
    if (sc.raw.contains("tolerances") && sc.raw.at("tolerances").contains(key)) {
        double v = sc.raw.at("tolerances").at(key).get<double>();
        if (!(v > 0)) fail_validation("tolerance " + key + " must be positive");
        return v;
    }
    return fallback;
}

json grids_of(const Scenario& sc) {
    return sc.raw.contains("grids") ? sc.raw.at("grids") : json::object();
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                         start)
            .count();
    }
};

// ---- pipelines -----------------------------------------------------------

void run_conjugate(const Scenario& sc, const std::string& out_dir, RunResult& out) {
    const json& in = sc.raw.at("inputs");
    GridFunction f = GridFunction::load_file(resolve(sc, in.at("f").get<std::string>()));
    json g = grids_of(sc);
    Box dual = default_dual_box(f);
    if (g.contains("dual_lo")) {
        dual.lo = g.at("dual_lo").get<Vec>();
        dual.hi = g.at("dual_hi").get<Vec>();
    }
    std::vector<int> res(f.dim, g.value("dual_res", 401));
    auto fs_ = conjugate(f, dual, res);
    std::string path = (fs::path(out_dir) / "conjugate.gridfn").string();
    fs_.save_file(path);
    out.artifacts.push_back(path);
    out.report["metrics"]["min"] = fs_.min_finite();
    out.report["metrics"]["max"] = fs_.max_finite();
    out.report["pass"] = true;
}

void run_represent(const Scenario& sc, const std::string& out_dir, RunResult& out) {
    (void)out_dir;
    auto model = model_registry(sc.model);
    RepresentationOptions ro;
    ro.theta_count = grids_of(sc).value("theta_count", 256);
    ro.rep_tol = tol_of(sc, "rep_tol", 1e-6);
    auto rep = build_representation(model, ro);
    auto report = verify_identity(rep, model, default_verify_plan(model.n));
    out.report["metrics"]["max_error"] = report.max_error;
    out.report["metrics"]["max_normalized_error"] = report.max_normalized_error;
    out.report["metrics"]["theta_mesh"] = rep.theta_mesh();
    if (!report.witness.empty()) out.report["witnesses"].push_back(report.witness);
    out.report["pass"] = report.max_normalized_error <= ro.rep_tol;
}

void run_value(const Scenario& sc, const std::string& out_dir, RunResult& out) {
    auto omega = parse_set(sc, sc.raw.at("omega"));
    double vanish_tol = tol_of(sc, "vanish_tol", 1e-3);
    auto cp = make_control_problem(sc.model, omega, vanish_tol,
                                   grids_of(sc).value("theta_count", 256));
    json g = grids_of(sc);
    if (g.value("t_max", 0.0) > 0) cp.T_max = g.at("t_max").get<double>();
    DpOptions opts;
    opts.t_res = g.value("t_res", 451);
    opts.x_res = g.value("x_res", 161);
    auto V = value_function(cp, opts);
    auto vc = V.vanish_check(vanish_tol);

    std::string path = (fs::path(out_dir) / "value.gridfn").string();
    V.save_file(path);
    out.artifacts.push_back(path);

    // one-step recursion consistency probe (DP_tol metric)
    double dp_tol = 0;
    {
        double dt = V.dt();
        Box bb = omega.bounding_box();
        for (double t : linspace(0.5, cp.T_max * 0.7, 4))
            for (double x : linspace(bb.lo[0] * 0.75, bb.hi[0] * 0.75, 5)) {
                double best = kInf;
                const auto& di = cp.rep.domain_info(t, {x});
                for (double tv : linspace(-1.0, 1.0, 65)) {
                    Vec f = di.body.project({di.center[0] + di.radius * tv});
                    double xn = x + dt * f[0];
                    if (!omega.member({xn}, 1e-9)) continue;
                    double vn = V.at(t + dt, {xn});
                    if (!is_finite(vn)) continue;
                    best = std::min(best,
                                    dt * cp.rep.hstar_at(t + dt / 2, {x + dt * f[0] / 2}, f) + vn);
                }
                if (is_finite(best)) dp_tol = std::max(dp_tol, std::fabs(V.at(t, {x}) - best));
            }
    }
    out.report["metrics"]["dp_tol"] = dp_tol;
    out.report["metrics"]["t_star"] = vc.t_star;
    out.report["metrics"]["sup_at_tmax"] = vc.sup_at_tmax;
    out.report["metrics"]["t_max"] = cp.T_max;
    out.report["pass"] = vc.pass;
    if (!vc.pass) out.report["witnesses"].push_back("vanishing check failed");
}

void run_check_hjb(const Scenario& sc, const std::string& out_dir, RunResult& out) {
    (void)out_dir;
    auto u = ValueField::load_file(resolve(sc, sc.raw.at("inputs").at("u").get<std::string>()));
    auto omega = parse_set(sc, sc.raw.at("omega"));
    auto model = model_registry(sc.model);
    ResidualPlan plan;
    json g = grids_of(sc);
    plan.t_samples = g.value("residual_t_samples", 9);
    plan.x_samples = g.value("residual_x_samples", 13);
    auto rr = epigraphical_residual(u, model, omega, plan);
    double tol = tol_of(sc, "residual_tol", 3.0 * (u.dt() + u.dx()));
    out.report["metrics"]["interior_max"] = rr.interior_max_abs;
    out.report["metrics"]["boundary_min"] = rr.boundary_min;
    out.report["metrics"]["fd_max"] = rr.fd_max_abs;
    out.report["metrics"]["cone_fd_gap"] = rr.cone_fd_max_gap;
    out.report["metrics"]["C_reported"] = rr.C_reported;
    out.report["metrics"]["samples"] = rr.samples;
    // The checker reports its detected sign convention: the smooth-point
    // reduction -du/dt + H(t,x,-du/dx,1) anchors F(t,x,-phi).
    out.report["metrics"]["sign_convention"] = "-phi_t + H(t,x,-phi_x,-phi_z)";
    if (!rr.witness.empty()) out.report["witnesses"].push_back(rr.witness);
    out.report["pass"] = rr.pass(tol) && rr.boundary_min >= -tol;
}

void run_nft(const Scenario& sc, const std::string& out_dir, RunResult& out) {
    (void)out_dir;
    const json& in = sc.raw.at("inputs");
    json cspec;
    {
        std::ifstream is(resolve(sc, in.at("constraint").get<std::string>()));
        if (!is) fail_validation("cannot read constraint file");
        is >> cspec;
    }
    ConstraintData cd;
    cd.A = parse_set(sc, cspec.at("set"));
    cd.eta = cspec.at("eta").get<double>();
    cd.r = cspec.at("r").get<double>();
    cd.M = cspec.at("M").get<double>();
    double qv = cspec.value("q", 1.0);
    cd.q_bound = [qv](double) { return qv; };
    cd.q_integral = [qv](double a, double b) { return qv * (b - a); };
    Vec qlo = cspec.at("Q").at("lo").get<Vec>();
    Vec qhi = cspec.at("Q").at("hi").get<Vec>();
    cd.Q.dim = static_cast<int>(qlo.size());
    if (cd.Q.dim == 1) {
        double lo = qlo[0], hi = qhi[0];
        cd.Q.body = [lo, hi](double, const Vec&) { return ConvexBody({{lo}, {hi}}); };
    } else {
        cd.Q.body = [qlo, qhi](double, const Vec&) {
            return ConvexBody({{qlo[0], qlo[1]},
                               {qhi[0], qlo[1]},
                               {qhi[0], qhi[1]},
                               {qlo[0], qhi[1]}});
        };
    }
    double qmax = std::max(norm(qlo), norm(qhi));
    cd.Q.rho = [qmax](double) { return qmax; };
    cd.Q.rho_integral = [qmax](double a, double b) { return qmax * (b - a); };
    cd.Q.lipschitz = [](double, double) { return 0.0; };

    auto xhat = Trajectory::load_csv_file(resolve(sc, in.at("traj").get<std::string>()));
    double rho = sc.raw.at("nft").at("rho").get<double>();
    auto res = neighboring_feasible(cd, xhat, rho, xhat.t1() - xhat.t0());

    out.report["metrics"]["beta"] = res.beta;
    out.report["metrics"]["Delta"] = res.Delta;
    out.report["metrics"]["k"] = res.k;
    out.report["metrics"]["theta_phi"] = res.theta_phi;
    out.report["metrics"]["mu_Aplus"] = res.mu_Aplus;
    out.report["metrics"]["early_exit"] = res.early_exit;
    out.report["metrics"]["delta_within_window"] = res.delta_within_window;
    json margins = json::array();
    for (size_t i = 0; i < res.margin_times.size(); ++i)
        margins.push_back({{"t", res.margin_times[i]}, {"margin", res.interior_margin[i]}});
    out.report["metrics"]["margins"] = margins;
    json est;
    auto pack = [](const NftEstimate& e) {
        return json{{"lhs", e.lhs}, {"rhs", e.rhs}, {"pass", e.ok}};
    };
    est["substitution"] = pack(res.est_substitution);
    est["defect"] = pack(res.est_defect);
    est["inward"] = pack(res.est_inward);
    est["final"] = pack(res.est_final);
    out.report["metrics"]["estimates"] = est;
    if (!res.failure.empty()) out.report["witnesses"].push_back(res.failure);
    out.report["pass"] = res.pass();
}

void run_viability(const Scenario& sc, const std::string& out_dir, RunResult& out) {
    (void)out_dir;
    const json& in = sc.raw.at("inputs");
    Tube tube = Tube::load_file(resolve(sc, in.at("tube").get<std::string>()));
    const json& vspec = sc.raw.at("viability");
    Vec qlo = vspec.at("body_lo").get<Vec>();
    Vec qhi = vspec.at("body_hi").get<Vec>();
    InclusionProblem prob;
    prob.dim = static_cast<int>(qlo.size());
    if (prob.dim == 1) {
        double lo = qlo[0], hi = qhi[0];
        prob.body = [lo, hi](double, const Vec&) { return ConvexBody({{lo}, {hi}}); };
    } else {
        prob.body = [qlo, qhi](double, const Vec&) {
            return ConvexBody({{qlo[0], qlo[1]},
                               {qhi[0], qlo[1]},
                               {qhi[0], qhi[1]},
                               {qlo[0], qhi[1]}});
        };
    }
    double qmax = std::max(norm(qlo), norm(qhi));
    prob.rho = [qmax](double) { return qmax; };
    prob.rho_integral = [qmax](double a, double b) { return qmax * (b - a); };
    prob.lipschitz = [](double, double) { return 0.0; };

    Vec x0 = vspec.at("x0").get<Vec>();
    double t0 = vspec.value("t0", tube.t_min());
    double t1 = vspec.value("t1", tube.t_max());
    ViabilityOptions vo;
    vo.viab_tol = tol_of(sc, "viab_tol", 1e-2);
    vo.tang_tol = tol_of(sc, "tang_tol", 1e-3);
    vo.substep = grids_of(sc).value("step", 1e-3);
    auto nodes = linspace(t0, t1, vspec.value("nodes", 11));
    auto res = viable_trajectory(prob, tube, t0, x0, t1, nodes, vo);
    out.report["metrics"]["max_node_distance"] = res.max_node_distance;
    out.report["metrics"]["jump_total"] = res.jump_total;
    out.report["metrics"]["status_ok"] = res.ok();
    if (!res.message.empty()) out.report["witnesses"].push_back(res.message);
    out.report["pass"] = res.ok() && res.max_node_distance <= vo.viab_tol;
}

void run_lbv(const Scenario& sc, const std::string& out_dir, RunResult& out) {
    (void)out_dir;
    const json& in = sc.raw.at("inputs");
    Tube tube = Tube::load_file(resolve(sc, in.at("tube").get<std::string>()));
    const json& lspec = sc.raw.contains("lbv") ? sc.raw.at("lbv") : json::object();
    double a = lspec.value("a", tube.t_min());
    double b = lspec.value("b", tube.t_max());
    int depth = lspec.value("depth", 6);
    Box K = tube.default_compact();
    auto curve = lbv_refinement_curve(tube, a, b, K, depth);
    json jcurve = json::array();
    for (auto& [d, v] : curve) jcurve.push_back({{"depth", d}, {"variation", v}});
    out.report["metrics"]["curve"] = jcurve;
    out.report["metrics"]["variation"] = curve.back().second;
    bool monotone = true;
    for (size_t i = 1; i < curve.size(); ++i)
        if (curve[i].second < curve[i - 1].second - 1e-12) monotone = false;
    out.report["metrics"]["monotone"] = monotone;
    out.report["pass"] = monotone;
}

void run_compare(const Scenario& sc, const std::string& out_dir, RunResult& out) {
    (void)out_dir;
    const json& in = sc.raw.at("inputs");
    auto low = ValueField::load_file(resolve(sc, in.at("low").get<std::string>()));
    auto high = ValueField::load_file(resolve(sc, in.at("high").get<std::string>()));
    auto omega = parse_set(sc, sc.raw.at("omega"));
    auto cp = make_control_problem(sc.model, omega, tol_of(sc, "vanish_tol", 1e-3));
    cp.T_max = low.t_max();
    ComparisonOptions copts;
    copts.comparison_tol = tol_of(sc, "comparison_tol", 2e-2);
    auto rep = comparison_experiment(low, high, cp, copts);
    out.report["metrics"]["preconditions_ok"] = rep.preconditions_ok;
    out.report["metrics"]["max_gap"] = rep.max_gap;
    out.report["metrics"]["legA"] = rep.A.pass;
    out.report["metrics"]["legB"] = rep.B.pass;
    out.report["metrics"]["legC"] = rep.C.pass;
    if (!rep.abort_reason.empty()) out.report["witnesses"].push_back(rep.abort_reason);
    for (const auto* leg : {&rep.A, &rep.B, &rep.C})
        if (!leg->note.empty()) out.report["witnesses"].push_back(leg->note);
    out.report["pass"] = rep.pass();
}

}  // namespace

Scenario Scenario::parse(const json& doc, const std::string& base_dir) {
    Scenario sc;
    sc.base_dir = base_dir;
    if (!doc.is_object()) fail_validation("document must be a JSON object");
    if (doc.value("spec", 0) != 1) fail_validation("missing or unsupported field: spec");
    if (!doc.contains("pipeline")) fail_validation("missing field: pipeline");
    if (!doc.contains("name")) fail_validation("missing field: name");
    sc.name = doc.at("name").get<std::string>();
    sc.pipeline = doc.at("pipeline").get<std::string>();
    sc.model = doc.value("model", "");
    sc.seed = doc.value("seed", 42u);
    sc.raw = doc;
    static const std::vector<std::string> known = {"conjugate", "represent", "value",
                                                   "check-hjb", "nft",       "viability",
                                                   "lbv",       "compare"};
    if (std::find(known.begin(), known.end(), sc.pipeline) == known.end())
        fail_validation("unknown pipeline: " + sc.pipeline);
    // referenced files must exist at load
    if (doc.contains("inputs"))
        for (auto& [k, v] : doc.at("inputs").items()) {
            (void)k;
            if (v.is_string()) {
                fs::path p(v.get<std::string>());
                if (!p.is_absolute()) p = fs::path(base_dir) / p;
                if (!fs::exists(p)) fail_validation("referenced file does not exist: " + p.string());
            }
        }
    return sc;
}

Scenario Scenario::load_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) fail_validation("cannot read scenario file " + path);
    json doc;
    try {
        is >> doc;
    } catch (const std::exception& e) {
        fail_validation(std::string("bad JSON: ") + e.what());
    }
    return parse(doc, fs::path(path).parent_path().string());
}

RunResult run_scenario(const Scenario& sc, const std::string& out_dir) {
    fs::create_directories(out_dir);
    RunResult out;
    out.report["scenario"] = sc.name;
    out.report["pipeline"] = sc.pipeline;
    out.report["seed"] = sc.seed;
    out.report["witnesses"] = json::array();
    out.report["metrics"] = json::object();

    Timer timer;
    try {
        if (sc.pipeline == "conjugate") run_conjugate(sc, out_dir, out);
        else if (sc.pipeline == "represent") run_represent(sc, out_dir, out);
        else if (sc.pipeline == "value") run_value(sc, out_dir, out);
        else if (sc.pipeline == "check-hjb") run_check_hjb(sc, out_dir, out);
        else if (sc.pipeline == "nft") run_nft(sc, out_dir, out);
        else if (sc.pipeline == "viability") run_viability(sc, out_dir, out);
        else if (sc.pipeline == "lbv") run_lbv(sc, out_dir, out);
        else if (sc.pipeline == "compare") run_compare(sc, out_dir, out);
    } catch (const std::invalid_argument& e) {
        out.exit_code = 2;
        out.report["pass"] = false;
        out.report["witnesses"].push_back(e.what());
    } catch (const std::exception& e) {
        out.exit_code = 1;
        out.report["pass"] = false;
        out.report["witnesses"].push_back(e.what());
    }
    out.timings["total_ms"] = timer.ms();

    if (out.exit_code == 0 && !out.report.value("pass", false)) out.exit_code = 1;

    std::string rpath = (fs::path(out_dir) / "report.json").string();
    std::ofstream rs(rpath);
    rs << out.report.dump(2) << '\n';
    out.artifacts.push_back(rpath);
    std::string tpath = (fs::path(out_dir) / "timings.json").string();
    std::ofstream ts(tpath);
    ts << out.timings.dump(2) << '\n';
    return out;
}

bool validate_report(const json& report, std::string* error) {
    auto err = [&](const std::string& m) {
        if (error) *error = m;
        return false;
    };
    if (!report.is_object()) return err("report must be an object");
    for (const char* key : {"scenario", "pipeline", "pass", "metrics", "witnesses"})
        if (!report.contains(key)) return err(std::string("missing key: ") + key);
    if (!report.at("scenario").is_string()) return err("scenario must be a string");
    if (!report.at("pipeline").is_string()) return err("pipeline must be a string");
    if (!report.at("pass").is_boolean()) return err("pass must be a boolean");
    if (!report.at("metrics").is_object()) return err("metrics must be an object");
    if (!report.at("witnesses").is_array()) return err("witnesses must be an array");
    return true;
}

std::vector<std::string> emit_plot_tables(const std::string& input_path,
                                          const std::string& out_dir) {
    fs::create_directories(out_dir);
    std::vector<std::string> written;
    fs::path in(input_path);
    if (in.extension() == ".json") {
        json doc;
        std::ifstream is(input_path);
        if (!is) throw std::invalid_argument("plot-tables: cannot read " + input_path);
        is >> doc;
        if (doc.contains("metrics") && doc.at("metrics").contains("margins")) {
            std::string p = (fs::path(out_dir) / "margins.csv").string();
            std::ofstream os(p);
            os << "t,margin\n";
            for (const auto& row : doc.at("metrics").at("margins"))
                os << row.at("t").get<double>() << ',' << row.at("margin").get<double>() << '\n';
            written.push_back(p);
            return written;
        }
        if (doc.contains("metrics") && doc.at("metrics").contains("curve")) {
            std::string p = (fs::path(out_dir) / "lbv_curve.csv").string();
            std::ofstream os(p);
            os << "depth,variation\n";
            for (const auto& row : doc.at("metrics").at("curve"))
                os << row.at("depth").get<int>() << ',' << row.at("variation").get<double>()
                   << '\n';
            written.push_back(p);
            return written;
        }
        throw std::invalid_argument("plot-tables: unrecognized report kind");
    }
    // gridfn field -> long-format (t, x, value)
    GridFunction g = GridFunction::load_file(input_path);
    if (g.dim != 2) throw std::invalid_argument("plot-tables: expected a (t,x) field");
    std::string p = (fs::path(out_dir) / "value_table.csv").string();
    std::ofstream os(p);
    os << "t,x,value\n";
    for (size_t f = 0; f < g.node_count(); ++f) {
        Vec pt = g.node_point(f);
        os << pt[0] << ',' << pt[1] << ',';
        if (is_finite(g.values[f])) os << g.values[f];
        else os << "inf";
        os << '\n';
    }
    written.push_back(p);
    return written;
}

}  // namespace hjbv
