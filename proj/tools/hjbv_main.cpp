// Command-line front end: scenario runner plus direct pipeline entry points.
#include <CLI11.hpp>

#include "hjbv/scenario.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>

using namespace hjbv;
using nlohmann::json;

namespace {

int run_with_report(const json& doc, const std::string& base_dir, const std::string& out_dir,
                    long seed_override, bool verbose) {
    try {
        Scenario sc = Scenario::parse(doc, base_dir);
        if (seed_override >= 0) sc.seed = static_cast<unsigned>(seed_override);
        auto res = run_scenario(sc, out_dir);
        if (verbose) std::cout << res.report.dump(2) << '\n';
        else std::cout << (res.report.value("pass", false) ? "PASS" : "FAIL") << ' '
                       << sc.pipeline << " -> " << out_dir << "/report.json\n";
        return res.exit_code;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hjbv: epigraphical HJB toolkit"};
    app.require_subcommand(1);

    // run --scenario <file>
    std::string scenario_path, out_dir = ".";
    long seed = -1;
    bool verbose = false;
    auto* run = app.add_subcommand("run", "execute a scenario file");
    run->add_option("--scenario", scenario_path, "scenario JSON")->required();
    run->add_option("--out-dir", out_dir, "artifact directory");
    run->add_option("--seed", seed, "seed override");
    run->add_flag("--verbose", verbose, "print the full report");

    // represent --model <name> --check
    std::string model;
    bool check = false;
    std::string report_path;
    auto* rep = app.add_subcommand("represent", "build and verify a representation");
    rep->add_option("--model", model, "registry model")->required();
    rep->add_flag("--check", check, "run verify_identity");
    rep->add_option("--report", report_path, "write the report JSON here");

    // value --model <name> --omega <file|box> --tmax <T> --out <gridfn>
    std::string omega_spec, value_out = "value.gridfn";
    double tmax = 0;
    int t_res = 451, x_res = 161;
    auto* val = app.add_subcommand("value", "compute the value function");
    val->add_option("--model", model, "registry model")->required();
    val->add_option("--omega", omega_spec, "set file or lo,hi box")->required();
    val->add_option("--tmax", tmax, "horizon override");
    val->add_option("--t-res", t_res, "time resolution");
    val->add_option("--x-res", x_res, "state resolution");
    val->add_option("--out", value_out, "output gridfn");

    // check-hjb --u <gridfn> --model <name> --report <json>
    std::string u_path;
    auto* chk = app.add_subcommand("check-hjb", "epigraphical residual checker");
    chk->add_option("--u", u_path, "candidate field gridfn")->required();
    chk->add_option("--model", model, "registry model")->required();
    chk->add_option("--omega", omega_spec, "set file or lo,hi box")->required();
    chk->add_option("--report", report_path, "report JSON path")->required();

    // compare --low <gridfn> --high <gridfn> --report <json>
    std::string low_path, high_path;
    auto* cmp = app.add_subcommand("compare", "two-candidate comparison experiment");
    cmp->add_option("--low", low_path, "lower candidate gridfn")->required();
    cmp->add_option("--high", high_path, "upper candidate gridfn")->required();
    cmp->add_option("--model", model, "registry model")->required();
    cmp->add_option("--omega", omega_spec, "set file or lo,hi box")->required();
    cmp->add_option("--report", report_path, "report JSON path")->required();

    // nft --constraint <file> --traj <csv> --rho <r> --report <json>
    std::string constraint_path, traj_path;
    double rho = 0;
    auto* nft = app.add_subcommand("nft", "neighboring feasible trajectory run");
    nft->add_option("--constraint", constraint_path, "constraint JSON")->required();
    nft->add_option("--traj", traj_path, "trajectory CSV")->required();
    nft->add_option("--rho", rho, "distance budget rho")->required();
    nft->add_option("--report", report_path, "report JSON path")->required();

    // plot-tables --input <path> --out-dir <dir>
    std::string input_path;
    auto* plot = app.add_subcommand("plot-tables", "emit plot-ready CSV tables");
    plot->add_option("--input", input_path, "report JSON or gridfn field")->required();
    plot->add_option("--out-dir", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    auto omega_json = [&]() {
        json o;
        auto comma = omega_spec.find(',');
        if (comma != std::string::npos && omega_spec.find('.') != std::string::npos &&
            !std::ifstream(omega_spec).good()) {
            o["lo"] = json::array({std::stod(omega_spec.substr(0, comma))});
            o["hi"] = json::array({std::stod(omega_spec.substr(comma + 1))});
        } else if (!std::ifstream(omega_spec).good() && comma != std::string::npos) {
            o["lo"] = json::array({std::stod(omega_spec.substr(0, comma))});
            o["hi"] = json::array({std::stod(omega_spec.substr(comma + 1))});
        } else {
            o["file"] = omega_spec;
        }
        return o;
    };
    auto emit_to = [&](const json& doc) {
        std::string dir = report_path.empty()
                              ? out_dir
                              : std::filesystem::path(report_path).parent_path().string();
        if (dir.empty()) dir = ".";
        int code = run_with_report(doc, ".", dir, seed, verbose);
        if (!report_path.empty()) {
            std::error_code ec;
            std::filesystem::copy_file(std::filesystem::path(dir) / "report.json", report_path,
                                       std::filesystem::copy_options::overwrite_existing, ec);
        }
        return code;
    };

    if (*run) {
        try {
            Scenario sc = Scenario::load_file(scenario_path);
            if (seed >= 0) sc.seed = static_cast<unsigned>(seed);
            auto res = run_scenario(sc, out_dir);
            if (verbose) std::cout << res.report.dump(2) << '\n';
            else std::cout << (res.report.value("pass", false) ? "PASS" : "FAIL") << ' '
                           << sc.pipeline << " -> " << out_dir << "/report.json\n";
            return res.exit_code;
        } catch (const std::invalid_argument& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 2;
        }
    }
    if (*rep) {
        json doc{{"spec", 1}, {"name", "cli-represent"}, {"pipeline", "represent"},
                 {"model", model}};
        (void)check;  // verify_identity always runs in this pipeline
        return emit_to(doc);
    }
    if (*val) {
        json doc{{"spec", 1}, {"name", "cli-value"}, {"pipeline", "value"}, {"model", model}};
        doc["omega"] = omega_json();
        doc["grids"] = {{"t_res", t_res}, {"x_res", x_res}};
        if (tmax > 0) doc["grids"]["t_max"] = tmax;
        int code = run_with_report(doc, ".", out_dir, seed, verbose);
        std::error_code ec;
        std::filesystem::copy_file(std::filesystem::path(out_dir) / "value.gridfn", value_out,
                                   std::filesystem::copy_options::overwrite_existing, ec);
        return code;
    }
    if (*chk) {
        json doc{{"spec", 1}, {"name", "cli-check"}, {"pipeline", "check-hjb"},
                 {"model", model}};
        doc["omega"] = omega_json();
        doc["inputs"] = {{"u", u_path}};
        return emit_to(doc);
    }
    if (*cmp) {
        json doc{{"spec", 1}, {"name", "cli-compare"}, {"pipeline", "compare"},
                 {"model", model}};
        doc["omega"] = omega_json();
        doc["inputs"] = {{"low", low_path}, {"high", high_path}};
        return emit_to(doc);
    }
    if (*nft) {
        json doc{{"spec", 1}, {"name", "cli-nft"}, {"pipeline", "nft"}};
        doc["inputs"] = {{"constraint", constraint_path}, {"traj", traj_path}};
        doc["nft"] = {{"rho", rho}};
        return emit_to(doc);
    }
    if (*plot) {
        try {
            auto written = emit_plot_tables(input_path, out_dir);
            for (const auto& w : written) std::cout << w << '\n';
            return 0;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 2;  // unknown or unreadable input kind
        }
    }
    return 0;
}
