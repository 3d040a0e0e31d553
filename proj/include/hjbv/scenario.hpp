#pragma once

#include "hjbv/hjb.hpp"
#include "hjbv/nft.hpp"

#include <json.hpp>

namespace hjbv {

/// Scenario configuration (JSON with `"spec": 1`): names a model or data
/// files, a pipeline, grids, tolerances, a seed and output paths.
struct Scenario {
    std::string name;
    std::string pipeline;  // conjugate | represent | value | check-hjb | nft |
                           // viability | lbv | compare
    std::string model;     // registry name or grid:<path>
    unsigned seed = 42;
    nlohmann::json raw;    // the full validated document
    std::string base_dir;  // directory the scenario file came from

    static Scenario load_file(const std::string& path);
    static Scenario parse(const nlohmann::json& doc, const std::string& base_dir);
};

struct RunResult {
    int exit_code = 0;  // 0 pass, 1 invariant failure, 2 validation failure
    nlohmann::json report;       // deterministic (timings kept separate)
    nlohmann::json timings;
    std::vector<std::string> artifacts;  // files written
};

/// Execute the scenario pipeline; writes <out_dir>/report.json,
/// <out_dir>/timings.json and the pipeline's artifacts. Identical inputs and
/// seed produce byte-identical reports.
RunResult run_scenario(const Scenario& scenario, const std::string& out_dir);

/// Structural validation of a report document against the published schema
/// (docs/report.schema.json mirrors these rules).
bool validate_report(const nlohmann::json& report, std::string* error = nullptr);

/// Plot-ready long-format CSV tables from a report or a gridfn field:
///  - value fields -> (t,x,value) rows;
///  - nft reports  -> (t,margin) rows;
///  - lbv reports  -> (depth,variation) rows.
std::vector<std::string> emit_plot_tables(const std::string& input_path,
                                          const std::string& out_dir);

}  // namespace hjbv
