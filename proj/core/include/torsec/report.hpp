#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "torsec/config.hpp"
#include "torsec/covector.hpp"
#include "torsec/flow.hpp"
#include "torsec/transition_graph.hpp"

namespace torsec {

/// Everything one batch run needs. Defaults are the documented catalog
/// defaults; a config file and then CLI flags override them in that order.
struct RunConfig {
    FlowSpec flow = FlowSpec::builtin("constant");
    GridSpec grid{2, {64, 64, 1}};
    bool grid_explicit = false; // false: use the flow's catalog default
    BuildParams build;
    int refinement_levels = 3;
    std::vector<Covector> alphas;
    std::int64_t window = 3;
    std::vector<std::string> commands{"analyze"};
    int fan_order = 2; // `directions`: 2D Farey order of the covector fan

    // `extract`
    std::vector<std::int64_t> extract_labels;
    std::optional<double> extract_level;

    // `fried-sum`: alpha1 = alphas[0], alpha2 below
    std::optional<Covector> fried_alpha2;
    std::vector<std::int64_t> fried_labels1;
    std::vector<std::int64_t> fried_labels2;

    std::string report_path;     // empty = stdout
    std::string svg_dir;         // empty = no SVG output
    std::string emit_graph_path; // empty = no graph dump
};

struct RunOutcome {
    std::string report;            // deterministic JSON document
    bool had_analysis_error = false; // some alpha failed hard (see report)
};

/// Executes the configured commands and assembles the versioned JSON report.
/// Per-alpha precondition failures are recorded in the report without
/// aborting the other alphas; config problems raise ConfigError and resource
/// problems ResourceError.
RunOutcome run(const RunConfig& cfg);

/// Applies a parsed config document onto `cfg` (unknown keys are errors).
void apply_config_table(RunConfig& cfg, const ConfigTable& table);

/// Renders the builtin example catalog (the `examples` subcommand).
std::string examples_catalog_text();

} // namespace torsec
