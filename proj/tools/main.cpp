// torsec — discretize a torus flow into a homology-weighted transition graph
// and classify its partial cross-sections per cohomology direction.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "torsec/config.hpp"
#include "torsec/errors.hpp"
#include "torsec/report.hpp"

namespace {

using torsec::ConfigError;
using torsec::ConfigValue;

ConfigValue str_value(const std::string& s) {
    ConfigValue v;
    v.kind = ConfigValue::Kind::string;
    v.str = s;
    return v;
}

ConfigValue int_value(std::int64_t i) {
    ConfigValue v;
    v.kind = ConfigValue::Kind::integer;
    v.integer = i;
    return v;
}

ConfigValue real_value(double r) {
    ConfigValue v;
    v.kind = ConfigValue::Kind::real;
    v.real = r;
    return v;
}

ConfigValue int_array_value(const std::vector<std::int64_t>& xs) {
    ConfigValue v;
    v.kind = ConfigValue::Kind::array;
    for (auto x : xs) v.items.push_back(int_value(x));
    return v;
}

std::vector<std::int64_t> parse_int_list(const std::string& what, const std::string& text,
                                         char extra_sep = ',') {
    std::vector<std::int64_t> out;
    std::string cur;
    auto flush = [&] {
        if (cur.empty()) throw ConfigError(what + ": empty component in '" + text + "'");
        std::size_t pos = 0;
        std::int64_t val = 0;
        try {
            val = std::stoll(cur, &pos);
        } catch (const std::exception&) {
            throw ConfigError(what + ": '" + cur + "' is not an integer");
        }
        if (pos != cur.size()) throw ConfigError(what + ": '" + cur + "' is not an integer");
        out.push_back(val);
        cur.clear();
    };
    for (char ch : text) {
        if (ch == ',' || ch == extra_sep) {
            flush();
        } else if (!std::isspace(static_cast<unsigned char>(ch))) {
            cur += ch;
        }
    }
    flush();
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"classify partial cross-sections of a flow on a flat torus"};
    app.fallthrough(true);
    app.require_subcommand(0, 1);

    std::string config_path, flow_name, table_path, grid_text, epsilon_text;
    std::vector<std::string> param_texts, alpha_texts;
    double T = 0, level = 0;
    std::int64_t rk_steps = 0, samples = 0, threads = 0, max_cells = 0;
    std::int64_t refine = 0, window = 0, fan_order = 0;
    std::string labels_text, alpha2_text, labels1_text, labels2_text;
    std::string report_path, svg_dir, emit_graph;

    auto* opt_config = app.add_option("--config", config_path, "structured config file");
    auto* opt_flow = app.add_option("--flow", flow_name, "builtin flow name (see 'examples')");
    auto* opt_table =
        app.add_option("--table", table_path, "sampled vector-field table file (torsec-table v1)");
    auto* opt_param = app.add_option("--param", param_texts, "flow parameter override, name=value");
    auto* opt_grid = app.add_option("--grid", grid_text, "grid resolution, e.g. 64x64 or 24x24x24");
    auto* opt_alpha =
        app.add_option("--alpha", alpha_texts, "integer cohomology direction a,b or a,b,c");
    auto* opt_T = app.add_option("--T", T, "transition time step");
    auto* opt_eps = app.add_option("--epsilon", epsilon_text, "cell inflation radius, or 'auto'");
    auto* opt_rk = app.add_option("--rk-steps", rk_steps, "RK4 substeps per transition");
    auto* opt_samples = app.add_option("--samples-per-cell", samples, "sample points per cell axis");
    auto* opt_threads = app.add_option("--threads", threads, "worker threads");
    auto* opt_cap = app.add_option("--max-cells", max_cells, "cell-count resource cap");
    auto* opt_refine = app.add_option("--refine", refine, "refinement levels for shift trends");
    auto* opt_window = app.add_option("--window", window, "labeling enumeration window");
    auto* opt_fan = app.add_option("--fan-order", fan_order, "direction-fan order (2D)");
    auto* opt_labels = app.add_option("--labels", labels_text, "chain labels for extract, csv");
    auto* opt_level = app.add_option("--level", level, "potential level to cut at");
    auto* opt_alpha2 = app.add_option("--alpha2", alpha2_text, "second direction for fried-sum");
    auto* opt_labels1 = app.add_option("--labels1", labels1_text, "first fried-sum labeling, csv");
    auto* opt_labels2 = app.add_option("--labels2", labels2_text, "second fried-sum labeling, csv");
    auto* opt_report = app.add_option("--report", report_path, "write the report here (default stdout)");
    auto* opt_svg = app.add_option("--svg-dir", svg_dir, "directory for section SVG renderings");
    auto* opt_emit = app.add_option("--emit-graph", emit_graph, "dump the transition graph here");

    auto* cmd_analyze =
        app.add_subcommand("analyze", "existence, recurrence, cardinality and labelings per alpha");
    auto* cmd_directions =
        app.add_subcommand("directions", "quasi-Lyapunov flags and supports over a direction fan");
    auto* cmd_sections =
        app.add_subcommand("sections", "analyze plus one extracted section per feasible labeling");
    auto* cmd_extract =
        app.add_subcommand("extract", "cut one section from a labeling and level");
    auto* cmd_fried =
        app.add_subcommand("fried-sum", "restrict and add two sections; report feasibility");
    auto* cmd_examples = app.add_subcommand("examples", "list the builtin flows");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_examples->parsed()) {
            std::cout << torsec::examples_catalog_text();
            return 0;
        }

        torsec::RunConfig cfg;

        if (opt_config->count()) {
            torsec::ConfigTable table = torsec::parse_config_file(config_path);
            torsec::apply_config_table(cfg, table);
        }

        // Flags override the config file through the same key set.
        torsec::ConfigTable flags;
        if (opt_flow->count()) flags["flow.name"] = str_value(flow_name);
        if (opt_table->count()) flags["flow.table"] = str_value(table_path);
        for (const auto& p : param_texts) {
            auto eq = p.find('=');
            if (eq == std::string::npos || eq == 0)
                throw ConfigError("--param expects name=value, got '" + p + "'");
            double val = 0;
            std::size_t pos = 0;
            try {
                val = std::stod(p.substr(eq + 1), &pos);
            } catch (const std::exception&) {
                throw ConfigError("--param " + p + ": value is not a number");
            }
            if (pos != p.size() - eq - 1)
                throw ConfigError("--param " + p + ": value is not a number");
            flags["flow.params." + p.substr(0, eq)] = real_value(val);
        }
        if (opt_grid->count())
            flags["grid.resolution"] = int_array_value(parse_int_list("--grid", grid_text, 'x'));
        if (opt_T->count()) flags["build.T"] = real_value(T);
        if (opt_eps->count()) {
            if (epsilon_text == "auto") {
                flags["build.epsilon"] = str_value("auto");
            } else {
                std::size_t pos = 0;
                double e = 0;
                try {
                    e = std::stod(epsilon_text, &pos);
                } catch (const std::exception&) {
                    throw ConfigError("--epsilon expects a number or 'auto'");
                }
                if (pos != epsilon_text.size())
                    throw ConfigError("--epsilon expects a number or 'auto'");
                flags["build.epsilon"] = real_value(e);
            }
        }
        if (opt_rk->count()) flags["build.rk_steps"] = int_value(rk_steps);
        if (opt_samples->count()) flags["build.samples_per_cell"] = int_value(samples);
        if (opt_threads->count()) flags["build.threads"] = int_value(threads);
        if (opt_cap->count()) flags["build.max_cells"] = int_value(max_cells);
        if (opt_refine->count()) flags["run.refinement_levels"] = int_value(refine);
        if (opt_window->count()) flags["run.window"] = int_value(window);
        if (opt_fan->count()) flags["run.fan_order"] = int_value(fan_order);
        if (opt_alpha->count()) {
            ConfigValue v;
            v.kind = ConfigValue::Kind::array;
            for (const auto& a : alpha_texts)
                v.items.push_back(int_array_value(parse_int_list("--alpha", a)));
            flags["run.alphas"] = v;
        }
        if (opt_labels->count())
            flags["extract.labels"] = int_array_value(parse_int_list("--labels", labels_text));
        if (opt_level->count()) flags["extract.level"] = real_value(level);
        if (opt_alpha2->count())
            flags["fried.alpha2"] = int_array_value(parse_int_list("--alpha2", alpha2_text));
        if (opt_labels1->count())
            flags["fried.labels1"] = int_array_value(parse_int_list("--labels1", labels1_text));
        if (opt_labels2->count())
            flags["fried.labels2"] = int_array_value(parse_int_list("--labels2", labels2_text));
        if (opt_report->count()) flags["output.report"] = str_value(report_path);
        if (opt_svg->count()) flags["output.svg_dir"] = str_value(svg_dir);
        if (opt_emit->count()) flags["output.emit_graph"] = str_value(emit_graph);
        torsec::apply_config_table(cfg, flags);

        if (cmd_analyze->parsed()) cfg.commands = {"analyze"};
        else if (cmd_directions->parsed()) cfg.commands = {"directions"};
        else if (cmd_sections->parsed()) cfg.commands = {"sections"};
        else if (cmd_extract->parsed()) cfg.commands = {"extract"};
        else if (cmd_fried->parsed()) cfg.commands = {"fried-sum"};
        // no subcommand: run the commands named in the config file

        torsec::RunOutcome out = torsec::run(cfg);

        if (!cfg.report_path.empty()) {
            std::ofstream f(cfg.report_path, std::ios::binary);
            if (!f) throw ConfigError("cannot write report: " + cfg.report_path);
            f << out.report;
        } else {
            std::cout << out.report;
        }
        return out.had_analysis_error ? 3 : 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const torsec::AnalysisError& e) {
        std::cerr << "analysis error: " << e.what() << "\n";
        return 3;
    } catch (const torsec::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
