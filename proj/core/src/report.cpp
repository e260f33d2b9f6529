#include "torsec/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <sstream>

#include "json.hpp"

#include "torsec/alpha.hpp"
#include "torsec/errors.hpp"
#include "torsec/recurrence.hpp"
#include "torsec/sections.hpp"

namespace torsec {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::size_t kWitnessCap = 256;
constexpr std::size_t kLabelingCap = 64;

ordered_json covector_json(const Covector& a) {
    ordered_json j = ordered_json::array();
    for (int i = 0; i < a.dim; ++i) j.push_back(a.c[i]);
    return j;
}

ordered_json rational_json(const Rational& r, double T) {
    ordered_json j;
    j["num"] = r.num;
    j["den"] = r.den;
    j["value"] = r.value();
    j["per_time"] = r.value() / T;
    return j;
}

ordered_json cycle_json(const std::vector<std::int32_t>& cycle) {
    ordered_json j = ordered_json::array();
    for (std::size_t i = 0; i < cycle.size() && i < kWitnessCap; ++i) j.push_back(cycle[i]);
    return j;
}

ordered_json shifts_json(const std::vector<std::vector<std::int64_t>>& m) {
    ordered_json rows = ordered_json::array();
    for (const auto& row : m) {
        ordered_json r = ordered_json::array();
        for (std::int64_t v : row) {
            if (v == AlphaChainGraph::SHIFT_INF)
                r.push_back(nullptr);
            else
                r.push_back(v);
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

const char* cardinality_name(CardinalityKind k) {
    switch (k) {
        case CardinalityKind::empty: return "empty";
        case CardinalityKind::singleton: return "singleton";
        case CardinalityKind::finite: return "finite";
        default: return "countably_infinite";
    }
}

std::string alpha_slug(const Covector& a) {
    std::string s;
    for (int i = 0; i < a.dim; ++i) {
        if (i) s += '_';
        s += std::to_string(a.c[i]);
    }
    return s;
}

std::array<std::int64_t, 2> loop_class(const std::vector<std::array<double, 2>>& loop) {
    double dx = 0, dy = 0;
    for (std::size_t i = 0; i < loop.size(); ++i) {
        const auto& p = loop[i];
        const auto& q = loop[(i + 1) % loop.size()];
        double ex = q[0] - p[0], ey = q[1] - p[1];
        ex -= std::round(ex);
        ey -= std::round(ey);
        dx += ex;
        dy += ey;
    }
    auto snap = [](double v) {
        double r = std::round(v);
        if (std::abs(v - r) > 1e-6)
            throw AnalysisError("polyline winding failed to close to an integer (internal)");
        return static_cast<std::int64_t>(r);
    };
    return {snap(-dx), snap(-dy)}; // sign is orientation-dependent; magnitude is not
}

ordered_json section_entry(const TransitionGraph& tg, const AlphaChainGraph& cg,
                           const Labeling& lab, std::optional<double> level_override,
                           const std::string& svg_path) {
    ordered_json j;
    j["labels"] = lab.labels;
    PotentialField pf = synthesize_potential(tg.g, cg.alpha, lab);
    double t = level_override ? *level_override : default_level(pf, cg);
    CrossSection cs = extract_section(tg.g, pf, t);
    j["level"] = t;
    j["cut_edges"] = cs.cuts.size();
    j["total_crossings"] = cs.total_crossings;
    if (tg.grid.dim == 2) {
        assemble_polylines(tg, pf, cs);
        j["polylines"] = cs.polylines.size();
        ordered_json classes = ordered_json::array();
        for (const auto& loop : cs.polylines) {
            auto c = loop_class(loop);
            classes.push_back(ordered_json::array({c[0], c[1]}));
        }
        j["polyline_classes"] = std::move(classes);
    }
    if (!svg_path.empty()) {
        std::ofstream out(svg_path);
        if (!out) throw ConfigError("cannot write SVG file: " + svg_path);
        write_section_svg(out, tg, cg.chains, cs);
        j["svg"] = svg_path;
    }
    return j;
}

ordered_json analyze_one_alpha(const RunConfig& cfg, const TransitionGraph& tg,
                               const Covector& alpha, bool chain_rec, bool want_sections) {
    const WeightedDigraph& g = tg.g;
    ordered_json j;
    j["alpha"] = covector_json(alpha);
    ExistenceVerdict ex = existence(g, alpha);
    j["existence"]["nonempty"] = ex.nonempty;
    j["existence"]["reason"] = ex.reason;
    if (!ex.witness_cycle.empty()) {
        j["existence"]["witness_cycle"] = cycle_json(ex.witness_cycle);
        j["existence"]["witness_weight"] = ex.witness_weight;
        j["existence"]["witness_truncated"] = ex.witness_cycle.size() > kWitnessCap;
    }
    AlphaAnalysis a = analyze_alpha(g, alpha);
    j["quasi_lyapunov_neg"] = a.quasi_lyapunov_neg;
    j["fried_positive"] = a.quasi_lyapunov_neg && a.recurrent.empty();
    j["support"] = rational_json(direction_support(g, alpha), tg.T);
    if (a.quasi_lyapunov_neg) {
        j["recurrent_cells"] = a.recurrent.size();
        j["chain_count"] = a.chains.size();
    }
    if (!ex.nonempty) {
        j["cardinality"]["kind"] = "empty";
        j["cardinality"]["reason"] = ex.reason;
        return j;
    }
    // Shift trends under refinement only matter for nonzero classes: the zero
    // class has no shifts to trend, and its coarse chain structure is not stable
    // enough to match across levels. When cross-level chain matching is itself
    // ambiguous, record that and carry on with base-level shifts.
    int levels = cfg.refinement_levels;
    if (tg.grid.dim == 3) {
        // 3D runs ship coarse: refine only while every axis stays within 48.
        int m = std::max({tg.grid.res[0], tg.grid.res[1], tg.grid.res[2]});
        int allowed = 1;
        while (allowed < levels && m * 2 <= 48) {
            m *= 2;
            ++allowed;
        }
        levels = allowed;
    }
    std::string matching_note;
    AlphaChainGraph cg = [&] {
        if (levels > 1 && !a.chains.empty() && !alpha.is_zero()) {
            try {
                return build_chain_graph(tg, alpha, levels);
            } catch (const AnalysisError& e) {
                matching_note = e.what();
            }
        }
        return build_chain_graph(g, alpha);
    }();
    if (!matching_note.empty()) j["refinement_matching"] = matching_note;
    {
        ordered_json chains = ordered_json::array();
        for (std::int32_t i = 0; i < cg.chain_count(); ++i) {
            ordered_json c;
            c["cells"] = cg.chains[i].size();
            c["representative"] = cg.representatives[i];
            chains.push_back(std::move(c));
        }
        j["chains"] = std::move(chains);
        j["shifts"] = shifts_json(cg.shifts);
        if (cg.levels > 1) {
            ordered_json lv = ordered_json::array();
            for (const auto& m : cg.level_shifts) lv.push_back(shifts_json(m));
            j["level_shifts"] = std::move(lv);
            ordered_json dv = ordered_json::array();
            for (const auto& row : cg.divergent) {
                ordered_json r = ordered_json::array();
                for (auto b : row) r.push_back(static_cast<bool>(b));
                dv.push_back(std::move(r));
            }
            j["divergent"] = std::move(dv);
        }
    }
    Cardinality card = classify_cardinality(cg, alpha, chain_rec);
    j["cardinality"]["kind"] = cardinality_name(card.kind);
    if ((card.kind == CardinalityKind::singleton || card.kind == CardinalityKind::finite) &&
        card.count >= 0)
        j["cardinality"]["count"] = card.count;
    j["cardinality"]["reason"] = card.reason;

    if (!alpha.is_zero()) {
        LabelingList ll = enumerate_labelings(cg, cfg.window);
        j["labelings"]["window"] = cfg.window;
        j["labelings"]["count"] = ll.items.size();
        j["labelings"]["truncated"] = ll.truncated;
        ordered_json items = ordered_json::array();
        for (std::size_t i = 0; i < ll.items.size() && i < kLabelingCap; ++i)
            items.push_back(ll.items[i].labels);
        j["labelings"]["items"] = std::move(items);
        j["labelings"]["items_capped"] = ll.items.size() > kLabelingCap;

        if (want_sections) {
            ordered_json secs = ordered_json::array();
            for (std::size_t i = 0; i < ll.items.size() && i < kLabelingCap; ++i) {
                std::string svg;
                if (!cfg.svg_dir.empty())
                    svg = cfg.svg_dir + "/section-" + tg.flow.name() + "-a" +
                          alpha_slug(alpha) + "-l" + std::to_string(i) + ".svg";
                try {
                    secs.push_back(section_entry(tg, cg, ll.items[i], std::nullopt, svg));
                } catch (const AnalysisError& e) {
                    // a window labeling can be unrealizable at this resolution;
                    // that is a finding about the discretization, not a failure
                    ordered_json skip;
                    skip["labels"] = ll.items[i].labels;
                    skip["skipped"] = e.what();
                    secs.push_back(std::move(skip));
                }
            }
            j["sections"] = std::move(secs);
        }
    }
    return j;
}

void require_labels_size(std::vector<std::int64_t>& labels, std::int32_t chains,
                         const char* what) {
    if (labels.empty()) labels.assign(chains, 0);
    if (static_cast<std::int32_t>(labels.size()) != chains) {
        std::ostringstream os;
        os << what << ": " << labels.size() << " labels supplied but the class has " << chains
           << " recurrence chains";
        throw ConfigError(os.str());
    }
}

} // namespace

RunOutcome run(const RunConfig& cfg) {
    for (const auto& c : cfg.commands)
        if (c != "analyze" && c != "directions" && c != "sections" && c != "extract" &&
            c != "fried-sum")
            throw ConfigError("unknown command: " + c);
    if (cfg.commands.empty()) throw ConfigError("at least one command is required");
    auto has = [&](const char* c) {
        return std::find(cfg.commands.begin(), cfg.commands.end(), c) != cfg.commands.end();
    };

    GridSpec grid = cfg.grid;
    if (!cfg.grid_explicit) {
        grid.dim = cfg.flow.dim;
        grid.res = {64, 64, 1};
        for (const auto& ex : builtin_examples())
            if (ex.name == cfg.flow.name()) grid.res = ex.default_resolution;
        if (grid.dim == 3 && grid.res[2] <= 1) grid.res = {24, 24, 24};
    }

    TransitionGraph tg = build_transition_graph(cfg.flow, grid, cfg.build);

    if (!cfg.emit_graph_path.empty()) {
        std::ofstream out(cfg.emit_graph_path);
        if (!out) throw ConfigError("cannot write graph dump: " + cfg.emit_graph_path);
        export_graph(out, tg);
    }

    std::vector<Covector> alphas = cfg.alphas;
    if (alphas.empty()) {
        for (const auto& ex : builtin_examples())
            if (ex.name == cfg.flow.name())
                for (const auto& s : ex.suggested_alphas)
                    alphas.push_back(tg.grid.dim == 2 ? Covector::of(s[0], s[1])
                                                      : Covector::of(s[0], s[1], s[2]));
    }
    const bool needs_alpha = has("analyze") || has("sections") || has("extract") ||
                             has("fried-sum");
    if (alphas.empty() && needs_alpha)
        throw ConfigError("no alpha given and the flow has no suggested classes");

    ChainDecomposition cd = chain_decomposition(tg.g);
    const bool chain_rec = is_chain_recurrent(tg.g);

    ordered_json j;
    j["schema"] = "torsec-report-v1";
    j["flow"]["name"] = cfg.flow.name();
    j["flow"]["dim"] = cfg.flow.dim;
    j["flow"]["params"] = cfg.flow.params;
    {
        ordered_json res = ordered_json::array();
        for (int i = 0; i < grid.dim; ++i) res.push_back(grid.res[i]);
        j["grid"] = std::move(res);
    }
    j["T"] = tg.T;
    j["epsilon"] = tg.epsilon;
    j["refinement_levels"] = cfg.refinement_levels;
    j["window"] = cfg.window;
    j["commands"] = cfg.commands;
    j["graph"]["vertices"] = tg.g.vertex_count();
    j["graph"]["edges"] = tg.g.edge_count();
    j["recurrence"]["chain_recurrent"] = chain_rec;
    j["recurrence"]["chains"] = cd.chain_count();
    j["recurrence"]["wandering_cells"] = cd.wandering.size();

    bool had_error = false;

    if (has("analyze") || has("sections")) {
        const bool want_sections = has("sections");
        std::vector<ordered_json> entries(alphas.size());
        auto work = [&](std::size_t i) {
            try {
                entries[i] = analyze_one_alpha(cfg, tg, alphas[i], chain_rec, want_sections);
            } catch (const Error& e) {
                entries[i]["alpha"] = covector_json(alphas[i]);
                entries[i]["error"] = e.what();
            }
        };
        if (cfg.build.threads > 1) {
            std::vector<std::future<void>> fs;
            for (std::size_t i = 0; i < alphas.size(); ++i)
                fs.push_back(std::async(std::launch::async, work, i));
            for (auto& f : fs) f.get();
        } else {
            for (std::size_t i = 0; i < alphas.size(); ++i) work(i);
        }
        ordered_json arr = ordered_json::array();
        for (auto& e : entries) {
            if (e.contains("error")) had_error = true;
            arr.push_back(std::move(e));
        }
        j["results"] = std::move(arr);
    }

    if (has("directions")) {
        ordered_json d;
        d["fan_order"] = cfg.fan_order;
        ordered_json items = ordered_json::array();
        for (const Covector& a : direction_fan(grid.dim, cfg.fan_order)) {
            ordered_json e;
            e["alpha"] = covector_json(a);
            try {
                e["quasi_lyapunov_neg"] = is_quasi_lyapunov_neg(tg.g, a);
                e["support"] = rational_json(direction_support(tg.g, a), tg.T);
            } catch (const Error& err) {
                e["error"] = err.what();
                had_error = true;
            }
            items.push_back(std::move(e));
        }
        d["items"] = std::move(items);
        j["directions"] = std::move(d);
    }

    if (has("extract")) {
        ordered_json e;
        try {
            if (alphas.empty()) throw ConfigError("extract requires an alpha");
            const Covector alpha = alphas[0];
            e["alpha"] = covector_json(alpha);
            AlphaChainGraph cg = build_chain_graph(tg.g, alpha);
            std::vector<std::int64_t> labels = cfg.extract_labels;
            require_labels_size(labels, cg.chain_count(), "extract");
            Labeling lab{alpha, labels};
            std::string svg;
            if (!cfg.svg_dir.empty())
                svg = cfg.svg_dir + "/extract-" + tg.flow.name() + "-a" + alpha_slug(alpha) +
                      ".svg";
            e.update(section_entry(tg, cg, lab, cfg.extract_level, svg));
        } catch (const AnalysisError& err) {
            e["error"] = err.what();
            had_error = true;
        }
        j["extract"] = std::move(e);
    }

    if (has("fried-sum")) {
        ordered_json e;
        try {
            if (alphas.empty()) throw ConfigError("fried-sum requires an alpha");
            if (!cfg.fried_alpha2) throw ConfigError("fried-sum requires a second alpha");
            const Covector a1 = alphas[0], a2 = *cfg.fried_alpha2;
            e["alpha1"] = covector_json(a1);
            e["alpha2"] = covector_json(a2);
            AlphaChainGraph cg1 = build_chain_graph(tg.g, a1);
            AlphaChainGraph cg2 = build_chain_graph(tg.g, a2);
            std::vector<std::int64_t> l1 = cfg.fried_labels1, l2 = cfg.fried_labels2;
            require_labels_size(l1, cg1.chain_count(), "fried-sum labels1");
            require_labels_size(l2, cg2.chain_count(), "fried-sum labels2");
            e["labels1"] = l1;
            e["labels2"] = l2;
            FriedSumResult r =
                fried_sum(tg.g, a1, Labeling{a1, l1}, a2, Labeling{a2, l2});
            e["sum_alpha"] = covector_json(r.sum.alpha);
            e["feasible"] = r.feasible;
            e["sum_labels"] = r.sum.labels;
            if (!r.feasible) e["witness"] = r.witness;
        } catch (const AnalysisError& err) {
            e["error"] = err.what();
            had_error = true;
        }
        j["fried_sum"] = std::move(e);
    }

    RunOutcome out;
    out.report = j.dump(2) + "\n";
    out.had_analysis_error = had_error;
    return out;
}

namespace {

std::int64_t want_int(const std::string& key, const ConfigValue& v) {
    if (v.kind != ConfigValue::Kind::integer)
        throw ConfigError("config key '" + key + "' must be an integer");
    return v.integer;
}

std::string want_str(const std::string& key, const ConfigValue& v) {
    if (v.kind != ConfigValue::Kind::string)
        throw ConfigError("config key '" + key + "' must be a string");
    return v.str;
}

double want_real(const std::string& key, const ConfigValue& v) {
    if (v.kind != ConfigValue::Kind::integer && v.kind != ConfigValue::Kind::real)
        throw ConfigError("config key '" + key + "' must be a number");
    return v.as_real();
}

std::vector<std::int64_t> want_int_array(const std::string& key, const ConfigValue& v) {
    if (v.kind != ConfigValue::Kind::array)
        throw ConfigError("config key '" + key + "' must be an array");
    std::vector<std::int64_t> out;
    for (const auto& item : v.items) out.push_back(want_int(key, item));
    return out;
}

Covector covector_of(const std::string& key, const std::vector<std::int64_t>& c) {
    if (c.size() == 2) return Covector::of(c[0], c[1]);
    if (c.size() == 3) return Covector::of(c[0], c[1], c[2]);
    throw ConfigError("config key '" + key + "' must have 2 or 3 components");
}

} // namespace

void apply_config_table(RunConfig& cfg, const ConfigTable& table) {
    std::string flow_name = cfg.flow.name();
    std::string flow_table;
    std::map<std::string, double> flow_params = cfg.flow.params;
    bool flow_touched = false;

    for (const auto& [key, v] : table) {
        if (key == "flow.name") {
            flow_name = want_str(key, v);
            flow_params.clear();
            flow_touched = true;
        } else if (key == "flow.table") {
            flow_table = want_str(key, v);
            flow_touched = true;
        } else if (key.rfind("flow.params.", 0) == 0) {
            flow_params[key.substr(12)] = want_real(key, v);
            flow_touched = true;
        } else if (key == "grid.resolution") {
            auto r = want_int_array(key, v);
            if (r.size() != 2 && r.size() != 3)
                throw ConfigError("grid.resolution must have 2 or 3 entries");
            cfg.grid.dim = static_cast<int>(r.size());
            cfg.grid.res = {1, 1, 1};
            for (std::size_t i = 0; i < r.size(); ++i)
                cfg.grid.res[i] = static_cast<int>(r[i]);
            cfg.grid_explicit = true;
        } else if (key == "build.T") {
            cfg.build.T = want_real(key, v);
        } else if (key == "build.epsilon") {
            if (v.kind == ConfigValue::Kind::string) {
                if (v.str != "auto") throw ConfigError("build.epsilon: expected number or 'auto'");
                cfg.build.epsilon = -1.0;
            } else {
                cfg.build.epsilon = want_real(key, v);
            }
        } else if (key == "build.rk_steps") {
            cfg.build.rk_steps = static_cast<int>(want_int(key, v));
        } else if (key == "build.samples_per_cell") {
            cfg.build.samples_per_cell = static_cast<int>(want_int(key, v));
        } else if (key == "build.threads") {
            cfg.build.threads = static_cast<int>(want_int(key, v));
        } else if (key == "build.max_cells") {
            cfg.build.max_cells = want_int(key, v);
        } else if (key == "run.refinement_levels") {
            cfg.refinement_levels = static_cast<int>(want_int(key, v));
        } else if (key == "run.window") {
            cfg.window = want_int(key, v);
        } else if (key == "run.fan_order") {
            cfg.fan_order = static_cast<int>(want_int(key, v));
        } else if (key == "run.commands") {
            if (v.kind != ConfigValue::Kind::array)
                throw ConfigError("run.commands must be an array of strings");
            cfg.commands.clear();
            for (const auto& item : v.items) cfg.commands.push_back(want_str(key, item));
        } else if (key == "run.alphas") {
            if (v.kind != ConfigValue::Kind::array)
                throw ConfigError("run.alphas must be an array of integer arrays");
            cfg.alphas.clear();
            for (const auto& item : v.items)
                cfg.alphas.push_back(covector_of(key, want_int_array(key, item)));
        } else if (key == "extract.labels") {
            cfg.extract_labels = want_int_array(key, v);
        } else if (key == "extract.level") {
            cfg.extract_level = want_real(key, v);
        } else if (key == "fried.alpha2") {
            cfg.fried_alpha2 = covector_of(key, want_int_array(key, v));
        } else if (key == "fried.labels1") {
            cfg.fried_labels1 = want_int_array(key, v);
        } else if (key == "fried.labels2") {
            cfg.fried_labels2 = want_int_array(key, v);
        } else if (key == "output.report") {
            cfg.report_path = want_str(key, v);
        } else if (key == "output.svg_dir") {
            cfg.svg_dir = want_str(key, v);
        } else if (key == "output.emit_graph") {
            cfg.emit_graph_path = want_str(key, v);
        } else {
            throw ConfigError("unknown config key: " + key);
        }
    }

    if (flow_touched) {
        if (!flow_table.empty()) {
            if (!flow_params.empty() && flow_params != cfg.flow.params)
                throw ConfigError("flow.table cannot be combined with flow.params");
            std::ifstream in(flow_table);
            if (!in) throw ConfigError("cannot open flow table: " + flow_table);
            cfg.flow = FlowSpec::from_table(in);
        } else {
            cfg.flow = FlowSpec::builtin(flow_name, flow_params);
        }
    }
}

std::string examples_catalog_text() {
    std::ostringstream os;
    os << "builtin flows:\n";
    for (const auto& ex : builtin_examples()) {
        os << "\n  " << ex.name << "  (" << ex.dim << "D, default " << ex.default_resolution[0]
           << "x" << ex.default_resolution[1];
        if (ex.dim == 3) os << "x" << ex.default_resolution[2];
        os << ")\n";
        os << "      " << ex.note << "\n";
        if (!ex.params.empty()) {
            os << "      params:";
            for (const auto& [k, v] : ex.params) {
                char buf[64];
                std::snprintf(buf, sizeof buf, " %s=%.6g", k.c_str(), v);
                os << buf;
            }
            os << "\n";
        }
        if (!ex.suggested_alphas.empty()) {
            os << "      suggested alpha:";
            for (const auto& a : ex.suggested_alphas) {
                os << " (" << a[0] << "," << a[1];
                if (ex.dim == 3) os << "," << a[2];
                os << ")";
            }
            os << "\n";
        }
    }
    return os.str();
}

} // namespace torsec
