#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "CLI11.hpp"
#include "json.hpp"

#include "pmetric/degeneration.hpp"
#include "pmetric/error.hpp"
#include "pmetric/io.hpp"
#include "pmetric/pressure_metric.hpp"
#include "pmetric/selftest.hpp"
#include "pmetric/thermo.hpp"

using nlohmann::json;
using namespace pmetric;

namespace {

constexpr const char* kVersion = PMETRIC_VERSION;

// JSON with every float at 17 significant digits; non-finite values become null.
void emit(std::ostream& out, const json& v, int indent, int level) {
    const auto pad = [&](int l) {
        if (indent >= 0) out << '\n' << std::string(static_cast<std::size_t>(indent * l), ' ');
    };
    const char* sep = indent >= 0 ? ": " : ":";
    switch (v.type()) {
    case json::value_t::object: {
        if (v.empty()) {
            out << "{}";
            return;
        }
        out << '{';
        bool first = true;
        for (const auto& [key, item] : v.items()) {
            if (!first) out << ',';
            first = false;
            pad(level + 1);
            out << json(key).dump() << sep;
            emit(out, item, indent, level + 1);
        }
        pad(level);
        out << '}';
        return;
    }
    case json::value_t::array: {
        if (v.empty()) {
            out << "[]";
            return;
        }
        const bool flat = std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_primitive(); });
        out << '[';
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out << (flat || indent < 0 ? ", " : ",");
            if (!flat) pad(level + 1);
            emit(out, v[i], indent, level + 1);
        }
        if (!flat) pad(level);
        out << ']';
        return;
    }
    case json::value_t::number_float: {
        const double x = v.get<double>();
        out << (std::isfinite(x) ? json_number(x) : "null");
        return;
    }
    default:
        out << v.dump();
    }
}

std::string to_json_text(const json& v, int indent) {
    std::ostringstream out;
    emit(out, v, indent, 0);
    if (indent >= 0) out << '\n';
    return out.str();
}

// One table of named columns, printed as CSV or as a JSON array of rows.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<json>> rows;
};

json table_json(const Table& t) {
    json rows = json::array();
    for (const auto& r : t.rows) {
        json row = json::object();
        for (std::size_t c = 0; c < t.columns.size(); ++c) row[t.columns[c]] = r[c];
        rows.push_back(row);
    }
    return rows;
}

std::string csv_cell(const json& v) {
    if (v.is_number_float()) return csv_number(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

struct Output {
    json result = json::object();
    json residuals = json::object();
    json report = json::object();
    Table table;
    bool failed = false;  // a checked invariant is out of tolerance
};

// Effective configuration of one subcommand: defaults, then flags, then the
// config file.
class Command {
public:
    Command(CLI::App& app, std::string name, std::string help) : app_(app.add_subcommand(name, help)), name_(name) {
        option<std::string>("config", "", "JSON file whose keys override flags");
        option<std::uint64_t>("seed", 0, "seed for randomized sweeps");
        option<std::string>("out", "", "write output atomically to this path instead of stdout");
        flag("json", "emit JSON instead of CSV");
    }

    template <class T>
    void option(const std::string& key, T fallback, const std::string& help) {
        auto value = std::make_shared<T>(fallback);
        cfg_[key] = fallback;
        auto* opt = app_->add_option("--" + flag_name(key), *value, help);
        if constexpr (std::is_same_v<T, std::vector<double>>) opt->delimiter(',');
        commits_.push_back([this, key, value, opt] {
            if (opt->count()) cfg_[key] = *value;
        });
    }

    void required_path(const std::string& key, const std::string& help) {
        option<std::string>(key, "", help);
        required_.push_back(key);
    }

    void flag(const std::string& key, const std::string& help) {
        auto value = std::make_shared<bool>(false);
        cfg_[key] = false;
        auto* opt = app_->add_flag("--" + flag_name(key), *value, help);
        commits_.push_back([this, key, value, opt] {
            if (opt->count()) cfg_[key] = *value;
        });
    }

    void run_with(std::function<Output(const json&)> f) { body_ = std::move(f); }

    CLI::App* app() const { return app_; }
    const std::string& name() const { return name_; }

    json resolve() {
        for (auto& c : commits_) c();
        const std::string path = cfg_["config"].get<std::string>();
        if (!path.empty()) {
            json file;
            try {
                file = json::parse(read_file(path));
            } catch (const json::parse_error& e) {
                throw ParseError(path + ": " + e.what());
            }
            if (!file.is_object()) throw ParseError(path + ": expected an object");
            for (const auto& [key, value] : file.items()) {
                if (key == "config" || !cfg_.contains(key)) throw ParseError(path + ": unknown key \"" + key + "\"");
                if (!compatible(cfg_[key], value)) throw ParseError(path + ": wrong type for \"" + key + "\"");
                cfg_[key] = value;
            }
        }
        for (const auto& key : required_)
            if (cfg_[key].get<std::string>().empty()) throw ParseError("--" + flag_name(key) + " is required");
        json effective = cfg_;
        effective.erase("config");
        effective["subcommand"] = name_;
        return effective;
    }

    Output run(const json& cfg) const { return body_(cfg); }

private:
    static std::string flag_name(std::string key) {
        std::replace(key.begin(), key.end(), '_', '-');
        return key;
    }

    static bool compatible(const json& a, const json& b) {
        if (a.is_number_unsigned()) return b.is_number_unsigned();
        if (a.is_number()) return b.is_number();
        if (a.is_array()) return b.is_array() && std::all_of(b.begin(), b.end(), [](const json& x) { return x.is_number(); });
        return a.type() == b.type();
    }

    CLI::App* app_;
    std::string name_;
    json cfg_ = json::object();
    std::vector<std::function<void()>> commits_;
    std::vector<std::string> required_;
    std::function<Output(const json&)> body_;
};

// The destination path is left out so that the same run written to two
// places is byte-identical.
json echo(json cfg) {
    cfg.erase("out");
    return cfg;
}

std::string render(const json& cfg, const Output& out) {
    const bool as_json = cfg["json"].get<bool>();
    if (as_json) {
        json doc = json::object();
        doc["tool"] = "pmetric";
        doc["version"] = kVersion;
        doc["config"] = echo(cfg);
        doc["residuals"] = out.residuals;
        if (!out.result.empty()) doc["result"] = out.result;
        if (!out.table.columns.empty()) doc["rows"] = table_json(out.table);
        if (!out.report.empty()) doc["report"] = out.report;
        return to_json_text(doc, 2);
    }
    std::ostringstream s;
    s << "# pmetric " << kVersion << '\n';
    s << "# config " << to_json_text(echo(cfg), -1) << '\n';
    s << "# residuals " << to_json_text(out.residuals, -1) << '\n';
    if (!out.result.empty()) s << "# result " << to_json_text(out.result, -1) << '\n';
    if (!out.report.empty()) s << "# report " << to_json_text(out.report, -1) << '\n';
    for (std::size_t c = 0; c < out.table.columns.size(); ++c) s << (c ? "," : "") << out.table.columns[c];
    if (!out.table.columns.empty()) s << '\n';
    for (const auto& row : out.table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) s << (c ? "," : "") << csv_cell(row[c]);
        s << '\n';
    }
    return s.str();
}

ModuliPoint moduli_point(const MetricGraph& g, bool normalize) {
    return normalize ? normalize_to_entropy_one(g) : ModuliPoint(g);
}

// ---------------------------------------------------------------------------

Output entropy_cmd(const json& cfg) {
    const MetricGraph g = load_graph(cfg["graph"].get<std::string>());
    const auto ts = build_transition_structure(g);
    const EntropySolution sol = solve_topological_entropy(ts, Potential::edge_lengths(ts, g.lengths()));
    Output out;
    out.result["entropy"] = sol.entropy;
    out.result["bisection_steps"] = sol.bisection_steps;
    out.residuals["pressure_at_entropy"] = sol.residual;
    out.table.columns = {"quantity", "value"};
    out.table.rows.push_back({"entropy", sol.entropy});
    const double horizon = cfg["horizon"].get<double>();
    if (horizon > 0.0) {
        const double cap = cfg["cap"].get<double>();
        const double counted = entropy_by_counting(ts, g, horizon, CountMode::PeriodicPoints, cap);
        out.result["counting_estimate"] = counted;
        out.residuals["counting_relative_error"] = std::abs(counted - sol.entropy) / sol.entropy;
        out.table.rows.push_back({"counting_estimate", counted});
    }
    return out;
}

Output normalize_cmd(const json& cfg) {
    const MetricGraph g = load_graph(cfg["graph"].get<std::string>());
    const ModuliPoint p = normalize_to_entropy_one(g);
    const auto ts = build_transition_structure(p.graph());
    Output out;
    out.result["graph"] = json::parse(graph_to_json(p.graph()));
    out.result["scale"] = p.lengths()[0] / g.lengths()[0];
    out.residuals["entropy_minus_one"] =
        topological_entropy(ts, Potential::edge_lengths(ts, p.lengths())) - 1.0;
    out.table.columns = {"edge", "tail", "head", "length"};
    for (std::size_t e = 0; e < p.graph().edge_count(); ++e) {
        const Edge& edge = p.graph().edge(e);
        out.table.rows.push_back({edge.name, edge.tail, edge.head, edge.length});
    }
    return out;
}

Output tensor_cmd(const json& cfg) {
    const ModuliPoint p = moduli_point(load_graph(cfg["graph"].get<std::string>()), cfg["normalize"].get<bool>());
    const MetricTensor m = metric_tensor(p);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.gram, Eigen::EigenvaluesOnly);
    Output out;
    json gram = json::array(), basis = json::array();
    for (Eigen::Index i = 0; i < m.gram.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index j = 0; j < m.gram.cols(); ++j) r.push_back(m.gram(i, j));
        gram.push_back(r);
    }
    double tangency = 0.0;
    for (const auto& v : m.basis) {
        basis.push_back(v.rates);
        tangency = std::max(tangency, std::abs(tangency_residual(p, v)));
    }
    std::vector<double> eigenvalues(eig.eigenvalues().data(), eig.eigenvalues().data() + eig.eigenvalues().size());
    out.result["lengths"] = p.lengths();
    out.result["basis_description"] = m.basis_description;
    out.result["basis"] = basis;
    out.result["matrix"] = gram;
    out.result["eigenvalues"] = eigenvalues;
    out.residuals["asymmetry"] = (m.gram - m.gram.transpose()).cwiseAbs().maxCoeff();
    out.residuals["max_tangency"] = tangency;
    out.residuals["min_eigenvalue"] = m.min_eigenvalue;
    out.failed = !(m.min_eigenvalue > 0.0);
    out.table.columns = {"row", "column", "value"};
    for (Eigen::Index i = 0; i < m.gram.rows(); ++i)
        for (Eigen::Index j = 0; j < m.gram.cols(); ++j)
            out.table.rows.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), m.gram(i, j)});
    return out;
}

Output intersect_cmd(const json& cfg) {
    const bool normalize = cfg["normalize"].get<bool>();
    const MetricGraph g1 = load_graph(cfg["graph"].get<std::string>());
    const MetricGraph g2 = load_graph(cfg["other"].get<std::string>());
    if (g1.edge_count() != g2.edge_count()) throw InvalidInput("the two graphs have different edge sets");
    const ModuliPoint p1 = moduli_point(g1, normalize);
    const ModuliPoint p2 = moduli_point(g1.with_lengths(g2.lengths()), normalize);
    const double horizon = cfg["horizon"].get<double>();
    const double cap = cfg["cap"].get<double>();
    Output out;
    out.table.columns = {"horizon", "J"};
    for (double fraction : {0.5, 0.75, 1.0}) {
        const double t = fraction * horizon;
        out.table.rows.push_back({t, intersection_J(p1, p2, t, cap)});
    }
    out.result["J"] = out.table.rows.back()[1];
    out.residuals["self_intersection_minus_one"] = intersection_J(p1, p1, horizon, cap) - 1.0;
    return out;
}

Output surface_cmd(const json& cfg) {
    const TriangulationComplex c = load_triangulation(cfg["complex"].get<std::string>());
    const SurfaceStructure ss = surface_from_coordinates(c, cfg["coords"].get<std::vector<double>>());
    Output out;
    out.table.columns = {"kind", "name", "value"};
    for (std::size_t k = 0; k < c.arcs().size(); ++k) out.table.rows.push_back({"ortholength", c.arcs()[k], ss.ortholengths[k]});
    const auto marked = c.marked_segments();
    for (std::size_t k = 0; k < c.segments().size(); ++k) {
        const bool is_marked = std::find(marked.begin(), marked.end(), k) != marked.end();
        out.table.rows.push_back({is_marked ? "b" : "bc", c.segments()[k], ss.segment_lengths[k]});
    }
    double gap = 0.0;
    for (std::size_t k = 0; k < c.boundary_cycles().size(); ++k) {
        double expected = 0.0;
        for (const SideRef& side : c.boundary_cycles()[k])
            if (!c.is_arc(side)) expected += ss.segment_lengths[c.side_index(side)];
        const double length = boundary_length(ss, k);
        gap = std::max(gap, std::abs(length - expected));
        out.table.rows.push_back({"boundary", "boundary:" + std::to_string(k), length});
    }
    out.residuals["hexagon_relations"] = ss.max_residual;
    out.residuals["boundary_holonomy_vs_segments"] = gap;
    out.result["dual_graph"] = json::parse(graph_to_json(c.dual_graph()));
    return out;
}

DegenerationPath degeneration_path(const json& cfg) {
    return DegenerationPath(load_triangulation(cfg["complex"].get<std::string>()), cfg["b"].get<std::vector<double>>());
}

json convergence_report(const DegenerationPath& path, const PathLengthReport& r, const json& cfg) {
    json report = json::object();
    report["total_length"] = r.total;
    report["halving_starts"] = r.halving_starts;
    report["increments"] = r.increments;
    report["increment_ratios"] = r.ratios;
    const double max_ratio = r.ratios.empty() ? 0.0 : *std::max_element(r.ratios.begin(), r.ratios.end());
    report["max_increment_ratio"] = max_ratio;
    double decreasing = -INFINITY;
    for (std::size_t i = 1; i < r.speeds.size(); ++i)
        decreasing = std::max(decreasing, r.speeds[i].speed - r.speeds[i - 1].speed);
    report["largest_speed_increase"] = std::isfinite(decreasing) ? decreasing : 0.0;
    const std::size_t depth = cfg["depth"].get<std::size_t>();
    if (depth > 1) {
        const PathLengthReport shallow = path_length(path, cfg["tmin"].get<double>(), cfg["tmax"].get<double>(), depth - 1,
                                                     cfg["points_per_halving"].get<std::size_t>());
        report["total_length_one_depth_lower"] = shallow.total;
    }
    return report;
}

Output degenerate_cmd(const json& cfg) {
    const DegenerationPath path = degeneration_path(cfg);
    const std::size_t depth = cfg["depth"].get<std::size_t>();
    const PathLengthReport r = path_length(path, cfg["tmin"].get<double>(), cfg["tmax"].get<double>(), depth,
                                           cfg["points_per_halving"].get<std::size_t>());
    const auto& c = path.complex();
    Output out;
    out.table.columns = {"t", "lambda"};
    for (const auto& name : c.arcs()) out.table.columns.push_back(name);
    for (const char* col : {"h_t", "speed", "cumulative_length"}) out.table.columns.push_back(col);
    double centering = 0.0;
    for (std::size_t i = 0; i < r.grid.size(); ++i) {
        const PathSample s = rescaled_surface_at(path, 1.0 / r.grid[i]);
        std::vector<json> row{r.grid[i], s.lambda};
        for (double x : s.rescaled_ortholengths) row.push_back(x);
        row.push_back(r.speeds[i].entropy);
        row.push_back(r.speeds[i].speed);
        row.push_back(r.cumulative[i]);
        out.table.rows.push_back(std::move(row));
        centering = std::max(centering, std::abs(r.speeds[i].centering_residual));
    }
    out.residuals["cone_margin"] = path.cone().margin;
    out.residuals["max_centering"] = centering;
    out.residuals["b_sum_minus_one"] = [&] {
        double sum = 0.0;
        for (double x : path.base()) sum += x;
        return sum - 1.0;
    }();
    if (cfg["json"].get<bool>()) {
        json report = convergence_report(path, r, cfg);
        const auto lambdas = cfg["lambdas"].get<std::vector<double>>();
        json fits = json::array();
        for (std::size_t arc = 0; arc < c.arcs().size(); ++arc) {
            const DecayFit fit = arc_decay_rate(path, arc, lambdas);
            fits.push_back({{"arc", c.arcs()[arc]}, {"slope", fit.slope}, {"predicted_slope", fit.predicted_slope},
                            {"prefactor", std::exp(fit.intercept)}});
        }
        report["decay_fits"] = fits;
        const PathSample top = rescaled_surface_at(path, lambdas.back());
        const auto limits = path.segment_limits();
        json segs = json::array();
        for (std::size_t k = 0; k < limits.size(); ++k)
            segs.push_back({{"segment", c.segments()[k]}, {"rescaled", top.rescaled_segments[k]}, {"limit", limits[k]}});
        report["segment_limits"] = segs;
        report["limit_edge_lengths"] = path.limit_edge_lengths();
        report["midpoint_edge_lengths"] = midpoint_edge_lengths(top);
        report["limit_graph_normalized"] = json::parse(graph_to_json(limit_graph_metric(path).graph()));
        json bands = json::array();
        for (double t : r.grid) {
            const EntropyBand b = entropy_band(path, t, depth, lambdas);
            bands.push_back({{"t", t}, {"h0", b.h0}, {"ht", b.ht}, {"lower", b.lower}, {"upper", b.upper},
                             {"c", b.c}, {"c_prime", b.c_prime}, {"inside", b.inside}});
        }
        report["entropy_band"] = bands;
        out.report = report;
    }
    return out;
}

Output pathlen_cmd(const json& cfg) {
    const DegenerationPath path = degeneration_path(cfg);
    const PathLengthReport r = path_length(path, cfg["tmin"].get<double>(), cfg["tmax"].get<double>(),
                                           cfg["depth"].get<std::size_t>(), cfg["points_per_halving"].get<std::size_t>());
    Output out;
    out.table.columns = {"t", "speed", "h_t", "cumulative_length"};
    double centering = 0.0;
    for (std::size_t i = 0; i < r.grid.size(); ++i) {
        out.table.rows.push_back({r.grid[i], r.speeds[i].speed, r.speeds[i].entropy, r.cumulative[i]});
        centering = std::max(centering, std::abs(r.speeds[i].centering_residual));
    }
    out.residuals["cone_margin"] = path.cone().margin;
    out.residuals["max_centering"] = centering;
    out.report = convergence_report(path, r, cfg);
    return out;
}

Output selftest_cmd(const json& cfg) {
    const auto checks = run_selftest(cfg["seed"].get<std::uint64_t>());
    Output out;
    out.table.columns = {"module", "check", "value", "bound", "status"};
    std::size_t failures = 0;
    for (const auto& c : checks) {
        out.table.rows.push_back({c.module, c.name, c.value, c.bound, c.pass ? "PASS" : "FAIL"});
        failures += c.pass ? 0 : 1;
    }
    out.residuals["failures"] = failures;
    out.failed = failures > 0;
    return out;
}

void add_degeneration_options(Command& cmd) {
    cmd.required_path("complex", "triangulation JSON");
    cmd.option<std::vector<double>>("b", {}, "base point on the marked segments, summing to 1");
    cmd.option<double>("tmin", 0.0125, "smallest t");
    cmd.option<double>("tmax", 0.2, "largest t");
    cmd.option<std::size_t>("depth", 2, "window depth of the surface potential");
    cmd.option<std::size_t>("points_per_halving", 1, "grid steps per halving of t");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pressure metric on metric graphs and degenerating hyperbolic surfaces", "pmetric"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::vector<std::unique_ptr<Command>> commands;
    auto add = [&](const char* name, const char* help, auto&& setup, Output (*body)(const json&)) {
        commands.push_back(std::make_unique<Command>(app, name, help));
        setup(*commands.back());
        commands.back()->run_with(body);
    };
    add("entropy", "topological entropy of a metric graph", [](Command& c) {
        c.required_path("graph", "graph JSON");
        c.option<double>("horizon", 0.0, "also estimate by counting closed geodesics shorter than this");
        c.option<double>("cap", kDefaultEnumerationCap, "enumeration cap");
    }, entropy_cmd);
    add("normalize", "rescale a metric graph to entropy one", [](Command& c) {
        c.required_path("graph", "graph JSON");
    }, normalize_cmd);
    add("tensor", "pressure metric tensor in a tangent basis", [](Command& c) {
        c.required_path("graph", "graph JSON");
        c.flag("normalize", "rescale to entropy one first");
    }, tensor_cmd);
    add("intersect", "renormalized intersection of two metrics", [](Command& c) {
        c.required_path("graph", "graph JSON");
        c.required_path("other", "graph JSON with the same edges");
        c.option<double>("horizon", 6.0, "length cutoff");
        c.option<double>("cap", kDefaultEnumerationCap, "enumeration cap");
        c.flag("normalize", "rescale both to entropy one first");
    }, intersect_cmd);
    add("surface", "hyperbolic structure from hexagon coordinates", [](Command& c) {
        c.required_path("complex", "triangulation JSON");
        c.option<std::vector<double>>("coords", {}, "lengths of the marked segments");
    }, surface_cmd);
    add("degenerate", "sample the degeneration path", [](Command& c) {
        add_degeneration_options(c);
        c.option<std::vector<double>>("lambdas", {30.0, 40.0, 50.0, 60.0}, "lambda grid for decay fits");
    }, degenerate_cmd);
    add("pathlen", "pressure metric length of the degeneration path", [](Command& c) {
        add_degeneration_options(c);
    }, pathlen_cmd);
    add("selftest", "invariant suite over all modules", [](Command&) {}, selftest_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    for (const auto& cmd : commands) {
        if (!cmd->app()->parsed()) continue;
        try {
            const json cfg = cmd->resolve();
            const Output out = cmd->run(cfg);
            const std::string text = render(cfg, out);
            const std::string path = cfg["out"].get<std::string>();
            if (path.empty())
                std::cout << text << std::flush;
            else
                write_file_atomic(path, text);
            return out.failed ? 1 : 0;
        } catch (const ParseError& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 2;
        } catch (const InvalidInput& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 2;
        } catch (const std::filesystem::filesystem_error& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 2;
        } catch (const json::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 2;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 1;
        }
    }
    std::cerr << app.help();
    return 2;
}
