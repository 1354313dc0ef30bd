#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "riesz/errors.hpp"
#include "riesz/experiments.hpp"
#include "riesz/report.hpp"

namespace riesz::cli {

enum ExitCode : int { kPass = 0, kBoundFailure = 1, kUsage = 2, kResource = 3 };

inline const std::vector<std::string>& commands() {
    static const std::vector<std::string> c{"verify-specfun", "verify-multiplier", "factorization", "norm-sweep",
                                            "decomposition",  "poisson",           "ineq",          "rotation",
                                            "report"};
    return c;
}

struct RunConfig {
    std::string command;
    std::uint64_t seed = 42;
    std::string output_dir = "results";
    std::map<std::string, std::string> overrides;
};

/// Override keys each command accepts.
inline const std::set<std::string>& allowed_keys(const std::string& command) {
    static const std::map<std::string, std::set<std::string>> table{
        {"verify-specfun", {"nu", "x_grid", "tol"}},
        {"verify-multiplier", {"dims", "x_grid", "tol"}},
        {"factorization", {"dims", "grid_n", "trials", "t", "band", "period", "image_radius", "tol"}},
        {"norm-sweep", {"dims", "grid_n", "trials", "t_grid", "band", "period", "extra_p", "tol"}},
        {"decomposition", {"dims", "grid_n", "trials", "t_grid", "band", "period", "tol"}},
        {"poisson", {"dims", "grid_n", "trials", "band", "period"}},
        {"ineq", {"g", "n", "lmax"}},
        {"rotation", {"dims", "grid_n", "t", "n_angles", "band", "period", "tol"}},
        {"report", {"inputs"}},
    };
    const auto it = table.find(command);
    if (it == table.end()) throw UsageError("unknown command '" + command + "'");
    return it->second;
}

// --- value parsing ---------------------------------------------------------

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

inline long long parse_int(const std::string& key, const std::string& s) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(trim(s), &pos);
        if (pos != trim(s).size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::logic_error&) {
        throw UsageError(key + ": expected an integer, got '" + s + "'");
    }
}

inline double parse_double(const std::string& key, const std::string& s) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(trim(s), &pos);
        if (pos != trim(s).size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::logic_error&) {
        throw UsageError(key + ": expected a number, got '" + s + "'");
    }
}

inline std::vector<int> parse_int_list(const std::string& key, const std::string& s) {
    std::vector<int> out;
    for (const auto& part : split(s, ',')) {
        if (trim(part).empty()) continue;
        out.push_back(static_cast<int>(parse_int(key, part)));
    }
    if (out.empty()) throw UsageError(key + ": empty list");
    return out;
}

inline std::vector<double> parse_double_list(const std::string& key, const std::string& s) {
    std::vector<double> out;
    for (const auto& part : split(s, ',')) {
        if (trim(part).empty()) continue;
        out.push_back(parse_double(key, part));
    }
    if (out.empty()) throw UsageError(key + ": empty list");
    return out;
}

/// "n_min:n_max:depth".
inline TruncationGrid parse_t_grid(const std::string& s) {
    const auto p = split(s, ':');
    if (p.size() != 3) throw UsageError("t_grid: expected n_min:n_max:depth, got '" + s + "'");
    TruncationGrid g{static_cast<int>(parse_int("t_grid", p[0])), static_cast<int>(parse_int("t_grid", p[1])),
                     static_cast<int>(parse_int("t_grid", p[2]))};
    try {
        g.validate();
    } catch (const DomainError& e) {
        throw UsageError(std::string("t_grid: ") + e.what());
    }
    return g;
}

/// "log:a:b:n" or "lin:a:b:n".
inline std::vector<double> parse_x_grid(const std::string& s) {
    const auto p = split(s, ':');
    if (p.size() != 4 || (p[0] != "log" && p[0] != "lin"))
        throw UsageError("x_grid: expected log:a:b:n or lin:a:b:n, got '" + s + "'");
    const double a = parse_double("x_grid", p[1]), b = parse_double("x_grid", p[2]);
    const auto n = parse_int("x_grid", p[3]);
    if (n < 2 || n > 1000000) throw UsageError("x_grid: point count must lie in 2..1e6");
    try {
        return p[0] == "log" ? log_grid(a, b, static_cast<int>(n)) : linear_grid(a, b, static_cast<int>(n));
    } catch (const DomainError& e) {
        throw UsageError(std::string("x_grid: ") + e.what());
    }
}

inline bool parse_bool(const std::string& key, const std::string& s) {
    const auto t = trim(s);
    if (t == "1" || t == "true" || t == "yes") return true;
    if (t == "0" || t == "false" || t == "no") return false;
    throw UsageError(key + ": expected true or false, got '" + s + "'");
}

// --- configuration ---------------------------------------------------------

inline std::string json_to_override(const std::string& key, const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return format_double(v.get<double>());
    if (v.is_array()) {
        std::string out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i].is_array() || v[i].is_object()) throw UsageError("config: nested value for '" + key + "'");
            out += (i ? "," : "") + json_to_override(key, v[i]);
        }
        return out;
    }
    throw UsageError("config: unsupported value for '" + key + "'");
}

/// Reads {"command", "seed", "output_dir", "overrides": {...}}; any other key is an error.
inline RunConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw UsageError("config: top level must be an object");
    RunConfig c;
    for (const auto& [key, v] : j.items()) {
        if (key == "command") {
            if (!v.is_string()) throw UsageError("config: command must be a string");
            c.command = v.get<std::string>();
        } else if (key == "seed") {
            if (!v.is_number_integer() || v.get<long long>() < 0) throw UsageError("config: seed must be a non-negative integer");
            c.seed = v.get<std::uint64_t>();
        } else if (key == "output_dir") {
            if (!v.is_string()) throw UsageError("config: output_dir must be a string");
            c.output_dir = v.get<std::string>();
        } else if (key == "overrides") {
            if (!v.is_object()) throw UsageError("config: overrides must be an object");
            for (const auto& [k, x] : v.items()) c.overrides[k] = json_to_override(k, x);
        } else {
            throw UsageError("config: unknown key '" + key + "'");
        }
    }
    return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw UsageError("cannot read config " + path.string());
    try {
        return config_from_json(nlohmann::json::parse(is));
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("config " + path.string() + ": " + e.what());
    }
}

inline void validate(const RunConfig& c) {
    if (c.command.empty()) throw UsageError("no command given");
    const auto& keys = allowed_keys(c.command);
    for (const auto& [k, v] : c.overrides)
        if (!keys.count(k)) throw UsageError("option '" + k + "' does not apply to " + c.command);
    if (c.output_dir.empty()) throw UsageError("output_dir must not be empty");
}

// --- dispatch --------------------------------------------------------------

namespace detail {

class Params {
public:
    explicit Params(const RunConfig& c) : o_(c.overrides) {}
    bool has(const std::string& k) const { return o_.count(k) != 0; }
    const std::string& raw(const std::string& k) const { return o_.at(k); }

    int integer(const std::string& k, int def) const { return has(k) ? static_cast<int>(parse_int(k, raw(k))) : def; }
    double number(const std::string& k, double def) const { return has(k) ? parse_double(k, raw(k)) : def; }
    std::vector<int> ints(const std::string& k, std::vector<int> def) const {
        return has(k) ? parse_int_list(k, raw(k)) : def;
    }
    std::vector<double> numbers(const std::string& k, std::vector<double> def) const {
        return has(k) ? parse_double_list(k, raw(k)) : def;
    }
    /// A list that must hold exactly one value.
    int single(const std::string& k, int def) const {
        if (!has(k)) return def;
        const auto v = parse_int_list(k, raw(k));
        if (v.size() != 1) throw UsageError(k + ": this command takes a single value");
        return v.front();
    }
    int positive(const std::string& k, int def) const {
        const int v = integer(k, def);
        if (v < 1) throw UsageError(k + " must be positive");
        return v;
    }
    QuadratureConfig quadrature() const {
        QuadratureConfig q;
        if (has("tol")) {
            const double t = number("tol", q.abs_tol);
            if (!(t > 0.0 && t < 1.0)) throw UsageError("tol must lie in (0, 1)");
            q.abs_tol = t;
            q.tail_tol = t;
        }
        return q;
    }

private:
    const std::map<std::string, std::string>& o_;
};

/// Default grid size for a dimension in the sweep.
inline int default_grid_n(int d) {
    switch (d) {
        case 2: return 64;
        case 3: return 32;
        case 4: return 16;
        case 5: return 12;
        case 6: return 10;
        case 7: return 8;
        case 8: return 6;
        case 9: return 5;
        default: return 4;
    }
}

inline ExperimentReport dispatch(const RunConfig& c) {
    const Params p(c);
    const auto& cmd = c.command;
    if (cmd == "verify-specfun") {
        return specfun_bound_suite(p.numbers("nu", {2, 3, 5, 10}),
                                   parse_x_grid(p.has("x_grid") ? p.raw("x_grid") : "lin:0:100:200"), p.quadrature());
    }
    if (cmd == "verify-multiplier") {
        return multiplier_bound_suite(p.ints("dims", {4, 6, 8, 12, 16}),
                                      parse_x_grid(p.has("x_grid") ? p.raw("x_grid") : "log:1e-3:1e3:200"),
                                      p.quadrature());
    }
    if (cmd == "factorization") {
        FactorizationOptions o;
        o.d = p.single("dims", o.d);
        o.N = p.single("grid_n", o.N);
        o.trials = p.positive("trials", o.trials);
        o.t_list = p.numbers("t", o.t_list);
        o.band = p.number("band", o.band);
        o.period = p.number("period", o.period);
        o.image_radius = p.integer("image_radius", o.image_radius);
        o.q = p.quadrature();
        o.seed = c.seed;
        return factorization_residual(o);
    }
    if (cmd == "norm-sweep") {
        SweepOptions o;
        if (p.has("dims")) {
            const auto dims = p.ints("dims", {});
            std::vector<int> ns;
            if (p.has("grid_n")) {
                ns = p.ints("grid_n", {});
                if (ns.size() == 1) ns.assign(dims.size(), ns.front());
                if (ns.size() != dims.size()) throw UsageError("grid_n: give one value or one per dimension");
            } else {
                for (int d : dims) ns.push_back(default_grid_n(d));
            }
            o.pairs.clear();
            for (std::size_t i = 0; i < dims.size(); ++i) o.pairs.emplace_back(dims[i], ns[i]);
        } else if (p.has("grid_n")) {
            throw UsageError("grid_n requires dims for norm-sweep");
        }
        o.trials = p.positive("trials", o.trials);
        if (p.has("t_grid")) o.grid = parse_t_grid(p.raw("t_grid"));
        o.band = p.number("band", o.band);
        o.period = p.number("period", o.period);
        if (p.has("extra_p")) o.extra_p = parse_bool("extra_p", p.raw("extra_p"));
        o.q = p.quadrature();
        o.seed = c.seed;
        return norm_ratio_sweep(o);
    }
    if (cmd == "decomposition") {
        DecompositionOptions o;
        o.d = p.single("dims", o.d);
        o.N = p.single("grid_n", o.N);
        o.trials = p.positive("trials", o.trials);
        if (p.has("t_grid")) o.grid = parse_t_grid(p.raw("t_grid"));
        o.band = p.number("band", o.band);
        o.period = p.number("period", o.period);
        o.q = p.quadrature();
        o.seed = c.seed;
        return decomposition_diagnostics(o);
    }
    if (cmd == "poisson") {
        PoissonOptions o;
        o.d = p.single("dims", o.d);
        o.N = p.single("grid_n", o.N);
        o.trials = p.positive("trials", o.trials);
        o.band = p.number("band", o.band);
        o.period = p.number("period", o.period);
        o.seed = c.seed;
        return poisson_suite(o);
    }
    if (cmd == "ineq") {
        InequalityOptions o;
        if (p.has("g")) o.g = p.raw("g");
        o.n = p.integer("n", o.n);
        o.lmax = p.integer("lmax", o.lmax);
        return numerical_inequality_check(o);
    }
    if (cmd == "rotation") {
        RotationOptions o;
        o.d = p.single("dims", o.d);
        o.N = p.single("grid_n", o.N);
        o.t = p.number("t", o.t);
        o.n_angles = p.positive("n_angles", o.n_angles);
        o.band = p.number("band", o.band);
        o.period = p.number("period", o.period);
        o.q = p.quadrature();
        o.seed = c.seed;
        return rotation_check(o);
    }
    throw UsageError("unknown command '" + cmd + "'");
}

inline int print_report(const RunConfig& c, std::ostream& out) {
    const Params p(c);
    if (!p.has("inputs")) throw UsageError("report: no input files");
    std::vector<std::filesystem::path> paths;
    for (const auto& s : split(p.raw("inputs"), ','))
        if (!trim(s).empty()) paths.emplace_back(trim(s));
    if (paths.empty()) throw UsageError("report: no input files");
    for (const auto& path : paths)
        if (!std::filesystem::exists(path)) throw UsageError("report: missing input " + path.string());
    const auto merged = merge_csv(paths);
    std::vector<ReportRow> rows;
    std::ostringstream csv;
    csv << kCsvHeader << '\n';
    for (const auto& r : merged) {
        rows.push_back(r.row);
        rows.back().quantity = r.experiment_id + "." + r.row.quantity;
        csv << r.experiment_id << ',' << r.seed << ',' << r.row.d << ',' << r.row.N << ',' << r.row.trial << ','
            << r.row.quantity << ',' << format_double(r.row.value) << '\n';
    }
    std::filesystem::create_directories(c.output_dir);
    write_atomic(std::filesystem::path(c.output_dir) / "report.csv", csv.str());
    out << "merged " << merged.size() << " rows from " << paths.size() << " file(s)\n" << format_summary(summarize(rows));
    return kPass;
}

}  // namespace detail

/// Runs one command; returns the process exit status.
inline int run(RunConfig c, std::ostream& out, std::ostream& err) {
    try {
        validate(c);
        if (c.command == "report") return detail::print_report(c, out);
        auto rep = detail::dispatch(c);
        rep.seed = c.seed;
        rep.created_at = utc_timestamp();
        const auto csv = save_report(rep, c.output_dir);
        out << c.command << " (seed " << c.seed << ") -> " << csv.string() << "\n";
        out << format_summary(summarize(rep.rows, rep.bounds));
        for (const auto& ch : rep.checks)
            if (!ch.holds)
                out << "FAIL " << ch.name << " d=" << ch.d << " trial=" << ch.trial << " value=" << format_double(ch.value)
                    << " bound=" << format_double(ch.bound) << "\n";
        out << rep.checks.size() << " checks, " << rep.failures() << " failed\n";
        return rep.passed() ? kPass : kBoundFailure;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const IntegrityError& e) {
        err << "integrity error: " << e.what() << "\n";
        return kUsage;
    } catch (const ResourceError& e) {
        err << "resource limit: " << e.what() << "\n";
        return kResource;
    } catch (const DomainError& e) {
        err << "invalid parameter: " << e.what() << "\n";
        return kUsage;
    } catch (const UnsupportedError& e) {
        err << "unsupported: " << e.what() << "\n";
        return kUsage;
    } catch (const AccuracyError& e) {
        err << "accuracy target missed: " << e.what() << "\n";
        return kBoundFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kResource;
    }
}

/// Thrown by parse_args for --help; carries the formatted help text.
struct HelpRequested {
    std::string text;
};

/// Parses argv into a RunConfig: a JSON --config first, then flags on top.
inline RunConfig parse_args(int argc, const char* const* argv) {
    CLI::App app{"Truncated Riesz transform experiments"};
    app.require_subcommand(0, 1);
    std::string config_path, output;
    std::uint64_t seed = 42;
    std::map<std::string, std::string> flags;
    auto* o_config = app.add_option("--config", config_path, "JSON run configuration");
    auto* o_seed = app.add_option("--seed", seed, "random seed (default 42)");
    auto* o_out = app.add_option("--output", output, "output directory (default results)");
    struct Keyed {
        const char* flag;
        const char* key;
        const char* help;
    };
    const std::vector<Keyed> keyed{
        {"--dims,--d", "dims", "dimensions, comma separated"},
        {"--grid-n", "grid_n", "points per axis, one per dimension"},
        {"--trials", "trials", "random fields per dimension"},
        {"--t-grid", "t_grid", "truncation grid n_min:n_max:depth"},
        {"--band", "band", "band radius of random fields"},
        {"--tol", "tol", "quadrature tolerance"},
        {"--x-grid", "x_grid", "log:a:b:n or lin:a:b:n"},
        {"--t", "t", "truncation parameter(s)"},
        {"--n-angles", "n_angles", "directions in the rotation rule"},
        {"--g", "g", "linear, const, sin:K or pwl:v0:v1:..."},
        {"--n", "n", "dyadic level of g"},
        {"--lmax", "lmax", "finest dyadic level"},
        {"--nu", "nu", "Bessel orders, comma separated"},
        {"--period", "period", "torus side length"},
        {"--image-radius", "image_radius", "periodic images per side"},
        {"--extra-p", "extra_p", "also report p = 1.5 and 3 (true/false)"}};
    std::vector<std::string> values(keyed.size());
    std::vector<CLI::Option*> opts;
    for (std::size_t i = 0; i < keyed.size(); ++i) opts.push_back(app.add_option(keyed[i].flag, values[i], keyed[i].help));
    std::vector<std::string> inputs;
    const std::map<std::string, std::string> about{
        {"verify-specfun", "Bessel envelope, Stirling and Gautschi bounds"},
        {"verify-multiplier", "m(0) = 1 and the three multiplier bounds"},
        {"factorization", "spatial truncated kernel against R_j M^t"},
        {"norm-sweep", "maximal-operator norm ratios across dimensions"},
        {"decomposition", "dyadic plus short-variation split of the maximal function"},
        {"poisson", "Poisson maximal function and square functions"},
        {"ineq", "dyadic square-sum inequality for a profile g"},
        {"rotation", "method of rotations in d = 2, 3"},
        {"report", "merge result CSVs and print a summary"}};
    for (const auto& name : commands()) {
        auto* sub = app.add_subcommand(name, about.at(name))->fallthrough();
        if (name == "report") sub->add_option("inputs", inputs, "CSV files to merge")->expected(1, -1);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested{app.help()};
    } catch (const CLI::CallForAllHelp&) {
        throw HelpRequested{app.help("", CLI::AppFormatMode::All)};
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    RunConfig c;
    if (o_config->count()) c = load_config(config_path);
    for (const auto* sub : app.get_subcommands()) c.command = sub->get_name();
    if (o_seed->count()) c.seed = seed;
    if (o_out->count()) c.output_dir = output;
    for (std::size_t i = 0; i < keyed.size(); ++i)
        if (opts[i]->count()) c.overrides[keyed[i].key] = values[i];
    if (!inputs.empty()) {
        std::string joined;
        for (std::size_t i = 0; i < inputs.size(); ++i) joined += (i ? "," : "") + inputs[i];
        c.overrides["inputs"] = joined;
    }
    return c;
}

inline int main_entry(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    RunConfig c;
    try {
        c = parse_args(argc, argv);
    } catch (const HelpRequested& h) {
        out << h.text;
        return kPass;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    }
    return run(std::move(c), out, err);
}

}  // namespace riesz::cli
