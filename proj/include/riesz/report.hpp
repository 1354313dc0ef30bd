#pragma once

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "riesz/errors.hpp"

namespace riesz {

struct ReportRow {
    int d = 0;
    int N = 0;
    int trial = 0;
    std::string quantity;
    double value = 0.0;

    auto key() const { return std::tie(d, N, trial, quantity); }
};

/// One inequality value ≤ bound evaluated by an experiment.
struct CheckResult {
    std::string name;
    int d = 0;
    int trial = 0;
    double value = 0.0;
    double bound = 0.0;
    bool holds = false;
};

/// Per-quantity ceiling shown in summaries; a group fails when its max exceeds it.
struct QuantityBound {
    double value = 0.0;
    bool lower = false;  // bound is a floor rather than a ceiling
};

struct ExperimentReport {
    std::string experiment_id;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> parameters;
    std::vector<ReportRow> rows;
    std::string created_at;
    std::vector<CheckResult> checks;
    std::map<std::string, QuantityBound> bounds;

    void add(int d, int N, int trial, std::string quantity, double value) {
        rows.push_back({d, N, trial, std::move(quantity), value});
    }

    void param(std::string key, std::string value) { parameters.emplace_back(std::move(key), std::move(value)); }

    template <class T>
    void param(std::string key, const T& value) {
        std::ostringstream os;
        os << std::setprecision(17) << value;
        parameters.emplace_back(std::move(key), os.str());
    }

    /// Records value ≤ bound (or value ≥ bound when `lower`).
    bool check(std::string name, int d, int trial, double value, double bound, bool lower = false) {
        const bool ok = std::isfinite(value) && (lower ? value >= bound : value <= bound);
        checks.push_back({std::move(name), d, trial, value, bound, ok});
        return ok;
    }

    bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.holds; });
    }

    std::size_t failures() const {
        return static_cast<std::size_t>(
            std::count_if(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.holds; }));
    }

    void sort_rows() {
        std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) { return a.key() < b.key(); });
    }

    /// Values of one quantity in row order.
    std::vector<double> values(const std::string& quantity, int d = -1) const {
        std::vector<double> out;
        for (const auto& r : rows)
            if (r.quantity == quantity && (d < 0 || r.d == d)) out.push_back(r.value);
        return out;
    }
};

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline constexpr const char* kCsvHeader = "experiment_id,seed,d,N,trial,quantity,value";

inline std::string to_csv(ExperimentReport report) {
    report.sort_rows();
    std::ostringstream os;
    os << kCsvHeader << '\n';
    for (const auto& r : report.rows) {
        os << report.experiment_id << ',' << report.seed << ',' << r.d << ',' << r.N << ',' << r.trial << ','
           << r.quantity << ',' << format_double(r.value) << '\n';
    }
    return os.str();
}

inline nlohmann::json to_json(ExperimentReport report) {
    report.sort_rows();
    nlohmann::json j;
    j["experiment_id"] = report.experiment_id;
    j["seed"] = report.seed;
    j["created_at"] = report.created_at;
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : report.parameters) params[k] = v;
    j["parameters"] = params;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows)
        rows.push_back({{"d", r.d}, {"N", r.N}, {"trial", r.trial}, {"quantity", r.quantity}, {"value", r.value}});
    j["rows"] = rows;
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : report.checks)
        checks.push_back({{"name", c.name}, {"d", c.d}, {"trial", c.trial}, {"value", c.value}, {"bound", c.bound},
                          {"holds", c.holds}});
    j["checks"] = checks;
    j["passed"] = report.passed();
    return j;
}

/// Writes `content` to `path` through a temporary file and a rename.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot write " + tmp.string());
        os << content;
        os.flush();
        if (!os) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

/// Writes <dir>/<experiment_id>.csv and .json; returns the CSV path.
inline std::filesystem::path save_report(const ExperimentReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto csv = dir / (report.experiment_id + ".csv");
    write_atomic(csv, to_csv(report));
    write_atomic(dir / (report.experiment_id + ".json"), to_json(report).dump(2) + "\n");
    return csv;
}

struct CsvRecord {
    std::string experiment_id;
    std::uint64_t seed = 0;
    ReportRow row;
};

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

inline std::vector<CsvRecord> read_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(is, line) || line != kCsvHeader) throw IntegrityError(path.string() + ": unexpected CSV header");
    std::vector<CsvRecord> out;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 7) throw IntegrityError(path.string() + ":" + std::to_string(lineno) + ": expected 7 fields");
        try {
            CsvRecord r;
            r.experiment_id = f[0];
            r.seed = std::stoull(f[1]);
            r.row = {std::stoi(f[2]), std::stoi(f[3]), std::stoi(f[4]), f[5], std::stod(f[6])};
            out.push_back(std::move(r));
        } catch (const std::logic_error&) {
            throw IntegrityError(path.string() + ":" + std::to_string(lineno) + ": malformed field");
        }
    }
    return out;
}

/// Merges CSV outputs. Identical duplicate rows collapse; the same
/// (experiment_id, seed, d, N, trial, quantity) with two values is an
/// IntegrityError. Output is sorted by that key.
inline std::vector<CsvRecord> merge_csv(const std::vector<std::filesystem::path>& paths) {
    using Key = std::tuple<std::string, std::uint64_t, int, int, int, std::string>;
    std::map<Key, CsvRecord> merged;
    for (const auto& p : paths) {
        for (auto& r : read_csv(p)) {
            Key k{r.experiment_id, r.seed, r.row.d, r.row.N, r.row.trial, r.row.quantity};
            auto [it, inserted] = merged.emplace(k, r);
            if (!inserted && format_double(it->second.row.value) != format_double(r.row.value)) {
                throw IntegrityError("conflicting values for " + r.experiment_id + " seed " + std::to_string(r.seed) +
                                     " d=" + std::to_string(r.row.d) + " trial=" + std::to_string(r.row.trial) + " " +
                                     r.row.quantity);
            }
        }
    }
    std::vector<CsvRecord> out;
    out.reserve(merged.size());
    for (auto& [k, v] : merged) out.push_back(std::move(v));
    return out;
}

struct SummaryLine {
    int d = 0;
    std::string quantity;
    std::size_t count = 0;
    double min = 0.0, median = 0.0, max = 0.0;
    bool has_bound = false;
    QuantityBound bound;
    bool pass = true;
};

inline double median_of(std::vector<double> v) {
    if (v.empty()) return std::nan("");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Min/median/max per (d, quantity), ordered by d then quantity.
inline std::vector<SummaryLine> summarize(const std::vector<ReportRow>& rows,
                                          const std::map<std::string, QuantityBound>& bounds = {}) {
    std::map<std::pair<int, std::string>, std::vector<double>> groups;
    for (const auto& r : rows) groups[{r.d, r.quantity}].push_back(r.value);
    std::vector<SummaryLine> out;
    for (const auto& [key, vals] : groups) {
        SummaryLine s;
        s.d = key.first;
        s.quantity = key.second;
        s.count = vals.size();
        s.min = *std::min_element(vals.begin(), vals.end());
        s.max = *std::max_element(vals.begin(), vals.end());
        s.median = median_of(vals);
        if (auto it = bounds.find(s.quantity); it != bounds.end()) {
            s.has_bound = true;
            s.bound = it->second;
            s.pass = s.bound.lower ? s.min >= s.bound.value : s.max <= s.bound.value;
        }
        out.push_back(s);
    }
    return out;
}

inline std::string format_summary(const std::vector<SummaryLine>& lines) {
    std::ostringstream os;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%4s  %-22s %6s %13s %13s %13s %13s  %s\n", "d", "quantity", "count", "min", "median",
                  "max", "bound", "status");
    os << buf;
    for (const auto& s : lines) {
        std::string bound = "-";
        if (s.has_bound) {
            char b[32];
            std::snprintf(b, sizeof b, "%s%.6g", s.bound.lower ? ">=" : "<=", s.bound.value);
            bound = b;
        }
        std::snprintf(buf, sizeof buf, "%4d  %-22s %6zu %13.6g %13.6g %13.6g %13s  %s\n", s.d, s.quantity.c_str(), s.count,
                      s.min, s.median, s.max, bound.c_str(), s.has_bound ? (s.pass ? "pass" : "FAIL") : "-");
        os << buf;
    }
    return os.str();
}

}  // namespace riesz
