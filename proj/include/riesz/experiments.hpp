#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "riesz/errors.hpp"
#include "riesz/grid.hpp"
#include "riesz/multiplier.hpp"
#include "riesz/operators.hpp"
#include "riesz/report.hpp"
#include "riesz/specfun.hpp"

namespace riesz {

/// Seed of trial `trial` within a run seeded by `seed` (splitmix64).
inline std::uint64_t trial_seed(std::uint64_t seed, int trial) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(trial) + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Band actually used on an N-point grid: at most 3/4 of the Nyquist radius.
inline double effective_band(double band, int N, double period) { return std::min(band, 0.75 * N / (2.0 * period)); }

inline std::string join(const std::vector<double>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << format_double(v[i]);
    return os.str();
}

/// Grid points x_i = a (b/a)^{i/(n-1)}.
inline std::vector<double> log_grid(double a, double b, int n) {
    if (!(a > 0.0) || !(b > a) || n < 2) throw DomainError("log_grid: need 0 < a < b and n >= 2");
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = a * std::pow(b / a, static_cast<double>(i) / (n - 1));
    return xs;
}

inline std::vector<double> linear_grid(double a, double b, int n) {
    if (!(b > a) || n < 2) throw DomainError("linear_grid: need a < b and n >= 2");
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
    return xs;
}

namespace detail {

inline GridSpec make_spec(int d, int N, double L) {
    GridSpec s{d, N, L};
    s.validate();
    return s;
}

inline double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

}  // namespace detail

// ---------------------------------------------------------------------------

struct FactorizationOptions {
    int d = 4;
    int N = 16;
    double period = 1.0;
    std::vector<double> t_list{0.15};
    double band = 3.0;
    int trials = 4;
    std::uint64_t seed = 42;
    int image_radius = 1;
    double residual_bound = 0.1;
    QuadratureConfig q{};
};

/// ‖R_1^t f (sampled kernel) - M^t R_1 f (symbols)‖₂ / ‖f‖₂ per trial and t.
inline ExperimentReport factorization_residual(const FactorizationOptions& o) {
    const auto spec = detail::make_spec(o.d, o.N, o.period);
    ExperimentReport rep;
    rep.experiment_id = "factorization";
    rep.seed = o.seed;
    rep.param("d", o.d);
    rep.param("N", o.N);
    rep.param("L", o.period);
    rep.param("t", join(o.t_list));
    rep.param("band", o.band);
    rep.param("trials", o.trials);
    rep.param("image_radius", o.image_radius);
    rep.bounds["residual"] = {o.residual_bound, false};
    MultiplierCache cache(o.q);
    for (int trial = 0; trial < o.trials; ++trial) {
        const auto f = random_band_limited(spec, o.band, trial_seed(o.seed, trial));
        const double nf = l2_norm(f);
        const auto rf = apply_symbol(f, Riesz{1}, cache);
        for (std::size_t i = 0; i < o.t_list.size(); ++i) {
            const double t = o.t_list[i];
            const auto spatial = truncated_riesz_spatial(f, 1, t, o.image_radius);
            const auto spectral = apply_symbol(rf, FactorM{t}, cache);
            double num = 0.0;
            for (std::size_t k = 0; k < f.samples.size(); ++k) num += std::norm(spatial.samples[k] - spectral.samples[k]);
            const double res = std::sqrt(num * spec.cell_volume()) / nf;
            // With several t values the row key is trial*100 + index of t.
            const int key = o.t_list.size() == 1 ? trial : trial * 100 + static_cast<int>(i);
            rep.add(o.d, o.N, key, "residual", res);
            rep.check("residual<=bound", o.d, key, res, o.residual_bound);
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------

struct SweepOptions {
    std::vector<std::pair<int, int>> pairs{{4, 16}, {6, 10}, {8, 6}, {10, 4}};
    double period = 1.0;
    TruncationGrid grid{};
    double band = 3.0;
    int trials = 8;
    std::uint64_t seed = 42;
    double ceiling = 10.0;
    double median_spread = 0.25;
    bool extra_p = false;
    QuadratureConfig q{};
};

/// r1 = ‖M^* f‖/‖f‖, r2 = ‖R_1^* f‖/‖R_1 f‖, r3 = ‖sup_t |R^t f|‖/‖f‖,
/// r4 = ‖R_1^{*,P} f‖/‖R_1 f‖ over random band-limited fields.
inline ExperimentReport norm_ratio_sweep(const SweepOptions& o) {
    if (o.pairs.empty()) throw DomainError("norm_ratio_sweep: no dimensions");
    ExperimentReport rep;
    rep.experiment_id = "norm_sweep";
    rep.seed = o.seed;
    {
        std::ostringstream os;
        for (std::size_t i = 0; i < o.pairs.size(); ++i) os << (i ? "," : "") << o.pairs[i].first << ":" << o.pairs[i].second;
        rep.param("pairs", os.str());
    }
    rep.param("L", o.period);
    rep.param("t_grid", std::to_string(o.grid.n_min) + ":" + std::to_string(o.grid.n_max) + ":" + std::to_string(o.grid.depth));
    rep.param("band", o.band);
    rep.param("trials", o.trials);
    for (const char* q : {"r1", "r2", "r3", "r4"}) rep.bounds[q] = {o.ceiling, false};
    rep.bounds["riesz_isometry_defect"] = {1e-12, false};
    rep.bounds["r1_riesz"] = {1.0, false};

    const auto ts = o.grid.values();
    MultiplierCache cache(o.q);
    std::vector<std::pair<int, double>> medians;
    for (const auto& [d, N] : o.pairs) {
        const auto spec = detail::make_spec(d, N, o.period);
        const double band = effective_band(o.band, N, o.period);
        std::vector<double> r1s;
        for (int trial = 0; trial < o.trials; ++trial) {
            const auto f = random_band_limited(spec, band, trial_seed(o.seed, trial));
            const double nf = l2_norm(f);

            double iso = 0.0;
            double nr1 = 0.0;
            for (int j = 1; j <= d; ++j) {
                const double nj = l2_norm(apply_symbol(f, Riesz{j}, cache));
                iso += nj * nj;
                if (j == 1) nr1 = nj;
            }
            const double defect = std::abs(iso - nf * nf) / (nf * nf);

            const double r1 = lp_norm(spec, maximal_over(f, Family{FamilyKind::FactorM, 1}, ts, cache)) / nf;
            const double r2 =
                detail::ratio(lp_norm(spec, maximal_over(f, Family{FamilyKind::TruncatedRiesz, 1}, ts, cache)), nr1);
            const auto vmax = vector_maximal(f, ts, cache);
            const double r3 = lp_norm(spec, vmax) / nf;
            const double r4 =
                detail::ratio(lp_norm(spec, maximal_over(f, Family{FamilyKind::ConjugatePoisson, 1}, ts, cache)), nr1);

            // Largest single member ‖M^t f‖/‖f‖, by Parseval.
            auto fhat = forward_transform(f);
            prune_roundoff(fhat);
            double member = 0.0;
            for (double t : ts) {
                double s = 0.0;
                for_each_frequency(spec, [&](std::size_t lin, std::span<const int> k) {
                    const auto& c = fhat.coefficients[lin];
                    if (c == Complex(0.0)) return;
                    const double mv = cache(d, t * std::sqrt(static_cast<double>(detail::squared_length(k))) / o.period);
                    s += mv * mv * std::norm(c);
                });
                member = std::max(member, std::sqrt(s) / nf);
            }

            rep.add(d, N, trial, "r1", r1);
            rep.add(d, N, trial, "r2", r2);
            rep.add(d, N, trial, "r3", r3);
            rep.add(d, N, trial, "r4", r4);
            rep.add(d, N, trial, "member_max", member);
            rep.add(d, N, trial, "r1_riesz", nr1 / nf);
            rep.add(d, N, trial, "riesz_isometry_defect", defect);
            if (o.extra_p) {
                for (double p : {1.5, 3.0}) {
                    const double rp = lp_norm(spec, vmax, p) / lp_norm(f, p);
                    rep.add(d, N, trial, p == 1.5 ? "r3_p1.5" : "r3_p3", rp);
                }
            }
            rep.check("r1<=ceiling", d, trial, r1, o.ceiling);
            rep.check("r2<=ceiling", d, trial, r2, o.ceiling);
            rep.check("r3<=ceiling", d, trial, r3, o.ceiling);
            rep.check("r4<=ceiling", d, trial, r4, o.ceiling);
            rep.check("r1>=member", d, trial, r1, member * (1.0 - 1e-12), true);
            rep.check("riesz_contraction", d, trial, nr1 / nf, 1.0 + 1e-12);
            rep.check("riesz_isometry", d, trial, defect, 1e-12);
            r1s.push_back(r1);
        }
        medians.emplace_back(d, median_of(r1s));
    }
    if (medians.size() >= 2) {
        double lo = medians.front().second, hi = lo;
        for (const auto& [d, m] : medians) {
            lo = std::min(lo, m);
            hi = std::max(hi, m);
        }
        rep.add(0, 0, 0, "r1_median_spread", hi / lo - 1.0);
        rep.bounds["r1_median_spread"] = {o.median_spread, false};
        const bool ok = hi / lo - 1.0 < o.median_spread;
        rep.checks.push_back({"r1_median_spread<0.25", 0, 0, hi / lo - 1.0, o.median_spread, ok});
    }
    return rep;
}

// ---------------------------------------------------------------------------

struct DecompositionOptions {
    int d = 4;
    int N = 16;
    double period = 1.0;
    TruncationGrid grid{};
    double band = 3.0;
    int trials = 8;
    std::uint64_t seed = 42;
    QuadratureConfig q{};
};

/// Splits M^* into its dyadic part and the short variation:
///   a = ‖sup_n |M^{2^n} f|‖, b = ‖(Σ_n sup_{t∈[2^n,2^{n+1})} |M^t f - M^{2^n} f|²)^{1/2}‖,
///   c = ‖sup_n |M^{2^n} f - P_{2^n} f|‖, all over ‖f‖.
inline ExperimentReport decomposition_diagnostics(const DecompositionOptions& o) {
    const auto spec = detail::make_spec(o.d, o.N, o.period);
    const double band = effective_band(o.band, o.N, o.period);
    ExperimentReport rep;
    rep.experiment_id = "decomposition";
    rep.seed = o.seed;
    rep.param("d", o.d);
    rep.param("N", o.N);
    rep.param("L", o.period);
    rep.param("t_grid", std::to_string(o.grid.n_min) + ":" + std::to_string(o.grid.n_max) + ":" + std::to_string(o.grid.depth));
    rep.param("band", band);
    rep.param("trials", o.trials);
    rep.bounds["a"] = {1.3e5, false};
    rep.bounds["b"] = {1.7e8, false};

    const auto ts = o.grid.values();
    std::vector<double> dyadic;
    for (int n = o.grid.n_min; n <= o.grid.n_max; ++n) dyadic.push_back(std::ldexp(1.0, n));
    MultiplierCache cache(o.q);
    const double sd = std::sqrt(static_cast<double>(o.d));

    for (int trial = 0; trial < o.trials; ++trial) {
        const auto f = random_band_limited(spec, band, trial_seed(o.seed, trial));
        const double nf = l2_norm(f);
        const RadialFamily rf(f, {unit_factor()});
        const auto& radii = rf.radii();
        const std::size_t S = radii.size();

        const auto wf = detail::m_weights(o.d, ts, radii, cache);
        const auto wa = detail::m_weights(o.d, dyadic, radii, cache);

        std::vector<std::vector<double>> wb;
        std::vector<int> gb;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const int n = TruncationGrid::dyadic_exponent(ts[i]);
            const auto& base = wa[static_cast<std::size_t>(n - o.grid.n_min)];
            std::vector<double> row(S);
            for (std::size_t s = 0; s < S; ++s) row[s] = wf[i][s] - base[s];
            wb.push_back(std::move(row));
            gb.push_back(n - o.grid.n_min);
        }
        std::vector<std::vector<double>> wc(dyadic.size(), std::vector<double>(S));
        for (std::size_t i = 0; i < dyadic.size(); ++i)
            for (std::size_t s = 0; s < S; ++s) wc[i][s] = wa[i][s] - std::exp(-dyadic[i] * radii[s] / sd);

        const double r1 = lp_norm(spec, detail::sqrt_all(rf.reduce(wf, std::vector<int>(ts.size(), 0), {1.0}))) / nf;
        const double a = lp_norm(spec, detail::sqrt_all(rf.reduce(wa, std::vector<int>(dyadic.size(), 0), {1.0}))) / nf;
        const double b =
            lp_norm(spec, detail::sqrt_all(rf.reduce(wb, gb, std::vector<double>(dyadic.size(), 1.0)))) / nf;
        const double c = lp_norm(spec, detail::sqrt_all(rf.reduce(wc, std::vector<int>(dyadic.size(), 0), {1.0}))) / nf;

        // Σ_n ‖M^{2^n} f - P_{2^n} f‖², by Parseval.
        auto fhat = forward_transform(f);
        prune_roundoff(fhat);
        double csum = 0.0;
        for_each_frequency(spec, [&](std::size_t lin, std::span<const int> k) {
            const auto& cf = fhat.coefficients[lin];
            if (cf == Complex(0.0)) return;
            const double rho = std::sqrt(static_cast<double>(detail::squared_length(k))) / o.period;
            for (double t : dyadic) {
                const double diff = cache(o.d, t * rho) - std::exp(-t * rho / sd);
                csum += diff * diff * std::norm(cf);
            }
        });
        const double c_bound = std::sqrt(csum) / nf;

        rep.add(o.d, o.N, trial, "r1", r1);
        rep.add(o.d, o.N, trial, "a", a);
        rep.add(o.d, o.N, trial, "b", b);
        rep.add(o.d, o.N, trial, "c", c);
        rep.add(o.d, o.N, trial, "c_bound", c_bound);
        rep.check("r1<=a+b", o.d, trial, r1, a + b);
        rep.check("a<=1.3e5", o.d, trial, a, 1.3e5);
        rep.check("b<=1.7e8", o.d, trial, b, 1.7e8);
        rep.check("c<=c_bound", o.d, trial, c, c_bound);
    }
    return rep;
}

// ---------------------------------------------------------------------------

struct PoissonOptions {
    int d = 4;
    int N = 16;
    double period = 1.0;
    double band = 3.0;
    int trials = 8;
    std::uint64_t seed = 42;
    int n_lo = -20;
    int n_hi = 20;
    std::vector<double> t_nodes = log_nodes(-16, 10, 16);
    double slack = 0.05;
};

/// P_* over dyadic times, the square function g, (Σ|S_n f|²)^{1/2}, and the
/// telescoping residual of Σ S_n f.
inline ExperimentReport poisson_suite(const PoissonOptions& o) {
    const auto spec = detail::make_spec(o.d, o.N, o.period);
    const double band = effective_band(o.band, o.N, o.period);
    ExperimentReport rep;
    rep.experiment_id = "poisson";
    rep.seed = o.seed;
    rep.param("d", o.d);
    rep.param("N", o.N);
    rep.param("L", o.period);
    rep.param("band", band);
    rep.param("trials", o.trials);
    rep.param("n_range", std::to_string(o.n_lo) + ":" + std::to_string(o.n_hi));
    rep.param("t_nodes", std::to_string(o.t_nodes.size()) + " log-spaced in [" + format_double(o.t_nodes.front()) +
                             ", " + format_double(o.t_nodes.back()) + "]");
    const double half_bound = 1.0 / std::sqrt(2.0) + o.slack;
    rep.bounds["pstar"] = {4.0, false};
    rep.bounds["g_ratio"] = {half_bound, false};
    rep.bounds["sn_ratio"] = {half_bound, false};
    rep.bounds["telescoping"] = {1e-6, false};

    std::vector<double> dyadic;
    for (int n = o.n_lo; n <= o.n_hi; ++n) dyadic.push_back(std::ldexp(1.0, n));
    MultiplierCache cache;
    for (int trial = 0; trial < o.trials; ++trial) {
        const auto f = random_band_limited(spec, band, trial_seed(o.seed, trial));
        const double nf = l2_norm(f);
        const double pstar = lp_norm(spec, maximal_over(f, Family{FamilyKind::Poisson, 1}, dyadic, cache)) / nf;
        const double g = lp_norm(spec, square_function(f, o.t_nodes)) / nf;
        const double sn = lp_norm(spec, projection_square_sum(f, o.n_lo, o.n_hi)) / nf;
        const double tele = relative_l2_error(poisson_projection_sum(f, o.n_lo, o.n_hi), f);
        rep.add(o.d, o.N, trial, "pstar", pstar);
        rep.add(o.d, o.N, trial, "g_ratio", g);
        rep.add(o.d, o.N, trial, "sn_ratio", sn);
        rep.add(o.d, o.N, trial, "telescoping", tele);
        rep.check("pstar<=4", o.d, trial, pstar, 4.0);
        rep.check("g_ratio<=1/sqrt2+slack", o.d, trial, g, half_bound);
        rep.check("sn_ratio<=1/sqrt2+slack", o.d, trial, sn, half_bound);
        rep.check("telescoping<=1e-6", o.d, trial, tele, 1e-6);
    }
    // Single mode: g(f) = |f|/2 in the continuum.
    std::vector<int> k0(static_cast<std::size_t>(o.d), 0);
    k0[0] = 1;
    const auto mode = plane_wave(spec, k0);
    const double g1 = lp_norm(spec, square_function(mode, o.t_nodes)) / l2_norm(mode);
    rep.add(o.d, o.N, 0, "g_single_mode", g1);
    rep.check("|g_single_mode-1/2|<=1e-2", o.d, 0, std::abs(g1 - 0.5), 1e-2);
    return rep;
}

// ---------------------------------------------------------------------------

/// Real function on [2^n, 2^{n+1}] parsed from "linear", "const", "sin:K"
/// (sin(Kπt)) or "pwl:v0:v1:...:vm" (piecewise linear through equispaced knots).
inline std::function<double(double)> parse_g(const std::string& spec, int n) {
    const double lo = std::ldexp(1.0, n), hi = std::ldexp(1.0, n + 1);
    const auto parts = split(spec, ':');
    if (parts.empty()) throw UsageError("empty g specification");
    try {
        if (parts[0] == "linear" && parts.size() == 1) return [](double t) { return t; };
        if (parts[0] == "const" && parts.size() == 1) return [](double) { return 1.0; };
        if (parts[0] == "sin" && parts.size() == 2) {
            const double k = std::stod(parts[1]);
            return [k](double t) { return std::sin(k * std::numbers::pi * t); };
        }
        if (parts[0] == "pwl" && parts.size() >= 3) {
            std::vector<double> v;
            for (std::size_t i = 1; i < parts.size(); ++i) v.push_back(std::stod(parts[i]));
            return [v, lo, hi](double t) {
                const double u = std::clamp((t - lo) / (hi - lo), 0.0, 1.0) * static_cast<double>(v.size() - 1);
                const std::size_t i = std::min(static_cast<std::size_t>(u), v.size() - 2);
                const double w = u - static_cast<double>(i);
                return (1.0 - w) * v[i] + w * v[i + 1];
            };
        }
    } catch (const std::logic_error&) {
    }
    throw UsageError("unrecognized g specification '" + spec + "' (use linear, const, sin:K or pwl:v0:v1:...)");
}

struct InequalityOptions {
    std::string g = "linear";
    int n = 0;
    int lmax = 10;
    int dense_exponent = 16;  // 2^e + 1 dense samples
};

/// sup_t |g(t) - g(2^n)| against √2 Σ_{l ≤ L} (Σ_m |g increments at level l|²)^{1/2}.
/// decay(L) is the largest oscillation of g inside one level-L cell.
inline ExperimentReport numerical_inequality_check(const InequalityOptions& o) {
    if (o.lmax < 0 || o.lmax > 24) throw DomainError("lmax must lie in 0..24");
    const int e = std::max(o.dense_exponent, o.lmax + 4);
    if (e > 26) throw ResourceError("dense sample too large");
    const auto g = parse_g(o.g, o.n);
    ExperimentReport rep;
    rep.experiment_id = "ineq";
    rep.seed = 0;
    rep.param("g", o.g);
    rep.param("n", o.n);
    rep.param("lmax", o.lmax);
    rep.param("dense_samples", (1 << e) + 1);

    const double lo = std::ldexp(1.0, o.n);
    const std::size_t count = (std::size_t{1} << e) + 1;
    std::vector<double> vals(count);
    for (std::size_t i = 0; i < count; ++i) vals[i] = g(lo + lo * std::ldexp(static_cast<double>(i), -e));
    double lhs = 0.0;
    for (double v : vals) lhs = std::max(lhs, std::abs(v - vals[0]));
    rep.add(0, 0, 0, "lhs", lhs);

    double rhs = 0.0, prev = -1.0;
    for (int l = 0; l <= o.lmax; ++l) {
        const std::size_t step = std::size_t{1} << (e - l);
        double s = 0.0, decay = 0.0;
        for (std::size_t m = 0; m < (std::size_t{1} << l); ++m) {
            const std::size_t a = m * step, b = a + step;
            const double inc = vals[b] - vals[a];
            s += inc * inc;
            for (std::size_t i = a; i <= b; ++i) decay = std::max(decay, std::abs(vals[i] - vals[a]));
        }
        rhs += std::sqrt(2.0) * std::sqrt(s);
        rep.add(0, 0, l, "rhs", rhs);
        rep.add(0, 0, l, "decay", decay);
        rep.check("lhs<=rhs+decay", 0, l, lhs, rhs + decay);
        rep.check("rhs_nondecreasing", 0, l, rhs, prev, true);
        prev = rhs;
    }
    return rep;
}

// ---------------------------------------------------------------------------

struct RotationOptions {
    int d = 2;
    int N = 64;
    double period = 1.0;
    double t = 0.1;
    int n_angles = 256;
    double band = 3.0;
    std::uint64_t seed = 42;
    double error_bound = 1e-2;
    std::pair<double, double> halving{0.25, 0.75};
    QuadratureConfig q{};
};

/// Method of rotations against the spectral R_1^t at n, 2n and 4n angles,
/// plus the sphere moment identities for d = 2..16.
inline ExperimentReport rotation_check(const RotationOptions& o) {
    const auto spec = detail::make_spec(o.d, o.N, o.period);
    if (o.d < 2 || o.d > 3) throw UnsupportedError("rotation_check supports d = 2, 3");
    ExperimentReport rep;
    rep.experiment_id = "rotation";
    rep.seed = o.seed;
    rep.param("d", o.d);
    rep.param("N", o.N);
    rep.param("L", o.period);
    rep.param("t", o.t);
    rep.param("n_angles", o.n_angles);
    rep.param("band", o.band);
    rep.bounds["rel_error"] = {o.error_bound, false};

    MultiplierCache cache(o.q);
    const auto f = random_band_limited(spec, o.band, trial_seed(o.seed, 0));
    const auto ref = apply_symbol(f, TruncatedRiesz{1, o.t}, cache);
    std::vector<double> errs;
    for (int mult : {1, 2, 4}) {
        const int n = o.n_angles * mult;
        const double err = relative_l2_error(rotation_reconstruct(f, 1, o.t, n), ref);
        rep.add(o.d, o.N, n, mult == 1 ? "rel_error" : "rel_error_refined", err);
        errs.push_back(err);
    }
    rep.check("rel_error<=bound", o.d, o.n_angles, errs[0], o.error_bound);
    for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
        const double r = detail::ratio(errs[i + 1], errs[i]);
        const int n = o.n_angles << (i + 1);
        rep.add(o.d, o.N, n, "halving_ratio", r);
        if (i == 0) {
            rep.check("halving_ratio>=lo", o.d, n, r, o.halving.first, true);
            rep.check("halving_ratio<=hi", o.d, n, r, o.halving.second);
        }
    }
    for (int dd = 2; dd <= 16; ++dd) {
        const double err = std::abs(sphere_moment(2.0, dd) - sphere_area(dd) / dd);
        rep.add(dd, 0, 0, "sphere_moment_q2_error", err);
        rep.check("sphere_moment_q2", dd, 0, err, 1e-10);
        const double cs = kernel_constant(dd) * sphere_area(dd);
        rep.add(dd, 0, 0, "cd_Sd", cs);
        rep.check("cd_Sd<=sqrt(2d/pi)", dd, 0, cs, std::sqrt(2.0 * dd / std::numbers::pi));
    }
    rep.bounds["sphere_moment_q2_error"] = {1e-10, false};
    return rep;
}

// ---------------------------------------------------------------------------

/// Lemma checks |m(x)-1| ≤ 20x/√d, |m(x)| ≤ 6·10⁴√d/x, |x m'(x)| ≤ 10⁴ and
/// m(0) = 1 on every (d, x). Ratios |value|/bound are recorded, so every
/// ratio must stay ≤ 1.
inline ExperimentReport multiplier_bound_suite(const std::vector<int>& dims, const std::vector<double>& xs,
                                               const QuadratureConfig& q = {}) {
    if (dims.empty()) throw DomainError("multiplier_bound_suite: no dimensions");
    if (xs.empty()) throw DomainError("multiplier_bound_suite: no arguments");
    ExperimentReport rep;
    rep.experiment_id = "verify_multiplier";
    rep.seed = 0;
    {
        std::ostringstream os;
        for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "," : "") << dims[i];
        rep.param("dims", os.str());
    }
    rep.param("x_points", xs.size());
    rep.param("x_min", *std::min_element(xs.begin(), xs.end()));
    rep.param("x_max", *std::max_element(xs.begin(), xs.end()));
    rep.param("abs_tol", q.abs_tol);
    for (const char* n : {"small_arg_ratio", "large_arg_ratio", "derivative_ratio"}) rep.bounds[n] = {1.0, false};
    rep.bounds["m0_error"] = {1e-8, false};

    for (int d : dims) {
        detail::check_multiplier_dimension(d, 4);
        std::vector<double> all(xs.begin(), xs.end());
        all.push_back(0.0);
        const auto vals = m_eval_batch(d, all, q);
        const double m0err = std::abs(vals.back().value - 1.0);
        rep.add(d, 0, 0, "m0_error", m0err);
        rep.check("m(0)=1", d, 0, m0err, 1e-8);
        const double root = std::sqrt(static_cast<double>(d));
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double x = xs[i];
            const double m = vals[i].value;
            const int idx = static_cast<int>(i);
            if (x <= root) {
                const auto c = BoundCheck::make(x, m - 1.0, 20.0 * x / root);
                rep.add(d, 0, idx, "small_arg_ratio", c.bound > 0 ? std::abs(c.value) / c.bound : 0.0);
                rep.check("small_arg", d, idx, std::abs(c.value), c.bound);
            }
            if (x >= root) {
                const auto c = BoundCheck::make(x, m, 6e4 * root / x);
                rep.add(d, 0, idx, "large_arg_ratio", std::abs(c.value) / c.bound);
                rep.check("large_arg", d, idx, std::abs(c.value), c.bound);
            }
            if (x > 0.0) {
                const auto c = check_derivative(d, x, q);
                rep.add(d, 0, idx, "derivative_ratio", std::abs(c.value) / c.bound);
                rep.check("derivative", d, idx, std::abs(c.value), c.bound);
            }
        }
        rep.add(d, 0, 0, "m_sup", m_sup(d, q));
    }
    return rep;
}

/// |J_ν(t)| against the envelope and against 1, plus the gamma brackets.
inline ExperimentReport specfun_bound_suite(const std::vector<double>& nus, const std::vector<double>& ts,
                                            const QuadratureConfig& q = {}) {
    if (nus.empty() || ts.empty()) throw DomainError("specfun_bound_suite: empty grid");
    ExperimentReport rep;
    rep.experiment_id = "verify_specfun";
    rep.seed = 0;
    rep.param("nu", join(nus));
    rep.param("t_points", ts.size());
    rep.param("t_max", *std::max_element(ts.begin(), ts.end()));
    rep.bounds["envelope_ratio"] = {1.0, false};
    rep.bounds["abs_j"] = {1.0, false};
    for (const double nu : nus) {
        const int dn = static_cast<int>(std::lround(nu * 2));  // key rows by 2ν
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const double t = ts[i];
            const double j = bessel_j(nu, t, q);
            const double env = bessel_envelope(nu, t);
            const int idx = static_cast<int>(i);
            rep.add(dn, 0, idx, "abs_j", std::abs(j));
            rep.add(dn, 0, idx, "envelope_ratio", env > 0.0 ? std::abs(j) / env : 0.0);
            rep.check("|J|<=envelope", dn, idx, std::abs(j), env);
            rep.check("|J|<=1", dn, idx, std::abs(j), 1.0);
        }
    }
    int idx = 0;
    for (double x : {0.25, 0.5, 1.0, 2.5, 10.0, 50.0, 170.0}) {
        const auto b = stirling_bounds(x);
        const double g = std::tgamma(x);
        rep.add(0, 0, idx, "stirling_lower_gap", g - b.lower);
        rep.add(0, 0, idx, "stirling_upper_gap", b.upper - g);
        rep.check("stirling_lower", 0, idx, b.lower, g);
        rep.check("stirling_upper", 0, idx, g, b.upper);
        ++idx;
    }
    idx = 0;
    for (double x : {0.5, 1.0, 4.0, 20.0}) {
        for (double s : {0.1, 0.5, 0.9}) {
            const auto b = gautschi_bounds(x, s);
            const double r = std::exp(log_gamma(x + 1.0) - log_gamma(x + s));
            rep.add(0, 0, idx, "gautschi_ratio", r);
            rep.check("gautschi_lower", 0, idx, b.lower, r);
            rep.check("gautschi_upper", 0, idx, r, b.upper);
            ++idx;
        }
    }
    return rep;
}

}  // namespace riesz
