#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "riesz/errors.hpp"
#include "riesz/quadrature.hpp"
#include "riesz/specfun.hpp"

namespace riesz {

/// c_d = Γ((d+1)/2) / π^{(d+1)/2}, the normalization of the Riesz kernel.
inline double kernel_constant(int d) {
    const double h = 0.5 * (d + 1);
    return std::exp(std::lgamma(h) - h * std::log(std::numbers::pi));
}

/// Surface area of the unit sphere S^{d-1}.
inline double sphere_area(int d) {
    return 2.0 * std::exp(0.5 * d * std::log(std::numbers::pi) - std::lgamma(0.5 * d));
}

struct MultiplierEval {
    int dimension = 0;
    double argument = 0.0;
    double value = 0.0;
    double est_error = 0.0;
};

namespace detail {

// Prefactor 2^{d/2} Γ((d+1)/2) / √π of the multiplier integral.
inline double multiplier_prefactor(int d) {
    const double nu = 0.5 * d;
    return std::exp(nu * std::log(2.0) + std::lgamma(nu + 0.5) - 0.5 * std::log(std::numbers::pi));
}

// Integrand r^{ν - power} · J_ν(r)/r^ν, i.e. r^{-power} J_ν(r).
struct BesselPowerIntegrand {
    double order;
    double extra_power;  // power - order
    double tol;          // absolute tolerance on J_ν(r)/r^ν
    int bisections;

    double operator()(double r) const {
        const double scaled = bessel_j_over_power(order, r, tol, bisections);
        return extra_power == 0.0 ? scaled : scaled * std::pow(r, -extra_power);
    }
};

inline BesselPowerIntegrand make_integrand(double order, double power, const QuadratureConfig& q) {
    const double scale_at_zero = std::exp(-order * std::log(2.0) - std::lgamma(order + 1.0));
    return {order, power - order, 1e-16 * scale_at_zero, q.max_panels};
}

// ∫_lo^hi r^{-power} J_ν(r) dr over a stretch, one panel per half period.
inline QuadResult bessel_power_segment(const BesselPowerIntegrand& f, double lo, double hi, double abs_tol,
                                       const QuadratureConfig& q) {
    QuadResult total{0.0, 0.0, 0, true};
    const int pieces = std::max(1, static_cast<int>(std::ceil((hi - lo) / std::numbers::pi)));
    const double width = (hi - lo) / pieces;
    for (int i = 0; i < pieces; ++i) {
        const double a = lo + i * width;
        const double b = (i + 1 == pieces) ? hi : lo + (i + 1) * width;
        const auto r = integrate_adaptive(f, a, b, abs_tol / pieces, 1, q.max_panels);
        total.value += r.value;
        total.error += r.error;
        total.panels += r.panels;
        total.converged = total.converged && r.converged;
    }
    return total;
}

// ∫_a^∞ r^{-power} J_ν(r) dr. The oscillating tail is summed over half
// periods and extrapolated; see oscillatory_tail.
inline TailResult bessel_power_tail(double order, double power, double a, double abs_tol, const QuadratureConfig& q) {
    const auto f = make_integrand(order, power, q);
    auto panel = [&](double lo, double hi, double tol) {
        auto r = integrate_adaptive(f, lo, hi, tol / 64.0, 1, q.max_panels);
        if (!r.converged) throw AccuracyError("multiplier: panel quadrature did not converge", r.value, r.error);
        return r;
    };
    return oscillatory_tail(panel, a, 2.0 * order + 10.0, abs_tol, q);
}

inline void check_multiplier_dimension(int d, int min_d) {
    if (d < min_d) {
        throw DomainError("multiplier: dimension " + std::to_string(d) + " is below the supported minimum " +
                          std::to_string(min_d));
    }
}

// Independent tails are cheaper than marching once the gap between
// neighbouring arguments exceeds this many half periods.
inline constexpr double kMarchLimit = 64.0 * std::numbers::pi;

inline std::vector<MultiplierEval> multiplier_batch(int d, std::span<const double> xs, const QuadratureConfig& q) {
    q.validate();
    const double nu = 0.5 * d;
    const double pref = multiplier_prefactor(d);
    const double tail_tol = std::min(q.abs_tol, q.tail_tol) / pref;
    const auto f = make_integrand(nu, nu, q);

    std::vector<std::size_t> order(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] >= 0.0) || !std::isfinite(xs[i])) throw DomainError("multiplier: argument must be finite and >= 0");
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return xs[i] > xs[j]; });

    std::vector<MultiplierEval> out(xs.size());
    double prev_r = std::numeric_limits<double>::infinity();
    double tail = 0.0, tail_err = 0.0;
    for (const std::size_t idx : order) {
        const double r = 2.0 * std::numbers::pi * xs[idx];
        if (r == prev_r) {
            // duplicate argument, reuse
        } else if (prev_r - r <= kMarchLimit) {
            const auto seg = bessel_power_segment(f, r, prev_r, tail_tol, q);
            if (!seg.converged) throw AccuracyError("multiplier: quadrature did not converge", pref * (tail + seg.value), pref * seg.error);
            tail += seg.value;
            tail_err += seg.error;
        } else {
            const auto t = bessel_power_tail(nu, nu, r, tail_tol, q);
            tail = t.value;
            tail_err = t.error;
        }
        prev_r = r;
        out[idx] = {d, xs[idx], pref * tail, pref * tail_err};
    }
    return out;
}

}  // namespace detail

/// The truncation multiplier
///   m(x) = 2^{d/2} Γ((d+1)/2)/√π · ∫_{2πx}^∞ r^{-d/2} J_{d/2}(r) dr
/// for any d ≥ 2, where the integral converges absolutely. The operators use
/// this entry point so that the method of rotations can be checked in d = 2, 3;
/// m_eval is the d ≥ 4 form the quantitative bounds are stated for.
inline MultiplierEval radial_multiplier(int d, double x, const QuadratureConfig& q = {}) {
    detail::check_multiplier_dimension(d, 2);
    const double xs[1] = {x};
    return detail::multiplier_batch(d, xs, q).front();
}

/// Many evaluations of the same dimension at once. Sorted arguments that sit
/// within a few dozen half periods of each other share one marched integral.
inline std::vector<MultiplierEval> radial_multiplier_batch(int d, std::span<const double> xs,
                                                           const QuadratureConfig& q = {}) {
    detail::check_multiplier_dimension(d, 2);
    return detail::multiplier_batch(d, xs, q);
}

/// m(x) for d ≥ 4 with absolute error at most q.abs_tol.
inline MultiplierEval m_eval(int d, double x, const QuadratureConfig& q = {}) {
    detail::check_multiplier_dimension(d, 4);
    return radial_multiplier(d, x, q);
}

inline std::vector<MultiplierEval> m_eval_batch(int d, std::span<const double> xs, const QuadratureConfig& q = {}) {
    detail::check_multiplier_dimension(d, 4);
    return detail::multiplier_batch(d, xs, q);
}

/// m'(x) = -2√π Γ((d+1)/2) (πx)^{-d/2} J_{d/2}(2πx), evaluated through
/// J_ν(r)/r^ν so that small x does not overflow.
inline double m_prime(int d, double x, const QuadratureConfig& q = {}) {
    detail::check_multiplier_dimension(d, 4);
    if (!(x > 0.0)) throw DomainError("m_prime: argument must be positive");
    const double nu = 0.5 * d;
    const double r = 2.0 * std::numbers::pi * x;
    const double coef = std::exp(std::log(2.0) + 0.5 * std::log(std::numbers::pi) + std::lgamma(nu + 0.5) +
                                 nu * std::log(2.0));
    const double scale0 = std::exp(-nu * std::log(2.0) - std::lgamma(nu + 1.0));
    const double scaled = detail::bessel_j_over_power(nu, r, std::min(1e-16, q.abs_tol) * scale0, q.max_panels);
    return -coef * scaled;
}

/// Radial profile of the Fourier transform of c_d χ_{|x|>1} |x|^{-d-1}:
///   h(x) = 2π c_d x^{1-d/2} ∫_1^∞ r^{-d/2-1} J_{d/2-1}(2πrx) dr.
/// Substituting u = 2πrx leaves 2π c_d (2π)^{d/2} x ∫_{2πx}^∞ u^{-d/2-1} J_{d/2-1}(u) du.
inline double h_eval(int d, double x, const QuadratureConfig& q = {}) {
    detail::check_multiplier_dimension(d, 4);
    if (!(x > 0.0)) throw DomainError("h_eval: argument must be positive");
    q.validate();
    const double order = 0.5 * d - 1.0;
    const double pref = 2.0 * std::numbers::pi * kernel_constant(d) *
                        std::exp(0.5 * d * std::log(2.0 * std::numbers::pi)) * x;
    const double a = 2.0 * std::numbers::pi * x;
    const auto tail = detail::bessel_power_tail(order, order + 2.0, a, std::min(q.abs_tol, q.tail_tol) / pref, q);
    return pref * tail.value;
}

/// |m(x) - 1| ≤ 20 x/√d on 0 ≤ x ≤ √d.
inline BoundCheck check_small_arg(int d, double x, const QuadratureConfig& q = {}) {
    detail::check_multiplier_dimension(d, 4);
    const double root = std::sqrt(static_cast<double>(d));
    if (!(x >= 0.0 && x <= root * (1.0 + 1e-12))) throw DomainError("check_small_arg: x must lie in [0, sqrt(d)]");
    return BoundCheck::make(x, m_eval(d, x, q).value - 1.0, 20.0 * x / root);
}

/// |m(x)| ≤ 6·10⁴ √d / x on x ≥ √d.
inline BoundCheck check_large_arg(int d, double x, const QuadratureConfig& q = {}) {
    detail::check_multiplier_dimension(d, 4);
    const double root = std::sqrt(static_cast<double>(d));
    if (!(x >= root * (1.0 - 1e-12))) throw DomainError("check_large_arg: x must be at least sqrt(d)");
    return BoundCheck::make(x, m_eval(d, x, q).value, 6e4 * root / x);
}

/// |x m'(x)| ≤ 10⁴.
inline BoundCheck check_derivative(int d, double x, const QuadratureConfig& q = {}) {
    if (!(x > 0.0)) throw DomainError("check_derivative: argument must be positive");
    return BoundCheck::make(x, x * m_prime(d, x, q), 1e4);
}

/// sup_{s ≥ 0} |m(s)|: maximum over a grid on [0, d] with step at most
/// `step_fraction`·√d, combined with the bound |m(s)| ≤ P (2πs)^{1-d/2}/(d/2-1)
/// that |J| ≤ 1 gives beyond s = d.
inline double m_sup(int d, const QuadratureConfig& q = {}, double step_fraction = 0.01) {
    detail::check_multiplier_dimension(d, 4);
    const double step_cap = step_fraction * std::sqrt(static_cast<double>(d));
    const int n = static_cast<int>(std::ceil(d / step_cap));
    std::vector<double> xs(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) xs[static_cast<std::size_t>(i)] = d * static_cast<double>(i) / n;
    double best = 0.0;
    for (const auto& e : m_eval_batch(d, xs, q)) best = std::max(best, std::abs(e.value));
    const double nu = 0.5 * d;
    const double beyond =
        detail::multiplier_prefactor(d) * std::pow(2.0 * std::numbers::pi * d, 1.0 - nu) / (nu - 1.0);
    return std::max(best, beyond);
}

/// Memo of m values keyed by (d, x). Operators look radii up here; prefill
/// with the whole set of arguments an experiment needs so they are computed
/// in one marched batch. Not synchronized; one cache per thread.
class MultiplierCache {
public:
    explicit MultiplierCache(QuadratureConfig q = {}) : q_(q) {}

    const QuadratureConfig& config() const { return q_; }

    void prefill(int d, std::span<const double> xs) {
        std::vector<double> missing;
        auto& table = tables_[d];
        for (double x : xs) {
            if (!table.contains(x)) missing.push_back(x);
        }
        if (missing.empty()) return;
        std::sort(missing.begin(), missing.end());
        missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
        const auto vals = radial_multiplier_batch(d, missing, q_);
        for (std::size_t i = 0; i < missing.size(); ++i) table.emplace(missing[i], vals[i].value);
    }

    double operator()(int d, double x) {
        auto& table = tables_[d];
        if (auto it = table.find(x); it != table.end()) return it->second;
        const double v = radial_multiplier(d, x, q_).value;
        table.emplace(x, v);
        return v;
    }

    std::size_t size() const {
        std::size_t n = 0;
        for (const auto& [d, t] : tables_) n += t.size();
        return n;
    }

private:
    QuadratureConfig q_;
    std::map<int, std::map<double, double>> tables_;
};

}  // namespace riesz
