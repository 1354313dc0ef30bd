#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <utility>

#include "riesz/errors.hpp"
#include "riesz/quadrature.hpp"

namespace riesz {

/// Outcome of checking |value| ≤ bound.
struct BoundCheck {
    double argument = 0.0;
    double value = 0.0;
    double bound = 0.0;
    bool holds = false;
    double margin = 0.0;  // bound - |value|

    static BoundCheck make(double argument, double value, double bound) {
        return {argument, value, bound, std::abs(value) <= bound, bound - std::abs(value)};
    }
};

/// ln Γ(x) for x > 0.
inline double log_gamma(double x) {
    if (!(x > 0.0)) throw DomainError("log_gamma: argument must be positive");
    return std::lgamma(x);
}

namespace detail {

constexpr double kPi = std::numbers::pi;

// (t/2)^ν / Γ(ν+1) bounds the absolute roundoff amplification of the Poisson
// integral; past this the cancellation eats the answer.
inline bool poisson_route_is_stable(double nu, double t) {
    if (t <= 2.0) return true;
    return nu * std::log(0.5 * t) - std::lgamma(nu + 1.0) <= std::log(100.0);
}

inline int oscillation_panels(double t) { return std::max(8, static_cast<int>(std::ceil(t / 2.0))); }

// J_ν(t) / t^ν from the Poisson integral, substituted s = sin θ so that the
// (1 - s²)^{ν-1/2} endpoint singularity becomes the smooth weight cos^{2ν} θ.
inline QuadResult bessel_scaled_poisson(double nu, double t, double abs_tol, int bisections) {
    const double log_pref = -nu * std::log(2.0) - std::lgamma(nu + 0.5) - 0.5 * std::log(kPi);
    const double pref = 2.0 * std::exp(log_pref);
    const double power = 2.0 * nu;
    auto integrand = [t, power](double theta) {
        const double c = std::cos(theta);
        return std::cos(t * std::sin(theta)) * (power == 0.0 ? 1.0 : std::pow(c, power));
    };
    auto r = integrate_adaptive(integrand, 0.0, 0.5 * kPi, abs_tol / pref, oscillation_panels(t), bisections);
    r.value *= pref;
    r.error *= pref;
    return r;
}

// J_ν(t) from Bessel's integral with Schläfli's correction for non-integer ν.
// Integrands stay O(1), so the absolute accuracy holds for any t.
inline QuadResult bessel_schlaefli(double nu, double t, double abs_tol, int bisections) {
    auto first = [nu, t](double tau) { return std::cos(nu * tau - t * std::sin(tau)); };
    auto r = integrate_adaptive(first, 0.0, kPi, 0.5 * abs_tol * kPi, oscillation_panels(t), bisections);
    QuadResult out{r.value / kPi, r.error / kPi, r.panels, r.converged};
    const double s = std::sin(nu * kPi);
    if (std::abs(s) > 1e-15) {
        // e^{-t sinh u - ν u} is below 1e-18 once t sinh u + ν u ≥ 42.
        double upper = 1.0;
        while (t * std::sinh(upper) + nu * upper < 42.0) upper *= 2.0;
        auto second = [nu, t](double u) { return std::exp(-t * std::sinh(u) - nu * u); };
        auto r2 = integrate_adaptive(second, 0.0, upper, 0.5 * abs_tol * kPi, 8, bisections);
        out.value -= s / kPi * r2.value;
        out.error += std::abs(s) / kPi * r2.error;
        out.panels += r2.panels;
        out.converged = out.converged && r2.converged;
    }
    return out;
}

// Hankel's large-argument expansion. Returns the value and the size of the
// first neglected term; the series is cut at its smallest term.
inline std::pair<double, double> bessel_hankel(double nu, double t) {
    const double mu = 4.0 * nu * nu;
    double p = 1.0, q = 0.0, term = 1.0, last = 1.0;
    for (int k = 1; k < 200; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= (mu - odd * odd) / (k * 8.0 * t);
        if (std::abs(term) > std::abs(last) && k > 2) break;
        last = term;
        if (term == 0.0) break;
        // a_k / t^k alternates between the Q and P series with sign (-1)^{floor(k/2)}.
        const double signed_term = ((k / 2) % 2 == 0) ? term : -term;
        if (k % 2 == 1) q += signed_term; else p += signed_term;
        if (std::abs(term) < 1e-18) break;
    }
    const double omega = t - 0.5 * nu * kPi - 0.25 * kPi;
    const double amp = std::sqrt(2.0 / (kPi * t));
    return {amp * (p * std::cos(omega) - q * std::sin(omega)), amp * std::abs(last)};
}

inline bool hankel_route_applies(double nu, double t) { return t >= 40.0 + 2.0 * nu * nu; }

inline void check_order(double nu) {
    if (!(nu >= 0.0)) throw DomainError("bessel: order must be non-negative");
}

}  // namespace detail

namespace detail {

// J_ν(t) / t^ν to absolute error `tol` on that quotient. Finite at t = 0,
// where it equals 1 / (2^ν Γ(ν+1)).
inline double bessel_j_over_power(double nu, double t, double tol, int bisections) {
    if (t == 0.0) return std::exp(-nu * std::log(2.0) - std::lgamma(nu + 1.0));
    const double t_pow = std::exp(nu * std::log(t));
    if (poisson_route_is_stable(nu, t)) {
        const auto r = bessel_scaled_poisson(nu, t, tol, bisections);
        if (!r.converged) throw AccuracyError("bessel_j: quadrature did not converge", r.value, r.error);
        return r.value;
    }
    if (hankel_route_applies(nu, t)) {
        const auto [value, err] = bessel_hankel(nu, t);
        if (err <= tol * t_pow) return value / t_pow;
    }
    const auto r = bessel_schlaefli(nu, t, tol * t_pow, bisections);
    if (!r.converged) throw AccuracyError("bessel_j: quadrature did not converge", r.value / t_pow, r.error / t_pow);
    return r.value / t_pow;
}

}  // namespace detail

/// Bessel function of the first kind J_ν(t), ν ≥ 0, t ≥ 0, to absolute error q.abs_tol.
///
/// Small and moderate t use the Poisson integral
///   t^ν / (2^ν Γ(ν+½) √π) ∫_{-1}^{1} e^{its} (1 - s²)^{ν-½} ds
/// with Gauss-Kronrod panels proportional to t. Where (t/2)^ν/Γ(ν+1) would
/// amplify the roundoff of that integral past 100, Bessel's integral with
/// the Schläfli term is used instead, and for t ≥ 40 + 2ν² Hankel's
/// expansion whenever its first neglected term is below q.abs_tol.
inline double bessel_j(double nu, double t, const QuadratureConfig& q = {}) {
    detail::check_order(nu);
    if (!(t >= 0.0)) throw DomainError("bessel: argument must be non-negative");
    if (t == 0.0) return nu == 0.0 ? 1.0 : 0.0;
    if (detail::poisson_route_is_stable(nu, t)) {
        const auto r = detail::bessel_scaled_poisson(nu, t, q.abs_tol * std::exp(-nu * std::log(t)), q.max_panels);
        const double scale = std::exp(nu * std::log(t));
        if (!r.converged) throw AccuracyError("bessel_j: quadrature did not converge", r.value * scale, r.error * scale);
        return r.value * scale;
    }
    if (detail::hankel_route_applies(nu, t)) {
        const auto [value, err] = detail::bessel_hankel(nu, t);
        if (err <= q.abs_tol) return value;
    }
    const auto r = detail::bessel_schlaefli(nu, t, q.abs_tol, q.max_panels);
    if (!r.converged) throw AccuracyError("bessel_j: quadrature did not converge", r.value, r.error);
    return r.value;
}

/// Explicit envelope dominating |J_ν(t)|:
///   2100 t^ν / (2^ν Γ(ν+½) √(νπ)) · (e^{-t/√ν} + e^{-ν/5}).
inline double bessel_envelope(double nu, double t) {
    if (!(nu > 0.0)) throw DomainError("bessel_envelope: order must be positive");
    if (!(t >= 0.0)) throw DomainError("bessel_envelope: argument must be non-negative");
    if (t == 0.0) return 0.0;
    const double log_pref = std::log(2100.0) + nu * std::log(t) - nu * std::log(2.0) - std::lgamma(nu + 0.5) -
                            0.5 * std::log(nu * std::numbers::pi);
    // e^{-t/√ν} + e^{-ν/5} = e^{hi} (1 + e^{lo - hi})
    const double e1 = -t / std::sqrt(nu), e2 = -nu / 5.0;
    const double hi = std::max(e1, e2), lo = std::min(e1, e2);
    return std::exp(log_pref + hi + std::log1p(std::exp(lo - hi)));
}

struct GammaBracket {
    double lower;
    double upper;
};

/// √(2π) x^{x-½} e^{-x} ≤ Γ(x) ≤ the same times e^{1/(12x)}.
inline GammaBracket stirling_bounds(double x) {
    if (!(x > 0.0)) throw DomainError("stirling_bounds: argument must be positive");
    const double log_lower = 0.5 * std::log(2.0 * std::numbers::pi) + (x - 0.5) * std::log(x) - x;
    return {std::exp(log_lower), std::exp(log_lower + 1.0 / (12.0 * x))};
}

/// x^{1-s} < Γ(x+1)/Γ(x+s) < (x+1)^{1-s} for x > 0, s ∈ (0,1).
inline GammaBracket gautschi_bounds(double x, double s) {
    if (!(x > 0.0)) throw DomainError("gautschi_bounds: x must be positive");
    if (!(s > 0.0 && s < 1.0)) throw DomainError("gautschi_bounds: s must lie in (0, 1)");
    return {std::pow(x, 1.0 - s), std::pow(x + 1.0, 1.0 - s)};
}

/// Si(u) = ∫₀^u sin(s)/s ds by adaptive quadrature, one panel per half period.
inline double sine_integral(double u, const QuadratureConfig& q = {}) {
    if (!(u >= 0.0)) throw DomainError("sine_integral: argument must be non-negative");
    if (u == 0.0) return 0.0;
    auto sinc = [](double s) { return s == 0.0 ? 1.0 : std::sin(s) / s; };
    const int panels = std::max(8, static_cast<int>(std::ceil(u / std::numbers::pi)));
    const auto r = integrate_adaptive(sinc, 0.0, u, q.abs_tol, panels, q.max_panels);
    if (!r.converged) throw AccuracyError("sine_integral: quadrature did not converge", r.value, r.error);
    return r.value;
}

/// Si(u) for any real u from the power series (|u| ≤ 4) or the continued
/// fraction of E₁(iu) (|u| > 4). Used in hot loops where the quadrature in
/// sine_integral would dominate; the two are cross-checked in the tests.
inline double sine_integral_fast(double u) {
    const double sign = u < 0.0 ? -1.0 : 1.0;
    const double x = std::abs(u);
    if (x <= 4.0) {
        double term = x, sum = x;
        const double x2 = x * x;
        for (int k = 1; k < 60; ++k) {
            term *= -x2 / ((2.0 * k) * (2.0 * k + 1.0));
            const double add = term / (2.0 * k + 1.0);
            sum += add;
            if (std::abs(add) < 1e-17 * std::abs(sum)) break;
        }
        return sign * sum;
    }
    // Modified Lentz on E₁(ix): Si(x) = π/2 + Im E₁(ix).
    using C = std::complex<double>;
    C b(1.0, x);
    C c(1.0 / 1e-300, 0.0);
    C d = 1.0 / b;
    C h = d;
    for (int i = 1; i < 200; ++i) {
        const double a = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        const C del = c * d;
        h *= del;
        if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < 1e-16) break;
    }
    h *= C(std::cos(x), -std::sin(x));
    return sign * (0.5 * std::numbers::pi + h.imag());
}

}  // namespace riesz
