#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "riesz/errors.hpp"

namespace riesz {

/// Tolerances shared by every oscillatory special-function integral.
///
/// `max_panels` is the bisection budget spent on top of the initial,
/// oscillation-adapted partition of an interval (and the cap on the number of
/// half-period panels summed before a tail extrapolation gives up).
struct QuadratureConfig {
    double abs_tol = 1e-10;
    int max_panels = 2000;
    double tail_tol = 1e-10;

    void validate() const {
        if (!(abs_tol > 0.0)) throw DomainError("QuadratureConfig: abs_tol must be positive");
        if (!(tail_tol > 0.0)) throw DomainError("QuadratureConfig: tail_tol must be positive");
        if (max_panels < 8) throw DomainError("QuadratureConfig: max_panels must be at least 8");
    }
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    int panels = 0;
    bool converged = false;
};

namespace detail {

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error, resabs;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gauss_kronrod_15(F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double resg = fc * kWg[3];
    double resk = fc * kWgk[7];
    double resabs = std::abs(resk);
    double fv1[7], fv2[7];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        fv1[j] = f(center - dx);
        fv2[j] = f(center + dx);
        const double sum = fv1[j] + fv2[j];
        resk += kWgk[j] * sum;
        resabs += kWgk[j] * (std::abs(fv1[j]) + std::abs(fv2[j]));
        if (j % 2 == 1) resg += kWg[j / 2] * sum;
    }
    const double mean = resk * 0.5;
    double resasc = kWgk[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j) resasc += kWgk[j] * (std::abs(fv1[j] - mean) + std::abs(fv2[j] - mean));

    resk *= half;
    resg *= half;
    resabs *= std::abs(half);
    resasc *= std::abs(half);

    // QUADPACK error heuristic.
    double err = std::abs(resk - resg);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
    return {a, b, resk, err, resabs};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod quadrature of f over [a, b].
///
/// The interval starts as `initial_panels` equal pieces (callers pass a count
/// proportional to the oscillation frequency of f); the worst panel is then
/// bisected until the summed error estimate drops below `abs_tol`, or below
/// the roundoff floor of the sum, or `max_bisections` is spent.
template <class F>
QuadResult integrate_adaptive(F&& f, double a, double b, double abs_tol, int initial_panels,
                              int max_bisections) {
    QuadResult out;
    if (a == b) {
        out.converged = true;
        return out;
    }
    initial_panels = std::max(1, initial_panels);
    std::vector<detail::Panel> storage;
    storage.reserve(static_cast<std::size_t>(initial_panels) + 2 * static_cast<std::size_t>(max_bisections) + 2);
    const double width = (b - a) / initial_panels;
    double total = 0.0, total_err = 0.0, total_abs = 0.0;
    for (int i = 0; i < initial_panels; ++i) {
        const double lo = a + i * width;
        const double hi = (i + 1 == initial_panels) ? b : a + (i + 1) * width;
        storage.push_back(detail::gauss_kronrod_15(f, lo, hi));
        total += storage.back().value;
        total_err += storage.back().error;
        total_abs += storage.back().resabs;
    }
    constexpr double eps = std::numeric_limits<double>::epsilon();
    auto done = [&] { return total_err <= std::max(abs_tol, 100.0 * eps * total_abs); };
    if (done()) {
        out = {total, total_err, initial_panels, true};
        return out;
    }
    std::priority_queue<detail::Panel> heap(storage.begin(), storage.end());
    int bisections = 0;
    while (!done() && bisections < max_bisections) {
        const detail::Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const auto left = detail::gauss_kronrod_15(f, worst.a, mid);
        const auto right = detail::gauss_kronrod_15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        total_abs += left.resabs + right.resabs - worst.resabs;
        heap.push(left);
        heap.push(right);
        ++bisections;
    }
    // Re-sum to shed the drift of the running updates.
    total = 0.0;
    total_err = 0.0;
    const int panels = static_cast<int>(heap.size());
    while (!heap.empty()) {
        total += heap.top().value;
        total_err += heap.top().error;
        heap.pop();
    }
    out = {total, total_err, panels, total_err <= std::max(abs_tol, 100.0 * eps * total_abs)};
    return out;
}

/// Wynn epsilon extrapolation of the limit of a sequence of partial sums.
/// Returns {estimate, error}; the error compares the three latest estimates.
inline std::pair<double, double> wynn_epsilon(const std::vector<double>& sums) {
    const std::size_t n = sums.size();
    if (n == 0) return {0.0, std::numeric_limits<double>::infinity()};
    auto limit_of = [&](std::size_t count) {
        // Epsilon table, column by column; even columns hold the estimates.
        std::vector<double> prev(count, 0.0), cur(sums.begin(), sums.begin() + static_cast<long>(count));
        double best = cur.back();
        for (std::size_t col = 1; col < count; ++col) {
            std::vector<double> next(count - col);
            bool degenerate = false;
            for (std::size_t i = 0; i + col < count; ++i) {
                const double diff = cur[i + 1] - cur[i];
                if (diff == 0.0 || !std::isfinite(diff)) {
                    degenerate = true;
                    break;
                }
                next[i] = (col == 1 ? 0.0 : prev[i + 1]) + 1.0 / diff;
            }
            if (degenerate) break;
            prev = std::move(cur);
            cur = std::move(next);
            if (col % 2 == 0) best = cur.back();
        }
        return best;
    };
    const double e0 = limit_of(n);
    if (n < 3) return {e0, std::numeric_limits<double>::infinity()};
    const double e1 = limit_of(n - 1);
    const double e2 = limit_of(n - 2);
    return {e0, std::abs(e0 - e1) + std::abs(e1 - e2)};
}

struct TailResult {
    double value = 0.0;
    double error = 0.0;
    double truncation_radius = 0.0;  // last panel edge that was integrated explicitly
    int panels = 0;
};

/// Integral of f over [a, ∞) for an integrand that decays and oscillates with
/// period 2π once past `asymptotic_start`. The stretch [a, asymptotic_start]
/// is integrated directly; beyond it, partial sums over consecutive panels of
/// width π are extrapolated with the epsilon algorithm.
///
/// `panel_integrator(lo, hi, tol)` must return a QuadResult for [lo, hi].
template <class PanelIntegrator>
TailResult oscillatory_tail(PanelIntegrator&& panel_integrator, double a, double asymptotic_start,
                            double abs_tol, const QuadratureConfig& q, int min_panels = 8) {
    constexpr double pi = 3.14159265358979323846;
    TailResult out;
    double quad_err = 0.0;
    double head = 0.0;
    double edge = a;
    const double start = std::max(a, asymptotic_start);
    while (edge < start) {
        const double hi = std::min(start, edge + pi);
        const auto r = panel_integrator(edge, hi, 0.1 * abs_tol);
        head += r.value;
        quad_err += r.error;
        edge = hi;
        ++out.panels;
    }
    std::vector<double> sums{head};
    double best = head, best_err = std::numeric_limits<double>::infinity();
    double scale = std::abs(head);
    bool converged = false;
    for (int k = 0; k < q.max_panels; ++k) {
        const auto r = panel_integrator(edge, edge + pi, 0.1 * abs_tol);
        sums.push_back(sums.back() + r.value);
        scale = std::max(scale, std::abs(sums.back()));
        quad_err += r.error;
        edge += pi;
        ++out.panels;
        if (static_cast<int>(sums.size()) < min_panels) continue;
        // Only the latest stretch of the sequence feeds the table.
        const std::size_t window = std::min<std::size_t>(sums.size(), 40);
        const std::vector<double> recent(sums.end() - static_cast<long>(window), sums.end());
        const auto [est, err] = wynn_epsilon(recent);
        if (err < best_err) {
            best = est;
            best_err = err;
        }
        const double floor = 64.0 * std::numeric_limits<double>::epsilon() * scale;
        if (best_err + quad_err <= std::max(abs_tol, floor)) {
            converged = true;
            break;
        }
    }
    out.value = best;
    out.error = best_err + quad_err;
    out.truncation_radius = edge;
    if (!converged) throw AccuracyError("oscillatory_tail: extrapolation did not converge", out.value, out.error);
    return out;
}

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton iteration on P_n).
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    constexpr double pi = 3.14159265358979323846;
    std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        // Recompute the derivative at the converged node.
        double p0 = 1.0, p1 = 0.0;
        for (int k = 1; k <= n; ++k) {
            const double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        x[static_cast<std::size_t>(i)] = -z;
        x[static_cast<std::size_t>(n - 1 - i)] = z;
        w[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(n - 1 - i)] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return {x, w};
}

}  // namespace riesz
