#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "riesz/errors.hpp"
#include "riesz/grid.hpp"
#include "riesz/multiplier.hpp"
#include "riesz/quadrature.hpp"
#include "riesz/specfun.hpp"

namespace riesz {

// Axis indices j run from 1 to d throughout.

struct Riesz {
    int j = 1;
};
struct TruncatedRiesz {
    int j = 1;
    double t = 1.0;
};
struct FactorM {
    double t = 1.0;
};
struct Poisson {
    double t = 1.0;
};
struct ConjugatePoisson {
    int j = 1;
    double t = 1.0;
};
struct PoissonProjection {
    int n = 0;
};
struct Heat1d {
    int j = 1;
    double t = 1.0;
};
struct DirectionalHilbertTrunc {
    std::vector<double> theta;
    double eps = 1.0;
};

using MultiplierSymbol = std::variant<Riesz, TruncatedRiesz, FactorM, Poisson, ConjugatePoisson, PoissonProjection,
                                      Heat1d, DirectionalHilbertTrunc>;

namespace detail {

inline void check_axis(int j, int d) {
    if (j < 1 || j > d) throw DomainError("axis index must lie in 1..d");
}

inline void check_parameter(double t, bool allow_zero, const char* what) {
    if (!std::isfinite(t) || t < 0.0 || (!allow_zero && t == 0.0))
        throw DomainError(std::string(what) + (allow_zero ? " must be >= 0" : " must be > 0"));
}

inline void check_unit(std::span<const double> theta, int d) {
    if (static_cast<int>(theta.size()) != d) throw DomainError("direction must have d components");
    double s = 0.0;
    for (double v : theta) s += v * v;
    if (std::abs(std::sqrt(s) - 1.0) > 1e-12) throw DomainError("direction must be a unit vector");
}

inline double poisson_symbol(double t, double rho, int d) { return std::exp(-t * rho / std::sqrt(static_cast<double>(d))); }

// -i sign(a) (2/π)(π/2 - Si(2πε|a|)) for a = θ·ξ.
inline Complex hilbert_trunc_symbol(double a, double eps) {
    if (a == 0.0) return 0.0;
    const double mag = 1.0 - (2.0 / std::numbers::pi) * sine_integral_fast(2.0 * std::numbers::pi * eps * std::abs(a));
    return Complex(0.0, a > 0.0 ? -mag : mag);
}

inline long squared_length(std::span<const int> k) {
    long s = 0;
    for (int v : k) s += static_cast<long>(v) * v;
    return s;
}

}  // namespace detail

/// Throws DomainError when a symbol's parameters do not fit dimension d.
inline void validate_symbol(const MultiplierSymbol& s, int d) {
    std::visit(
        [d](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Riesz>) {
                detail::check_axis(v.j, d);
            } else if constexpr (std::is_same_v<T, TruncatedRiesz>) {
                detail::check_axis(v.j, d);
                detail::check_parameter(v.t, false, "truncation t");
            } else if constexpr (std::is_same_v<T, FactorM>) {
                detail::check_parameter(v.t, true, "truncation t");
            } else if constexpr (std::is_same_v<T, Poisson>) {
                detail::check_parameter(v.t, true, "Poisson t");
            } else if constexpr (std::is_same_v<T, ConjugatePoisson>) {
                detail::check_axis(v.j, d);
                detail::check_parameter(v.t, true, "Poisson t");
            } else if constexpr (std::is_same_v<T, PoissonProjection>) {
                if (std::abs(v.n) > 1000) throw DomainError("projection index out of range");
            } else if constexpr (std::is_same_v<T, Heat1d>) {
                detail::check_axis(v.j, d);
                detail::check_parameter(v.t, true, "heat time");
            } else {
                if (d < 2 || d > 3) throw UnsupportedError("directional Hilbert transforms are supported for d = 2, 3");
                detail::check_unit(v.theta, d);
                detail::check_parameter(v.eps, false, "epsilon");
            }
        },
        s);
}

/// Upper bound on |symbol| used by the contraction property.
inline double symbol_ceiling(const MultiplierSymbol& s, int d, const QuadratureConfig& q = {}) {
    if (std::holds_alternative<FactorM>(s) || std::holds_alternative<TruncatedRiesz>(s)) return m_sup(d, q);
    return 1.0;
}

/// Multiplies every nonzero Fourier coefficient of f by symbol(ξ, k), where
/// ξ = k/L. Zero coefficients (after prune_roundoff) are skipped.
template <class Symbol>
SpatialField apply_multiplier(const SpatialField& f, Symbol&& symbol) {
    auto fhat = forward_transform(f);
    prune_roundoff(fhat);
    const int d = f.spec.dimension;
    std::vector<double> xi(static_cast<std::size_t>(d));
    for_each_frequency(f.spec, [&](std::size_t lin, std::span<const int> k) {
        auto& c = fhat.coefficients[lin];
        if (c == Complex(0.0)) return;
        for (int a = 0; a < d; ++a) xi[static_cast<std::size_t>(a)] = k[static_cast<std::size_t>(a)] / f.spec.period;
        c *= symbol(std::span<const double>(xi), k);
    });
    return inverse_transform(fhat);
}

/// Applies one of the operator symbols. Odd symbols vanish at ξ = 0. Values
/// of m are drawn from `cache`, prefilled with every radius present in f.
inline SpatialField apply_symbol(const SpatialField& f, const MultiplierSymbol& s, MultiplierCache& cache) {
    const int d = f.spec.dimension;
    validate_symbol(s, d);
    const double L = f.spec.period;

    // Radii t|ξ| that need m.
    double mt = -1.0;
    if (const auto* v = std::get_if<FactorM>(&s)) mt = v->t;
    if (const auto* v = std::get_if<TruncatedRiesz>(&s)) mt = v->t;
    if (mt >= 0.0) {
        auto fhat = forward_transform(f);
        prune_roundoff(fhat);
        std::vector<double> xs;
        for_each_frequency(f.spec, [&](std::size_t lin, std::span<const int> k) {
            if (fhat.coefficients[lin] != Complex(0.0)) xs.push_back(mt * std::sqrt(double(detail::squared_length(k))) / L);
        });
        cache.prefill(d, xs);
    }

    return apply_multiplier(f, [&](std::span<const double> xi, std::span<const int> k) -> Complex {
        const long k2 = detail::squared_length(k);
        const double rho = std::sqrt(static_cast<double>(k2)) / L;
        auto riesz = [&](int j) -> Complex {
            if (k2 == 0) return 0.0;
            return Complex(0.0, -xi[static_cast<std::size_t>(j - 1)] / rho);
        };
        return std::visit(
            [&](const auto& v) -> Complex {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, Riesz>) {
                    return riesz(v.j);
                } else if constexpr (std::is_same_v<T, TruncatedRiesz>) {
                    if (k2 == 0) return 0.0;
                    return riesz(v.j) * cache(d, v.t * std::sqrt(static_cast<double>(k2)) / L);
                } else if constexpr (std::is_same_v<T, FactorM>) {
                    return cache(d, v.t * std::sqrt(static_cast<double>(k2)) / L);
                } else if constexpr (std::is_same_v<T, Poisson>) {
                    return detail::poisson_symbol(v.t, rho, d);
                } else if constexpr (std::is_same_v<T, ConjugatePoisson>) {
                    return riesz(v.j) * detail::poisson_symbol(v.t, rho, d);
                } else if constexpr (std::is_same_v<T, PoissonProjection>) {
                    return detail::poisson_symbol(std::ldexp(1.0, v.n - 1), rho, d) -
                           detail::poisson_symbol(std::ldexp(1.0, v.n), rho, d);
                } else if constexpr (std::is_same_v<T, Heat1d>) {
                    const double x = xi[static_cast<std::size_t>(v.j - 1)];
                    return std::exp(-4.0 * std::numbers::pi * std::numbers::pi * v.t * x * x);
                } else {
                    double a = 0.0;
                    for (std::size_t i = 0; i < xi.size(); ++i) a += v.theta[i] * xi[i];
                    return detail::hilbert_trunc_symbol(a, v.eps);
                }
            },
            s);
    });
}

/// Truncation parameters {2^n (1 + m 2^{-l}) : n_min ≤ n ≤ n_max, 0 ≤ l ≤ depth,
/// 0 ≤ m < 2^l}, sorted and deduplicated.
struct TruncationGrid {
    int n_min = -8;
    int n_max = 4;
    int depth = 4;

    void validate() const {
        if (n_min > n_max) throw DomainError("TruncationGrid: n_min must not exceed n_max");
        if (depth < 0 || depth > 20) throw DomainError("TruncationGrid: depth must lie in 0..20");
        if (n_min < -1000 || n_max > 1000) throw DomainError("TruncationGrid: exponent out of range");
    }

    std::vector<double> values() const {
        validate();
        std::vector<double> ts;
        for (int n = n_min; n <= n_max; ++n) {
            const double base = std::ldexp(1.0, n);
            const int count = 1 << depth;
            for (int m = 0; m < count; ++m) ts.push_back(base * (1.0 + std::ldexp(static_cast<double>(m), -depth)));
        }
        std::sort(ts.begin(), ts.end());
        ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
        return ts;
    }

    /// Dyadic exponent n with t ∈ [2^n, 2^{n+1}).
    static int dyadic_exponent(double t) {
        int e = 0;
        std::frexp(t, &e);
        return e - 1;
    }
};

/// Sampled truncated Riesz kernel c_d x_j/|x|^{d+1} χ_{|x|>t}, periodized over
/// (2·image_radius + 1)^d copies of the box.
struct Kernel {
    int dimension = 4;
    int axis = 1;
    double truncation = 0.1;
    int image_radius = 1;

    double operator()(std::span<const double> x) const {
        double r2 = 0.0;
        for (double v : x) r2 += v * v;
        const double r = std::sqrt(r2);
        if (!(r > truncation)) return 0.0;
        return kernel_constant(dimension) * x[static_cast<std::size_t>(axis - 1)] / std::pow(r, dimension + 1);
    }
};

namespace detail {

// Epstein zeta Σ_{m ∈ ℤ^d \ 0} |m|^{-2s} for s > d/2, from the theta-function
// representation split at u = 1.
inline double lattice_zeta(int d, double s) {
    auto theta_minus_one = [d](double u) {
        double th = 1.0;
        for (int n = 1; n < 20; ++n) {
            const double term = 2.0 * std::exp(-std::numbers::pi * n * n * u);
            th += term;
            if (term < 1e-18) break;
        }
        return std::pow(th, d) - 1.0;
    };
    auto integrand = [&](double u) {
        return theta_minus_one(u) * (std::pow(u, s - 1.0) + std::pow(u, 0.5 * d - s - 1.0));
    };
    const auto r = integrate_adaptive(integrand, 1.0, 40.0, 1e-15, 64, 2000);
    const double mellin = r.value + 1.0 / (s - 0.5 * d) - 1.0 / s;
    return mellin * std::pow(std::numbers::pi, s) / std::tgamma(s);
}

// Σ over lattice points outside the cube |m|_∞ ≤ r of |m|^{-(d+1)}.
inline double outer_lattice_sum(int d, int r) {
    double inner = 0.0;
    std::vector<int> m(static_cast<std::size_t>(d), -r);
    while (true) {
        long s2 = 0;
        for (int v : m) s2 += static_cast<long>(v) * v;
        if (s2 > 0) inner += std::pow(static_cast<double>(s2), -0.5 * (d + 1));
        int a = d - 1;
        while (a >= 0 && m[static_cast<std::size_t>(a)] == r) m[static_cast<std::size_t>(a--)] = -r;
        if (a < 0) break;
        ++m[static_cast<std::size_t>(a)];
    }
    return lattice_zeta(d, 0.5 * (d + 1)) - inner;
}

}  // namespace detail

/// R_j^t f by periodic convolution with the sampled kernel, computed through
/// the transform pair. Offsets on the Nyquist plane average the two
/// symmetric image sets so that the periodized kernel stays odd.
///
/// Images beyond the cube of radius `image_radius` contribute, to first
/// order, the linear field y_j Σ ∂_j K_j(mL) = -(c_d/d) L^{-d-1} y_j Σ|m|^{-d-1};
/// with `far_field` set that term is added back.
inline SpatialField truncated_riesz_spatial(const SpatialField& f, int j, double t, int image_radius = 1,
                                            bool far_field = true) {
    const auto& spec = f.spec;
    spec.validate();
    const int d = spec.dimension, n = spec.points_per_axis;
    detail::check_axis(j, d);
    const double L = spec.period;
    if (!(t > 0.0)) throw DomainError("truncated_riesz_spatial: t must be positive");
    if (!(t < 0.5 * L)) throw DomainError("truncated_riesz_spatial: t must be below L/2");
    if (image_radius < 0) throw DomainError("truncated_riesz_spatial: image radius must be >= 0");
    const double per_point = std::pow(2.0 * image_radius + 2.0, d);
    if (per_point * static_cast<double>(spec.size()) > 4e9)
        throw ResourceError("truncated_riesz_spatial: kernel sampling exceeds the work budget");

    const Kernel kernel{d, j, t, image_radius};
    const double h = L / n;
    // Per-axis image offsets and weights for each sample index.
    std::vector<std::vector<std::pair<double, double>>> images(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto& list = images[static_cast<std::size_t>(i)];
        if (i == n / 2) {
            for (int m = -image_radius; m <= image_radius + 1; ++m) {
                const double w = (m == -image_radius || m == image_radius + 1) ? 0.5 : 1.0;
                list.emplace_back(-0.5 * L + m * L, w);
            }
        } else {
            const double y = signed_frequency(i, n) * h;
            for (int m = -image_radius; m <= image_radius; ++m) list.emplace_back(y + m * L, 1.0);
        }
    }

    const double slope = far_field ? -kernel_constant(d) / d * std::pow(L, -d - 1.0) *
                                         detail::outer_lattice_sum(d, image_radius)
                                   : 0.0;

    SpatialField k_field(spec);
    std::vector<int> idx(static_cast<std::size_t>(d), 0), sel(static_cast<std::size_t>(d), 0);
    std::vector<double> y(static_cast<std::size_t>(d));
    for (std::size_t lin = 0; lin < k_field.samples.size(); ++lin) {
        double sum = 0.0;
        std::fill(sel.begin(), sel.end(), 0);
        while (true) {
            double w = 1.0;
            for (int a = 0; a < d; ++a) {
                const auto& p = images[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])]
                                      [static_cast<std::size_t>(sel[static_cast<std::size_t>(a)])];
                y[static_cast<std::size_t>(a)] = p.first;
                w *= p.second;
            }
            sum += w * kernel(y);
            int a = d - 1;
            for (; a >= 0; --a) {
                auto& s = sel[static_cast<std::size_t>(a)];
                if (++s < static_cast<int>(images[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])].size())) break;
                s = 0;
            }
            if (a < 0) break;
        }
        const int ij = idx[static_cast<std::size_t>(j - 1)];
        const double yj = ij == n / 2 ? 0.0 : signed_frequency(ij, n) * h;
        k_field.samples[lin] = sum + slope * yj;
        for (int a = d - 1; a >= 0; --a) {
            if (++idx[static_cast<std::size_t>(a)] < n) break;
            idx[static_cast<std::size_t>(a)] = 0;
        }
    }

    // Discrete convolution Σ_y K(y) f(x-y) h^d has unitary coefficients
    // c_k(f) · L^{d/2} c_k(K).
    auto fhat = forward_transform(f);
    const auto khat = forward_transform(k_field);
    const double scale = std::pow(L, 0.5 * d);
    for (std::size_t i = 0; i < fhat.coefficients.size(); ++i) fhat.coefficients[i] *= scale * khat.coefficients[i];
    return inverse_transform(fhat);
}

/// Angular part of a radial family, a(k) multiplying the radial weight.
using AngularFactor = std::function<Complex(std::span<const int>)>;

inline AngularFactor riesz_factor(int j) {
    return [j](std::span<const int> k) -> Complex {
        const long k2 = detail::squared_length(k);
        if (k2 == 0) return 0.0;
        return Complex(0.0, -k[static_cast<std::size_t>(j - 1)] / std::sqrt(static_cast<double>(k2)));
    };
}

inline AngularFactor unit_factor() {
    return [](std::span<const int>) -> Complex { return 1.0; };
}

/// Evaluates families of operators whose symbols are a(ξ)·w(|ξ|), with a
/// drawn from a fixed list of components and w varying from row to row.
///
/// The nonzero coefficients of f are grouped into shells of equal |k|².
/// With few shells, each (component, shell) piece is transformed back once
/// and every row is a weighted sum of those pieces; otherwise each row costs
/// one inverse transform per component.
class RadialFamily {
public:
    static constexpr std::size_t kShellLimit = 64;

    RadialFamily(const SpatialField& f, std::vector<AngularFactor> components, std::size_t shell_limit = kShellLimit)
        : spec_(f.spec), components_(std::move(components)) {
        if (components_.empty()) throw DomainError("RadialFamily: no components");
        fhat_ = forward_transform(f);
        prune_roundoff(fhat_);
        real_ = std::all_of(f.samples.begin(), f.samples.end(), [](const Complex& v) { return v.imag() == 0.0; });
        std::map<long, int> shell_of;
        for_each_frequency(spec_, [&](std::size_t lin, std::span<const int> k) {
            if (fhat_.coefficients[lin] == Complex(0.0)) return;
            shell_of.emplace(detail::squared_length(k), 0);
        });
        int s = 0;
        for (auto& [k2, id] : shell_of) {
            id = s++;
            radii_.push_back(std::sqrt(static_cast<double>(k2)) / spec_.period);
        }
        shell_index_.assign(fhat_.coefficients.size(), -1);
        angular_.assign(components_.size() * fhat_.coefficients.size(), 0.0);
        for_each_frequency(spec_, [&](std::size_t lin, std::span<const int> k) {
            if (fhat_.coefficients[lin] == Complex(0.0)) return;
            shell_index_[lin] = shell_of.at(detail::squared_length(k));
            for (std::size_t c = 0; c < components_.size(); ++c)
                angular_[c * fhat_.coefficients.size() + lin] = components_[c](k);
        });
        use_shells_ = radii_.size() <= shell_limit;
        if (use_shells_) {
            build_pieces();
            // With many components, w^T G w over the Gram arrays
            // G_{ss'} = Σ_c Re(p_{c,s} conj p_{c,s'}) is cheaper than the sums.
            if (components_.size() > 1 && radii_.size() + 1 < 2 * components_.size()) build_gram();
        }
    }

    /// |ξ| of each shell, ascending.
    const std::vector<double>& radii() const { return radii_; }
    const GridSpec& spec() const { return spec_; }
    bool uses_shells() const { return use_shells_; }

    /// For weights[row][shell], rows grouped by `group` (nondecreasing,
    /// 0-based) returns at every sample
    ///   Σ_g coef[g] · max_{row ∈ g} Σ_c |Σ_s weights[row][s] · piece_{c,s}(x)|².
    std::vector<double> reduce(const std::vector<std::vector<double>>& weights, const std::vector<int>& group,
                               const std::vector<double>& coef) const {
        const std::size_t rows = weights.size();
        if (rows == 0) throw DomainError("RadialFamily: no rows");
        if (group.size() != rows) throw DomainError("RadialFamily: group list size mismatch");
        for (std::size_t r = 0; r < rows; ++r) {
            if (weights[r].size() != radii_.size()) throw DomainError("RadialFamily: weight row size mismatch");
            if (group[r] < 0 || static_cast<std::size_t>(group[r]) >= coef.size() || (r > 0 && group[r] < group[r - 1]))
                throw DomainError("RadialFamily: groups must be nondecreasing and indexed into coef");
        }
        const std::size_t total = spec_.size();
        std::vector<double> out(total, 0.0);
        if (radii_.empty()) return out;
        if (use_shells_) {
            reduce_shells(weights, group, coef, out);
        } else {
            reduce_direct(weights, group, coef, out);
        }
        return out;
    }

private:
    void build_pieces() {
        const std::size_t total = spec_.size();
        const std::size_t shells = radii_.size();
        re_.assign(components_.size() * shells, {});
        if (!real_) im_.assign(components_.size() * shells, {});
        SpectralField g{spec_, std::vector<Complex>(total)};
        for (std::size_t c = 0; c < components_.size(); ++c) {
            for (std::size_t s = 0; s < shells; ++s) {
                std::fill(g.coefficients.begin(), g.coefficients.end(), Complex(0.0));
                bool any = false;
                for (std::size_t lin = 0; lin < total; ++lin) {
                    if (shell_index_[lin] != static_cast<int>(s)) continue;
                    const Complex a = angular_[c * total + lin];
                    if (a == Complex(0.0)) continue;
                    g.coefficients[lin] = fhat_.coefficients[lin] * a;
                    any = true;
                }
                auto& re = re_[c * shells + s];
                re.assign(total, 0.0);
                if (!real_) im_[c * shells + s].assign(total, 0.0);
                if (!any) continue;
                const auto piece = inverse_transform(g);
                for (std::size_t i = 0; i < total; ++i) re[i] = piece.samples[i].real();
                if (!real_)
                    for (std::size_t i = 0; i < total; ++i) im_[c * shells + s][i] = piece.samples[i].imag();
            }
        }
    }

    void build_gram() {
        const std::size_t total = spec_.size();
        const std::size_t shells = radii_.size();
        gram_.assign(shells * (shells + 1) / 2, std::vector<double>(total, 0.0));
        std::size_t idx = 0;
        for (std::size_t s = 0; s < shells; ++s) {
            for (std::size_t u = s; u < shells; ++u, ++idx) {
                auto& g = gram_[idx];
                for (std::size_t c = 0; c < components_.size(); ++c) {
                    const auto& a = re_[c * shells + s];
                    const auto& b = re_[c * shells + u];
                    for (std::size_t i = 0; i < total; ++i) g[i] += a[i] * b[i];
                    if (!real_) {
                        const auto& ai = im_[c * shells + s];
                        const auto& bi = im_[c * shells + u];
                        for (std::size_t i = 0; i < total; ++i) g[i] += ai[i] * bi[i];
                    }
                }
            }
        }
        re_.clear();
        im_.clear();
    }

    void reduce_gram(const std::vector<std::vector<double>>& weights, const std::vector<int>& group,
                     const std::vector<double>& coef, std::vector<double>& out) const {
        constexpr std::size_t kBlock = 2048;
        const std::size_t total = spec_.size();
        const std::size_t shells = radii_.size();
        std::vector<double> q(kBlock), gmax(kBlock), sum(kBlock);
        for (std::size_t start = 0; start < total; start += kBlock) {
            const std::size_t len = std::min(kBlock, total - start);
            std::fill(sum.begin(), sum.begin() + static_cast<long>(len), 0.0);
            std::fill(gmax.begin(), gmax.begin() + static_cast<long>(len), 0.0);
            for (std::size_t r = 0; r < weights.size(); ++r) {
                std::fill(q.begin(), q.begin() + static_cast<long>(len), 0.0);
                std::size_t idx = 0;
                for (std::size_t s = 0; s < shells; ++s) {
                    for (std::size_t u = s; u < shells; ++u, ++idx) {
                        const double w = (s == u ? 1.0 : 2.0) * weights[r][s] * weights[r][u];
                        if (w == 0.0) continue;
                        const double* g = gram_[idx].data() + start;
                        for (std::size_t i = 0; i < len; ++i) q[i] += w * g[i];
                    }
                }
                for (std::size_t i = 0; i < len; ++i) gmax[i] = std::max(gmax[i], std::max(q[i], 0.0));
                if (r + 1 == weights.size() || group[r + 1] != group[r]) {
                    const double cg = coef[static_cast<std::size_t>(group[r])];
                    for (std::size_t i = 0; i < len; ++i) {
                        sum[i] += cg * gmax[i];
                        gmax[i] = 0.0;
                    }
                }
            }
            std::copy(sum.begin(), sum.begin() + static_cast<long>(len), out.begin() + static_cast<long>(start));
        }
    }

    void reduce_shells(const std::vector<std::vector<double>>& weights, const std::vector<int>& group,
                       const std::vector<double>& coef, std::vector<double>& out) const {
        if (!gram_.empty()) {
            reduce_gram(weights, group, coef, out);
            return;
        }
        constexpr std::size_t kBlock = 2048;
        const std::size_t total = spec_.size();
        const std::size_t shells = radii_.size();
        const std::size_t comps = components_.size();
        std::vector<double> acc_re(kBlock), acc_im(kBlock), q(kBlock), gmax(kBlock), sum(kBlock);
        for (std::size_t start = 0; start < total; start += kBlock) {
            const std::size_t len = std::min(kBlock, total - start);
            std::fill(sum.begin(), sum.begin() + static_cast<long>(len), 0.0);
            std::fill(gmax.begin(), gmax.begin() + static_cast<long>(len), 0.0);
            for (std::size_t r = 0; r < weights.size(); ++r) {
                std::fill(q.begin(), q.begin() + static_cast<long>(len), 0.0);
                for (std::size_t c = 0; c < comps; ++c) {
                    std::fill(acc_re.begin(), acc_re.begin() + static_cast<long>(len), 0.0);
                    if (!real_) std::fill(acc_im.begin(), acc_im.begin() + static_cast<long>(len), 0.0);
                    for (std::size_t s = 0; s < shells; ++s) {
                        const double w = weights[r][s];
                        if (w == 0.0) continue;
                        const double* pr = re_[c * shells + s].data() + start;
                        for (std::size_t i = 0; i < len; ++i) acc_re[i] += w * pr[i];
                        if (!real_) {
                            const double* pi = im_[c * shells + s].data() + start;
                            for (std::size_t i = 0; i < len; ++i) acc_im[i] += w * pi[i];
                        }
                    }
                    for (std::size_t i = 0; i < len; ++i) q[i] += acc_re[i] * acc_re[i];
                    if (!real_)
                        for (std::size_t i = 0; i < len; ++i) q[i] += acc_im[i] * acc_im[i];
                }
                for (std::size_t i = 0; i < len; ++i) gmax[i] = std::max(gmax[i], q[i]);
                const bool closes = r + 1 == weights.size() || group[r + 1] != group[r];
                if (closes) {
                    const double cg = coef[static_cast<std::size_t>(group[r])];
                    for (std::size_t i = 0; i < len; ++i) {
                        sum[i] += cg * gmax[i];
                        gmax[i] = 0.0;
                    }
                }
            }
            std::copy(sum.begin(), sum.begin() + static_cast<long>(len), out.begin() + static_cast<long>(start));
        }
    }

    void reduce_direct(const std::vector<std::vector<double>>& weights, const std::vector<int>& group,
                       const std::vector<double>& coef, std::vector<double>& out) const {
        const std::size_t total = spec_.size();
        std::vector<double> gmax(total, 0.0), q(total);
        SpectralField g{spec_, std::vector<Complex>(total)};
        for (std::size_t r = 0; r < weights.size(); ++r) {
            std::fill(q.begin(), q.end(), 0.0);
            for (std::size_t c = 0; c < components_.size(); ++c) {
                for (std::size_t lin = 0; lin < total; ++lin) {
                    const int s = shell_index_[lin];
                    g.coefficients[lin] = s < 0 ? Complex(0.0)
                                                : fhat_.coefficients[lin] * angular_[c * total + lin] *
                                                      weights[r][static_cast<std::size_t>(s)];
                }
                const auto v = inverse_transform(g);
                for (std::size_t i = 0; i < total; ++i)
                    q[i] += real_ ? v.samples[i].real() * v.samples[i].real() : std::norm(v.samples[i]);
            }
            for (std::size_t i = 0; i < total; ++i) gmax[i] = std::max(gmax[i], q[i]);
            if (r + 1 == weights.size() || group[r + 1] != group[r]) {
                const double cg = coef[static_cast<std::size_t>(group[r])];
                for (std::size_t i = 0; i < total; ++i) {
                    out[i] += cg * gmax[i];
                    gmax[i] = 0.0;
                }
            }
        }
    }

    GridSpec spec_;
    std::vector<AngularFactor> components_;
    SpectralField fhat_;
    bool real_ = false;
    bool use_shells_ = true;
    std::vector<double> radii_;
    std::vector<int> shell_index_;
    std::vector<Complex> angular_;
    std::vector<std::vector<double>> re_, im_, gram_;
};

/// Operator families with a free truncation or time parameter t.
enum class FamilyKind { TruncatedRiesz, FactorM, Poisson, ConjugatePoisson };

struct Family {
    FamilyKind kind = FamilyKind::FactorM;
    int j = 1;
};

namespace detail {

inline std::vector<double> sorted_unique(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

inline void check_t_values(std::span<const double> ts) {
    if (ts.empty()) throw DomainError("truncation grid is empty");
    for (double t : ts)
        if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("truncation values must be positive");
}

// weights[row][shell] = m(t_row · ρ_shell), prefilled in one batch.
inline std::vector<std::vector<double>> m_weights(int d, std::span<const double> ts, const std::vector<double>& radii,
                                                  MultiplierCache& cache) {
    std::vector<double> xs;
    xs.reserve(ts.size() * radii.size());
    for (double t : ts)
        for (double rho : radii) xs.push_back(t * rho);
    cache.prefill(d, xs);
    std::vector<std::vector<double>> w(ts.size(), std::vector<double>(radii.size()));
    for (std::size_t i = 0; i < ts.size(); ++i)
        for (std::size_t s = 0; s < radii.size(); ++s) w[i][s] = cache(d, ts[i] * radii[s]);
    return w;
}

inline std::vector<std::vector<double>> poisson_weights(int d, std::span<const double> ts,
                                                        const std::vector<double>& radii) {
    std::vector<std::vector<double>> w(ts.size(), std::vector<double>(radii.size()));
    for (std::size_t i = 0; i < ts.size(); ++i)
        for (std::size_t s = 0; s < radii.size(); ++s) w[i][s] = poisson_symbol(ts[i], radii[s], d);
    return w;
}

inline std::vector<double> sqrt_all(std::vector<double> v) {
    for (auto& x : v) x = std::sqrt(x);
    return v;
}

}  // namespace detail

/// Radial weight rows w(t_i ρ_s) of a family over the given t values.
inline std::vector<std::vector<double>> family_weights(const Family& family, int d, std::span<const double> ts,
                                                       const std::vector<double>& radii, MultiplierCache& cache) {
    switch (family.kind) {
        case FamilyKind::TruncatedRiesz:
        case FamilyKind::FactorM: return detail::m_weights(d, ts, radii, cache);
        case FamilyKind::Poisson:
        case FamilyKind::ConjugatePoisson: return detail::poisson_weights(d, ts, radii);
    }
    throw DomainError("unknown family");
}

inline AngularFactor family_factor(const Family& family, int d) {
    if (family.kind == FamilyKind::TruncatedRiesz || family.kind == FamilyKind::ConjugatePoisson) {
        detail::check_axis(family.j, d);
        return riesz_factor(family.j);
    }
    return unit_factor();
}

/// sup over t ∈ ts of |op_t f(x)|, pointwise.
inline std::vector<double> maximal_over(const SpatialField& f, const Family& family, std::span<const double> ts,
                                        MultiplierCache& cache) {
    detail::check_t_values(ts);
    const int d = f.spec.dimension;
    const RadialFamily rf(f, {family_factor(family, d)});
    const auto w = family_weights(family, d, ts, rf.radii(), cache);
    return detail::sqrt_all(rf.reduce(w, std::vector<int>(ts.size(), 0), {1.0}));
}

inline std::vector<double> maximal_over(const SpatialField& f, const Family& family, const TruncationGrid& grid,
                                        MultiplierCache& cache) {
    const auto ts = grid.values();
    return maximal_over(f, family, ts, cache);
}

/// (Σ_j |R_j^t f|²)^{1/2}, pointwise.
inline std::vector<double> vector_truncated_riesz(const SpatialField& f, double t, MultiplierCache& cache) {
    detail::check_parameter(t, false, "truncation t");
    const double ts[1] = {t};
    const int d = f.spec.dimension;
    std::vector<AngularFactor> comps;
    for (int j = 1; j <= d; ++j) comps.push_back(riesz_factor(j));
    const RadialFamily rf(f, std::move(comps));
    const auto w = detail::m_weights(d, ts, rf.radii(), cache);
    return detail::sqrt_all(rf.reduce(w, {0}, {1.0}));
}

/// sup over t ∈ ts of (Σ_j |R_j^t f|²)^{1/2}, pointwise.
inline std::vector<double> vector_maximal(const SpatialField& f, std::span<const double> ts, MultiplierCache& cache) {
    detail::check_t_values(ts);
    const int d = f.spec.dimension;
    std::vector<AngularFactor> comps;
    for (int j = 1; j <= d; ++j) comps.push_back(riesz_factor(j));
    const RadialFamily rf(f, std::move(comps));
    const auto w = detail::m_weights(d, ts, rf.radii(), cache);
    return detail::sqrt_all(rf.reduce(w, std::vector<int>(ts.size(), 0), {1.0}));
}

inline std::vector<double> vector_maximal(const SpatialField& f, const TruncationGrid& grid, MultiplierCache& cache) {
    const auto ts = grid.values();
    return vector_maximal(f, ts, cache);
}

/// Log-spaced nodes t_i = 2^{n_min + i/per_octave}, i = 0..(n_max-n_min)·per_octave.
inline std::vector<double> log_nodes(int n_min, int n_max, int per_octave) {
    if (n_min >= n_max || per_octave < 1) throw DomainError("log_nodes: need n_min < n_max and per_octave >= 1");
    std::vector<double> ts;
    const int count = (n_max - n_min) * per_octave;
    for (int i = 0; i <= count; ++i) ts.push_back(std::exp2(n_min + static_cast<double>(i) / per_octave));
    return ts;
}

/// g(f)(x) = (∫ t |∂_t P_t f(x)|² dt)^{1/2}, trapezoid rule in ln t over the
/// increasing positive nodes: ∫ t |·|² dt = ∫ t² |·|² d(ln t).
inline std::vector<double> square_function(const SpatialField& f, std::span<const double> t_nodes) {
    if (t_nodes.empty()) throw DomainError("square_function: no nodes");
    for (std::size_t i = 0; i < t_nodes.size(); ++i) {
        if (!(t_nodes[i] > 0.0)) throw DomainError("square_function: nodes must be positive");
        if (i > 0 && !(t_nodes[i] > t_nodes[i - 1])) throw DomainError("square_function: nodes must increase");
    }
    const int d = f.spec.dimension;
    const double sd = std::sqrt(static_cast<double>(d));
    const RadialFamily rf(f, {unit_factor()});
    const std::size_t n = t_nodes.size();
    std::vector<std::vector<double>> w(n, std::vector<double>(rf.radii().size()));
    std::vector<int> group(n);
    std::vector<double> coef(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        group[i] = static_cast<int>(i);
        for (std::size_t s = 0; s < rf.radii().size(); ++s) {
            const double a = rf.radii()[s] / sd;
            w[i][s] = -a * std::exp(-t_nodes[i] * a);
        }
        double dlog = 0.0;
        if (i > 0) dlog += 0.5 * std::log(t_nodes[i] / t_nodes[i - 1]);
        if (i + 1 < n) dlog += 0.5 * std::log(t_nodes[i + 1] / t_nodes[i]);
        coef[i] = t_nodes[i] * t_nodes[i] * dlog;
    }
    return detail::sqrt_all(rf.reduce(w, group, coef));
}

/// (Σ_{n_min ≤ n ≤ n_max} |S_n f(x)|²)^{1/2}.
inline std::vector<double> projection_square_sum(const SpatialField& f, int n_min, int n_max) {
    if (n_min > n_max) throw DomainError("projection_square_sum: empty range");
    const int d = f.spec.dimension;
    const RadialFamily rf(f, {unit_factor()});
    const std::size_t rows = static_cast<std::size_t>(n_max - n_min + 1);
    std::vector<std::vector<double>> w(rows, std::vector<double>(rf.radii().size()));
    std::vector<int> group(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        const int nn = n_min + static_cast<int>(i);
        group[i] = static_cast<int>(i);
        for (std::size_t s = 0; s < rf.radii().size(); ++s)
            w[i][s] = detail::poisson_symbol(std::ldexp(1.0, nn - 1), rf.radii()[s], d) -
                      detail::poisson_symbol(std::ldexp(1.0, nn), rf.radii()[s], d);
    }
    return detail::sqrt_all(rf.reduce(w, group, std::vector<double>(rows, 1.0)));
}

/// Σ_{n_min ≤ n ≤ n_max} S_n f, summed term by term.
inline SpatialField poisson_projection_sum(const SpatialField& f, int n_min, int n_max) {
    if (n_min > n_max) throw DomainError("poisson_projection_sum: empty range");
    const int d = f.spec.dimension;
    return apply_multiplier(f, [&](std::span<const double> xi, std::span<const int>) -> Complex {
        double r2 = 0.0;
        for (double v : xi) r2 += v * v;
        const double rho = std::sqrt(r2);
        double s = 0.0;
        for (int n = n_min; n <= n_max; ++n)
            s += detail::poisson_symbol(std::ldexp(1.0, n - 1), rho, d) - detail::poisson_symbol(std::ldexp(1.0, n), rho, d);
        return s;
    });
}

/// H_θ^ε f = (1/π) ∫_{|s|>ε} f(x - sθ) ds/s, applied spectrally.
inline SpatialField directional_hilbert_trunc(const SpatialField& f, std::span<const double> theta, double eps) {
    const int d = f.spec.dimension;
    if (d < 2 || d > 3) throw UnsupportedError("directional Hilbert transforms are supported for d = 2, 3");
    detail::check_unit(theta, d);
    detail::check_parameter(eps, false, "epsilon");
    return apply_multiplier(f, [&](std::span<const double> xi, std::span<const int>) {
        double a = 0.0;
        for (std::size_t i = 0; i < xi.size(); ++i) a += theta[i] * xi[i];
        return detail::hilbert_trunc_symbol(a, eps);
    });
}

/// Quadrature nodes θ and weights on S^{d-1}: the trapezoid rule on the
/// circle for d = 2; Gauss-Legendre in cos(polar) times the trapezoid rule in
/// azimuth for d = 3, with about n_angles nodes in total.
inline std::vector<std::pair<std::vector<double>, double>> sphere_rule(int d, int n_angles) {
    if (d < 2 || d > 3) throw UnsupportedError("sphere rules are provided for d = 2, 3");
    if (n_angles < 16) throw DomainError("sphere_rule: need at least 16 angles");
    std::vector<std::pair<std::vector<double>, double>> rule;
    const double two_pi = 2.0 * std::numbers::pi;
    if (d == 2) {
        for (int k = 0; k < n_angles; ++k) {
            const double phi = two_pi * (k + 0.5) / n_angles;
            rule.push_back({{std::cos(phi), std::sin(phi)}, two_pi / n_angles});
        }
        return rule;
    }
    const int n_polar = std::max(4, static_cast<int>(std::lround(std::sqrt(n_angles / 2.0))));
    const int n_az = std::max(8, n_angles / n_polar);
    const auto [z, wz] = gauss_legendre(n_polar);
    for (int i = 0; i < n_polar; ++i) {
        const double c = z[static_cast<std::size_t>(i)];
        const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
        for (int k = 0; k < n_az; ++k) {
            const double phi = two_pi * (k + 0.5) / n_az;
            rule.push_back({{s * std::cos(phi), s * std::sin(phi), c}, wz[static_cast<std::size_t>(i)] * two_pi / n_az});
        }
    }
    return rule;
}

/// R_j^t f ≈ (c_d π/2) Σ_θ w_θ θ_j H_θ^t f over sphere_rule(d, n_angles).
/// The directional symbols are summed per coefficient before one inverse
/// transform, which is the same linear combination of the H_θ^t f.
inline SpatialField rotation_reconstruct(const SpatialField& f, int j, double t, int n_angles) {
    const int d = f.spec.dimension;
    if (d < 2 || d > 3) throw UnsupportedError("rotation_reconstruct supports d = 2, 3");
    detail::check_axis(j, d);
    detail::check_parameter(t, false, "truncation t");
    const auto rule = sphere_rule(d, n_angles);
    const double pref = kernel_constant(d) * std::numbers::pi / 2.0;
    return apply_multiplier(f, [&](std::span<const double> xi, std::span<const int>) {
        Complex s = 0.0;
        for (const auto& [theta, w] : rule) {
            double a = 0.0;
            for (std::size_t i = 0; i < xi.size(); ++i) a += theta[i] * xi[i];
            s += w * theta[static_cast<std::size_t>(j - 1)] * detail::hilbert_trunc_symbol(a, t);
        }
        return pref * s;
    });
}

/// ∫_{S^{d-1}} |θ_1|^q dθ = S_{d-1} Γ(d/2) Γ((q+1)/2) / (√π Γ((d+q)/2)).
inline double sphere_moment(double q, int d) {
    if (!(q > 0.0)) throw DomainError("sphere_moment: q must be positive");
    if (d < 1) throw DomainError("sphere_moment: d must be >= 1");
    const double log_v = std::log(sphere_area(d)) + std::lgamma(0.5 * d) + std::lgamma(0.5 * (q + 1.0)) -
                         0.5 * std::log(std::numbers::pi) - std::lgamma(0.5 * (d + q));
    return std::exp(log_v);
}

/// Relative L² distance ‖a - b‖/‖b‖.
inline double relative_l2_error(const SpatialField& a, const SpatialField& b) {
    if (!(a.spec == b.spec)) throw DomainError("relative_l2_error: grid mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        num += std::norm(a.samples[i] - b.samples[i]);
        den += std::norm(b.samples[i]);
    }
    return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

}  // namespace riesz
