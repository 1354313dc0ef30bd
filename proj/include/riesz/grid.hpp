#pragma once

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "riesz/errors.hpp"

namespace riesz {

using Complex = std::complex<double>;

/// d-dimensional periodic box of side `period` sampled with N points per axis.
struct GridSpec {
    int dimension = 1;
    int points_per_axis = 4;
    double period = 1.0;

    static constexpr std::uint64_t kDefaultBudget = std::uint64_t{1} << 24;

    /// Throws DomainError on a malformed spec and ResourceError when N^d
    /// exceeds `budget` samples.
    void validate(std::uint64_t budget = kDefaultBudget) const {
        if (dimension < 1) throw DomainError("GridSpec: dimension must be >= 1");
        if (points_per_axis < 4 || points_per_axis % 2 != 0)
            throw DomainError("GridSpec: points per axis must be even and >= 4");
        if (!(period > 0.0) || !std::isfinite(period)) throw DomainError("GridSpec: period must be positive");
        std::uint64_t total = 1;
        for (int i = 0; i < dimension; ++i) {
            if (total > budget / static_cast<std::uint64_t>(points_per_axis))
                throw ResourceError("GridSpec: N^d = " + std::to_string(points_per_axis) + "^" +
                                    std::to_string(dimension) + " exceeds the sample budget");
            total *= static_cast<std::uint64_t>(points_per_axis);
        }
    }

    std::size_t size() const {
        std::size_t total = 1;
        for (int i = 0; i < dimension; ++i) total *= static_cast<std::size_t>(points_per_axis);
        return total;
    }

    double cell_volume() const { return std::pow(period / points_per_axis, dimension); }

    bool operator==(const GridSpec&) const = default;
};

/// Samples of a function on the grid, row-major (last axis fastest).
struct SpatialField {
    GridSpec spec;
    std::vector<Complex> samples;

    SpatialField() = default;
    explicit SpatialField(const GridSpec& s) : spec(s), samples(s.size()) { s.validate(); }
    SpatialField(const GridSpec& s, std::vector<Complex> data) : spec(s), samples(std::move(data)) {
        s.validate();
        if (samples.size() != s.size()) throw DomainError("SpatialField: sample count does not match N^d");
    }
};

/// Unitary Fourier coefficients stored in FFT order: the index i along an
/// axis holds the frequency k = i for i < N/2 and k = i - N otherwise, so
/// k ranges over [-N/2, N/2). The physical frequency is ξ = k / L.
struct SpectralField {
    GridSpec spec;
    std::vector<Complex> coefficients;
};

/// Signed frequency of FFT-order index i on an axis with N points.
inline int signed_frequency(int i, int n) { return i < n / 2 ? i : i - n; }

/// Calls fn(linear_index, k) for every lattice frequency, k given as a span
/// of d signed integers. Iterates in storage order.
template <class Fn>
void for_each_frequency(const GridSpec& spec, Fn&& fn) {
    const int d = spec.dimension, n = spec.points_per_axis;
    std::vector<int> idx(static_cast<std::size_t>(d), 0), k(static_cast<std::size_t>(d), 0);
    const std::size_t total = spec.size();
    for (std::size_t lin = 0; lin < total; ++lin) {
        fn(lin, std::span<const int>(k));
        for (int ax = d - 1; ax >= 0; --ax) {
            auto a = static_cast<std::size_t>(ax);
            if (++idx[a] < n) {
                k[a] = signed_frequency(idx[a], n);
                break;
            }
            idx[a] = 0;
            k[a] = 0;
        }
    }
}

/// Linear storage index of the signed frequency k (each |k_i| ≤ N/2).
inline std::size_t frequency_index(const GridSpec& spec, std::span<const int> k) {
    std::size_t lin = 0;
    const int n = spec.points_per_axis;
    for (int ax = 0; ax < spec.dimension; ++ax) {
        const int i = ((k[static_cast<std::size_t>(ax)] % n) + n) % n;
        lin = lin * static_cast<std::size_t>(n) + static_cast<std::size_t>(i);
    }
    return lin;
}

namespace detail {

// FFTW planning is not thread-safe; plans are created once per shape and
// direction under a lock and executed through the new-array interface.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(const GridSpec& spec, int sign) {
        const auto key = std::make_tuple(spec.dimension, spec.points_per_axis, sign);
        std::lock_guard lock(mutex_);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        std::vector<int> dims(static_cast<std::size_t>(spec.dimension), spec.points_per_axis);
        std::vector<Complex> scratch(spec.size());
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        fftw_plan plan = fftw_plan_dft(spec.dimension, dims.data(), buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (plan == nullptr) throw ResourceError("FFTW could not plan the transform");
        plans_.emplace(key, plan);
        return plan;
    }

    PlanCache(const PlanCache&) = delete;
    PlanCache& operator=(const PlanCache&) = delete;

private:
    PlanCache() = default;
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

inline void execute_in_place(const GridSpec& spec, std::vector<Complex>& data, int sign) {
    fftw_plan plan = PlanCache::instance().get(spec, sign);
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, buf, buf);
}

}  // namespace detail

/// Unitary transform: c_k = L^{d/2} N^{-d} Σ_x f(x) e^{-2πi k·x/L}, so that
/// Σ|c_k|² = (L/N)^d Σ|f(x)|².
inline SpectralField forward_transform(const SpatialField& f) {
    f.spec.validate();
    SpectralField out{f.spec, f.samples};
    detail::execute_in_place(f.spec, out.coefficients, FFTW_FORWARD);
    const double scale = std::pow(f.spec.period, 0.5 * f.spec.dimension) / static_cast<double>(f.spec.size());
    for (auto& c : out.coefficients) c *= scale;
    return out;
}

/// Inverse of forward_transform: f(x) = L^{-d/2} Σ_k c_k e^{2πi k·x/L}.
inline SpatialField inverse_transform(const SpectralField& fhat) {
    fhat.spec.validate();
    if (fhat.coefficients.size() != fhat.spec.size()) throw DomainError("SpectralField: coefficient count mismatch");
    SpatialField out;
    out.spec = fhat.spec;
    out.samples = fhat.coefficients;
    detail::execute_in_place(fhat.spec, out.samples, FFTW_BACKWARD);
    const double scale = std::pow(fhat.spec.period, -0.5 * fhat.spec.dimension);
    for (auto& v : out.samples) v *= scale;
    return out;
}

/// Discrete L^p norm with cell weight (L/N)^d.
inline double lp_norm(const SpatialField& f, double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("lp_norm: p must lie in [1, inf)");
    double sum = 0.0;
    if (p == 2.0) {
        for (const auto& v : f.samples) sum += std::norm(v);
        return std::sqrt(sum * f.spec.cell_volume());
    }
    for (const auto& v : f.samples) sum += std::pow(std::abs(v), p);
    return std::pow(sum * f.spec.cell_volume(), 1.0 / p);
}

inline double l2_norm(const SpatialField& f) { return lp_norm(f, 2.0); }

inline double sup_norm(const SpatialField& f) {
    double best = 0.0;
    for (const auto& v : f.samples) best = std::max(best, std::abs(v));
    return best;
}

/// L^p norm of a nonnegative real sample vector on `spec` (maximal functions).
inline double lp_norm(const GridSpec& spec, std::span<const double> values, double p = 2.0) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("lp_norm: p must lie in [1, inf)");
    double sum = 0.0;
    if (p == 2.0) {
        for (double v : values) sum += v * v;
        return std::sqrt(sum * spec.cell_volume());
    }
    for (double v : values) sum += std::pow(std::abs(v), p);
    return std::pow(sum * spec.cell_volume(), 1.0 / p);
}

/// Zeroes coefficients below 16 ε · max|c|. Transform roundoff otherwise
/// spreads ~1e-17 content over the whole lattice.
inline void prune_roundoff(SpectralField& fhat) {
    double peak = 0.0;
    for (const auto& c : fhat.coefficients) peak = std::max(peak, std::abs(c));
    const double cutoff = 16.0 * std::numeric_limits<double>::epsilon() * peak;
    for (auto& c : fhat.coefficients)
        if (std::abs(c) <= cutoff) c = 0.0;
}

/// ℓ² norm of coefficients; equals l2_norm of the field by Parseval.
inline double l2_norm(const SpectralField& f) {
    double sum = 0.0;
    for (const auto& c : f.coefficients) sum += std::norm(c);
    return std::sqrt(sum);
}

/// Real field with i.i.d. complex Gaussian coefficients on 0 < |k|/L ≤ band,
/// conjugate-symmetrized, zero elsewhere (including k = 0).
///
/// Coefficients are drawn in a canonical order over the frequency ball that
/// does not depend on N, so one seed gives the same continuum function on
/// every grid fine enough to hold the band.
inline SpatialField random_band_limited(const GridSpec& spec, double band_radius, std::uint64_t seed) {
    spec.validate();
    const double nyquist = spec.points_per_axis / (2.0 * spec.period);
    if (!(band_radius > 0.0) || !(band_radius < nyquist))
        throw DomainError("random_band_limited: band radius must lie in (0, N/(2L))");
    const int d = spec.dimension;
    const double kmax = band_radius * spec.period;
    const int reach = static_cast<int>(std::floor(kmax));
    const double limit2 = kmax * kmax * (1.0 + 1e-12);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    SpectralField fhat{spec, std::vector<Complex>(spec.size())};

    std::vector<int> k(static_cast<std::size_t>(d), -reach), neg(static_cast<std::size_t>(d));
    while (true) {
        long r2 = 0;
        int leading = 0;
        for (int v : k) {
            r2 += static_cast<long>(v) * v;
            if (leading == 0) leading = v;
        }
        if (r2 > 0 && static_cast<double>(r2) <= limit2 && leading > 0) {
            const double re = normal(rng);
            const double im = normal(rng);
            const Complex c(re, im);
            for (std::size_t i = 0; i < k.size(); ++i) neg[i] = -k[i];
            fhat.coefficients[frequency_index(spec, k)] = c;
            fhat.coefficients[frequency_index(spec, neg)] = std::conj(c);
        }
        int ax = d - 1;
        while (ax >= 0 && k[static_cast<std::size_t>(ax)] == reach) {
            k[static_cast<std::size_t>(ax)] = -reach;
            --ax;
        }
        if (ax < 0) break;
        ++k[static_cast<std::size_t>(ax)];
    }
    auto f = inverse_transform(fhat);
    for (auto& v : f.samples) v = Complex(v.real(), 0.0);
    return f;
}

/// Single Fourier mode e^{2πi k·x/L} (unit L² norm on the unit box).
inline SpatialField plane_wave(const GridSpec& spec, std::span<const int> k, Complex amplitude = 1.0) {
    spec.validate();
    SpatialField f(spec);
    const int n = spec.points_per_axis;
    std::vector<int> idx(static_cast<std::size_t>(spec.dimension), 0);
    for (std::size_t lin = 0; lin < f.samples.size(); ++lin) {
        double phase = 0.0;
        for (int ax = 0; ax < spec.dimension; ++ax)
            phase += static_cast<double>(k[static_cast<std::size_t>(ax)]) * idx[static_cast<std::size_t>(ax)] / n;
        f.samples[lin] = amplitude * std::polar(1.0, 2.0 * std::numbers::pi * phase);
        for (int ax = spec.dimension - 1; ax >= 0; --ax) {
            if (++idx[static_cast<std::size_t>(ax)] < n) break;
            idx[static_cast<std::size_t>(ax)] = 0;
        }
    }
    return f;
}

// Binary layout: d, N as little-endian int64, L as little-endian IEEE-754
// double, then N^d samples as interleaved little-endian (re, im) doubles.
namespace detail {

inline void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xffu);
    os.write(reinterpret_cast<const char*>(bytes), 8);
}

inline std::uint64_t get_u64(std::istream& is) {
    unsigned char bytes[8];
    if (!is.read(reinterpret_cast<char*>(bytes), 8)) throw DomainError("field file truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return v;
}

}  // namespace detail

inline void write_field(std::ostream& os, const SpatialField& f) {
    detail::put_u64(os, static_cast<std::uint64_t>(f.spec.dimension));
    detail::put_u64(os, static_cast<std::uint64_t>(f.spec.points_per_axis));
    detail::put_u64(os, std::bit_cast<std::uint64_t>(f.spec.period));
    for (const auto& v : f.samples) {
        detail::put_u64(os, std::bit_cast<std::uint64_t>(v.real()));
        detail::put_u64(os, std::bit_cast<std::uint64_t>(v.imag()));
    }
}

inline SpatialField read_field(std::istream& is, std::uint64_t budget = GridSpec::kDefaultBudget) {
    GridSpec spec;
    const auto d = static_cast<std::int64_t>(detail::get_u64(is));
    const auto n = static_cast<std::int64_t>(detail::get_u64(is));
    if (d < 1 || d > 64 || n < 4 || n > (1 << 24)) throw DomainError("field file: bad header");
    spec.dimension = static_cast<int>(d);
    spec.points_per_axis = static_cast<int>(n);
    spec.period = std::bit_cast<double>(detail::get_u64(is));
    spec.validate(budget);
    SpatialField f(spec);
    for (auto& v : f.samples) {
        const double re = std::bit_cast<double>(detail::get_u64(is));
        const double im = std::bit_cast<double>(detail::get_u64(is));
        v = Complex(re, im);
    }
    return f;
}

inline void save_field(const std::string& path, const SpatialField& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    write_field(os, f);
}

inline SpatialField load_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    return read_field(is);
}

}  // namespace riesz
