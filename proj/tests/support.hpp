#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "riesz/grid.hpp"

namespace testing_support {

/// Seeded generator for property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
    double log_uniform(double a, double b) { return std::exp(uniform(std::log(a), std::log(b))); }
    int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng_); }
    std::uint64_t seed() { return rng_(); }

    template <class T>
    const T& pick(const std::vector<T>& v) {
        return v[static_cast<std::size_t>(integer(0, static_cast<int>(v.size()) - 1))];
    }

private:
    std::mt19937_64 rng_;
};

/// Small random grid: d in [dmin, dmax], N chosen to keep N^d modest.
inline riesz::GridSpec small_spec(Gen& g, int dmin, int dmax) {
    const int d = g.integer(dmin, dmax);
    static const int caps[] = {0, 64, 32, 16, 10, 6, 6};
    const int cap = d < 7 ? caps[d] : 4;
    const int N = 2 * g.integer(2, cap / 2);
    return {d, N, g.uniform(0.5, 2.0)};
}

inline double max_abs_diff(const riesz::SpatialField& a, const riesz::SpatialField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) m = std::max(m, std::abs(a.samples[i] - b.samples[i]));
    return m;
}

}  // namespace testing_support
