#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "riesz/errors.hpp"
#include "riesz/grid.hpp"
#include "support.hpp"

using namespace riesz;
using testing_support::Gen;

namespace {

SpatialField random_complex(const GridSpec& spec, Gen& g) {
    SpatialField f(spec);
    for (auto& v : f.samples) v = Complex(g.uniform(-1, 1), g.uniform(-1, 1));
    return f;
}

// Direct O(N^{2d}) evaluation of the unitary coefficients.
std::vector<Complex> naive_dft(const SpatialField& f) {
    const auto& s = f.spec;
    const int d = s.dimension, n = s.points_per_axis;
    std::vector<Complex> out(s.size());
    std::vector<int> xi(static_cast<std::size_t>(d));
    for_each_frequency(s, [&](std::size_t lin, std::span<const int> k) {
        Complex acc = 0.0;
        std::fill(xi.begin(), xi.end(), 0);
        for (std::size_t x = 0; x < s.size(); ++x) {
            double phase = 0.0;
            for (int a = 0; a < d; ++a) phase += double(k[std::size_t(a)]) * xi[std::size_t(a)] / n;
            acc += f.samples[x] * std::polar(1.0, -2.0 * std::numbers::pi * phase);
            for (int a = d - 1; a >= 0; --a) {
                if (++xi[std::size_t(a)] < n) break;
                xi[std::size_t(a)] = 0;
            }
        }
        out[lin] = acc * std::pow(s.period, 0.5 * d) / double(s.size());
    });
    return out;
}

}  // namespace

TEST(GridSpec, Validation) {
    EXPECT_NO_THROW((GridSpec{3, 8, 1.0}.validate()));
    EXPECT_THROW((GridSpec{0, 8, 1.0}.validate()), DomainError);
    EXPECT_THROW((GridSpec{2, 7, 1.0}.validate()), DomainError);
    EXPECT_THROW((GridSpec{2, 2, 1.0}.validate()), DomainError);
    EXPECT_THROW((GridSpec{2, 8, 0.0}.validate()), DomainError);
    EXPECT_THROW((GridSpec{2, 8, -1.0}.validate()), DomainError);
    EXPECT_THROW((GridSpec{10, 16, 1.0}.validate()), ResourceError);
    EXPECT_THROW((GridSpec{2, 64, 1.0}.validate(1000)), ResourceError);
    EXPECT_EQ((GridSpec{3, 4, 1.0}.size()), 64u);
    EXPECT_DOUBLE_EQ((GridSpec{2, 4, 2.0}.cell_volume()), 0.25);
}

TEST(Transform, MatchesNaiveDft) {
    Gen g(21);
    for (const auto& spec : {GridSpec{1, 16, 1.0}, GridSpec{2, 6, 2.0}, GridSpec{3, 4, 0.7}, GridSpec{2, 8, 1.0}}) {
        const auto f = random_complex(spec, g);
        const auto fast = forward_transform(f);
        const auto slow = naive_dft(f);
        for (std::size_t i = 0; i < slow.size(); ++i) EXPECT_NEAR(std::abs(fast.coefficients[i] - slow[i]), 0.0, 1e-12);
    }
}

TEST(Transform, InverseRoundTrip) {
    Gen g(22);
    for (int i = 0; i < 30; ++i) {
        const auto spec = testing_support::small_spec(g, 1, 5);
        const auto f = random_complex(spec, g);
        const auto back = inverse_transform(forward_transform(f));
        EXPECT_LT(testing_support::max_abs_diff(f, back), 1e-12);
    }
}

TEST(Transform, Parseval) {
    Gen g(23);
    for (int i = 0; i < 30; ++i) {
        const auto spec = testing_support::small_spec(g, 1, 5);
        const auto f = random_complex(spec, g);
        EXPECT_NEAR(l2_norm(forward_transform(f)), l2_norm(f), 1e-12 * l2_norm(f));
    }
}

TEST(Transform, PlaneWaveHasOneCoefficient) {
    const GridSpec spec{3, 8, 2.0};
    const std::vector<int> k{1, -2, 3};
    const auto c = forward_transform(plane_wave(spec, k, Complex(0.5, 1.0))).coefficients;
    const std::size_t at = frequency_index(spec, k);
    for (std::size_t i = 0; i < c.size(); ++i) {
        const Complex expected = i == at ? Complex(0.5, 1.0) * std::pow(2.0, 1.5) : Complex(0.0);
        EXPECT_NEAR(std::abs(c[i] - expected), 0.0, 1e-12);
    }
}

TEST(Frequencies, IndexInvertsEnumeration) {
    const GridSpec spec{3, 6, 1.0};
    std::size_t count = 0;
    for_each_frequency(spec, [&](std::size_t lin, std::span<const int> k) {
        EXPECT_EQ(frequency_index(spec, k), lin);
        for (int v : k) {
            EXPECT_GE(v, -3);
            EXPECT_LT(v, 3);
        }
        ++count;
    });
    EXPECT_EQ(count, spec.size());
    EXPECT_EQ(signed_frequency(0, 8), 0);
    EXPECT_EQ(signed_frequency(3, 8), 3);
    EXPECT_EQ(signed_frequency(4, 8), -4);
    EXPECT_EQ(signed_frequency(7, 8), -1);
}

TEST(Norms, ConstantField) {
    const GridSpec spec{2, 8, 3.0};
    SpatialField f(spec, std::vector<Complex>(spec.size(), Complex(2.0, 0.0)));
    for (double p : {1.0, 1.5, 2.0, 3.0}) EXPECT_NEAR(lp_norm(f, p), 2.0 * std::pow(9.0, 1.0 / p), 1e-12);
    EXPECT_DOUBLE_EQ(sup_norm(f), 2.0);
    std::vector<double> v(spec.size(), 2.0);
    EXPECT_NEAR(lp_norm(spec, v, 3.0), lp_norm(f, 3.0), 1e-12);
    EXPECT_THROW(lp_norm(f, 0.5), DomainError);
}

TEST(Norms, HolderOrdering) {
    // On a box of volume 1, ‖f‖_p increases with p.
    Gen g(24);
    for (int i = 0; i < 20; ++i) {
        const auto spec = GridSpec{2, 8, 1.0};
        const auto f = random_complex(spec, g);
        EXPECT_LE(lp_norm(f, 1.0), lp_norm(f, 1.5) + 1e-14);
        EXPECT_LE(lp_norm(f, 1.5), lp_norm(f, 2.0) + 1e-14);
        EXPECT_LE(lp_norm(f, 3.0), sup_norm(f) + 1e-14);
    }
}

TEST(RandomField, RealBandLimitedAndDeterministic) {
    Gen g(25);
    for (int i = 0; i < 15; ++i) {
        const auto spec = testing_support::small_spec(g, 1, 4);
        const double nyq = spec.points_per_axis / (2 * spec.period);
        const double band = g.uniform(1.0 / spec.period, 0.9 * nyq);
        const auto seed = g.seed();
        const auto f = random_band_limited(spec, band, seed);
        for (const auto& v : f.samples) EXPECT_EQ(v.imag(), 0.0);
        const auto fhat = forward_transform(f);
        for_each_frequency(spec, [&](std::size_t lin, std::span<const int> k) {
            double r2 = 0;
            for (int v : k) r2 += double(v) * v;
            if (r2 == 0 || std::sqrt(r2) / spec.period > band * (1 + 1e-9)) {
                EXPECT_LT(std::abs(fhat.coefficients[lin]), 1e-12);
            }
        });
        EXPECT_EQ(testing_support::max_abs_diff(f, random_band_limited(spec, band, seed)), 0.0);
    }
}

TEST(RandomField, SameFunctionOnFinerGrid) {
    const GridSpec coarse{2, 16, 1.0}, fine{2, 32, 1.0};
    const auto a = forward_transform(random_band_limited(coarse, 5.0, 99));
    const auto b = forward_transform(random_band_limited(fine, 5.0, 99));
    for_each_frequency(coarse, [&](std::size_t lin, std::span<const int> k) {
        if (std::abs(k[0]) >= 8 || std::abs(k[1]) >= 8) return;
        EXPECT_NEAR(std::abs(a.coefficients[lin] - b.coefficients[frequency_index(fine, k)]), 0.0, 1e-12);
    });
}

TEST(RandomField, RejectsBandAtNyquist) {
    EXPECT_THROW(random_band_limited({2, 8, 1.0}, 4.0, 1), DomainError);
    EXPECT_THROW(random_band_limited({2, 8, 1.0}, 0.0, 1), DomainError);
}

TEST(Pruning, RemovesRoundoffOnly) {
    SpectralField s{{1, 4, 1.0}, {Complex(1.0), Complex(1e-17), Complex(1e-10), Complex(0.0, -1e-18)}};
    prune_roundoff(s);
    EXPECT_EQ(s.coefficients[1], Complex(0.0));
    EXPECT_EQ(s.coefficients[3], Complex(0.0));
    EXPECT_EQ(s.coefficients[2], Complex(1e-10));
}

TEST(FieldIo, BinaryRoundTrip) {
    Gen g(26);
    const auto f = random_complex({3, 4, 1.25}, g);
    std::stringstream ss;
    write_field(ss, f);
    EXPECT_EQ(ss.str().size(), 24u + 16u * f.samples.size());
    const auto back = read_field(ss);
    EXPECT_EQ(back.spec, f.spec);
    EXPECT_EQ(testing_support::max_abs_diff(f, back), 0.0);
}

TEST(FieldIo, RejectsTruncatedAndOversized) {
    Gen g(27);
    std::stringstream ss;
    write_field(ss, random_complex({2, 4, 1.0}, g));
    std::string bytes = ss.str();
    std::stringstream cut(bytes.substr(0, bytes.size() - 5));
    EXPECT_THROW(read_field(cut), DomainError);
    std::stringstream big(bytes);
    EXPECT_THROW(read_field(big, 8), ResourceError);
    std::string bad = bytes;
    bad[0] = 0;
    std::stringstream badhdr(bad);
    EXPECT_THROW(read_field(badhdr), DomainError);
}

TEST(FieldIo, FileRoundTrip) {
    Gen g(28);
    const auto f = random_complex({2, 6, 1.0}, g);
    const std::string path = ::testing::TempDir() + "field.bin";
    save_field(path, f);
    EXPECT_EQ(testing_support::max_abs_diff(load_field(path), f), 0.0);
}
