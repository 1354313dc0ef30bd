#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "riesz/errors.hpp"
#include "riesz/operators.hpp"
#include "support.hpp"

using namespace riesz;
using testing_support::Gen;
using testing_support::max_abs_diff;

namespace {

constexpr double kPi = std::numbers::pi;

SpatialField laplacian(const SpatialField& f) {
    return apply_multiplier(f, [](std::span<const double> xi, std::span<const int>) {
        double r2 = 0.0;
        for (double v : xi) r2 += v * v;
        return Complex(-4.0 * kPi * kPi * r2);
    });
}

// Trigonometric polynomial Σ a_m e^{2πi k_m·x/L} with its second derivative in x_j, sampled directly.
struct TrigPoly {
    GridSpec spec;
    std::vector<std::vector<int>> modes;
    std::vector<Complex> amps;

    SpatialField eval(int deriv_axis = 0) const {
        SpatialField f(spec);
        for (std::size_t m = 0; m < modes.size(); ++m) {
            Complex a = amps[m];
            if (deriv_axis > 0) {
                const double w = 2 * kPi * modes[m][std::size_t(deriv_axis - 1)] / spec.period;
                a *= -w * w;
            }
            const auto p = plane_wave(spec, modes[m], a);
            for (std::size_t i = 0; i < f.samples.size(); ++i) f.samples[i] += p.samples[i];
        }
        return f;
    }
};

TrigPoly random_poly(Gen& g, const GridSpec& spec, int count) {
    TrigPoly p{spec, {}, {}};
    const int half = spec.points_per_axis / 2 - 1;
    for (int c = 0; c < count; ++c) {
        std::vector<int> k(static_cast<std::size_t>(spec.dimension));
        bool zero = true;
        for (auto& v : k) {
            v = g.integer(-half, half);
            zero = zero && v == 0;
        }
        if (zero) k[0] = 1;
        p.modes.push_back(k);
        p.amps.emplace_back(g.uniform(-1, 1), g.uniform(-1, 1));
    }
    return p;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST(Symbols, Validation) {
    EXPECT_THROW(validate_symbol(Riesz{0}, 3), DomainError);
    EXPECT_THROW(validate_symbol(Riesz{4}, 3), DomainError);
    EXPECT_THROW(validate_symbol(TruncatedRiesz{1, 0.0}, 3), DomainError);
    EXPECT_THROW(validate_symbol(Poisson{-1.0}, 3), DomainError);
    EXPECT_THROW(validate_symbol(DirectionalHilbertTrunc{{1, 0, 0, 0}, 0.1}, 4), UnsupportedError);
    EXPECT_THROW(validate_symbol(DirectionalHilbertTrunc{{1, 1}, 0.1}, 2), DomainError);
    EXPECT_NO_THROW(validate_symbol(FactorM{0.0}, 5));
    EXPECT_NO_THROW(validate_symbol(Heat1d{2, 0.3}, 2));
}

TEST(Identities, RieszVectorIsometry) {
    Gen g(31);
    MultiplierCache cache;
    for (int i = 0; i < 12; ++i) {
        const auto spec = testing_support::small_spec(g, 1, 5);
        const auto f = random_band_limited(spec, 0.45 * spec.points_per_axis / spec.period, g.seed());
        const double nf = l2_norm(f);
        double s = 0.0;
        for (int j = 1; j <= spec.dimension; ++j) s += std::pow(l2_norm(apply_symbol(f, Riesz{j}, cache)), 2);
        EXPECT_NEAR(s, nf * nf, 1e-12 * nf * nf);
    }
}

TEST(Identities, TruncatedRieszFactorsThroughM) {
    Gen g(32);
    MultiplierCache cache;
    for (int i = 0; i < 8; ++i) {
        const auto spec = testing_support::small_spec(g, 2, 5);
        const auto f = random_band_limited(spec, 0.45 * spec.points_per_axis / spec.period, g.seed());
        const int j = g.integer(1, spec.dimension);
        const double t = g.log_uniform(0.01, 1.0);
        const auto direct = apply_symbol(f, TruncatedRiesz{j, t}, cache);
        const auto composed = apply_symbol(apply_symbol(f, Riesz{j}, cache), FactorM{t}, cache);
        EXPECT_LT(max_abs_diff(direct, composed), 1e-12 * std::max(1.0, sup_norm(f)));
    }
}

TEST(Identities, RieszSquaredLaplacianIsSecondDerivative) {
    Gen g(33);
    MultiplierCache cache;
    for (int i = 0; i < 10; ++i) {
        const auto spec = testing_support::small_spec(g, 1, 4);
        const auto p = random_poly(g, spec, 5);
        const int j = g.integer(1, spec.dimension);
        const auto lhs = apply_symbol(apply_symbol(laplacian(p.eval()), Riesz{j}, cache), Riesz{j}, cache);
        const auto d2 = p.eval(j);
        double scale = std::max(1.0, sup_norm(d2));
        for (std::size_t k = 0; k < lhs.samples.size(); ++k)
            EXPECT_NEAR(std::abs(lhs.samples[k] + d2.samples[k]), 0.0, 1e-12 * scale);
    }
}

TEST(Identities, PoissonSemigroup) {
    Gen g(34);
    MultiplierCache cache;
    const GridSpec spec{3, 8, 1.0};
    const auto f = random_band_limited(spec, 3.0, 5);
    for (int i = 0; i < 5; ++i) {
        const double s = g.uniform(0, 1), t = g.uniform(0, 1);
        const auto a = apply_symbol(apply_symbol(f, Poisson{s}, cache), Poisson{t}, cache);
        EXPECT_LT(max_abs_diff(a, apply_symbol(f, Poisson{s + t}, cache)), 1e-12);
        const auto h = apply_symbol(apply_symbol(f, Heat1d{2, s}, cache), Heat1d{2, t}, cache);
        EXPECT_LT(max_abs_diff(h, apply_symbol(f, Heat1d{2, s + t}, cache)), 1e-12);
    }
}

TEST(Identities, ProjectionsTelescope) {
    MultiplierCache cache;
    const GridSpec spec{2, 16, 1.0};
    const auto f = random_band_limited(spec, 5.0, 8);
    auto sum = apply_symbol(f, PoissonProjection{-3}, cache);
    for (int n = -2; n <= 4; ++n) {
        const auto s = apply_symbol(f, PoissonProjection{n}, cache);
        for (std::size_t i = 0; i < sum.samples.size(); ++i) sum.samples[i] += s.samples[i];
    }
    const auto expected = apply_symbol(f, Poisson{std::ldexp(1.0, -4)}, cache);
    const auto tail = apply_symbol(f, Poisson{16.0}, cache);
    SpatialField diff = expected;
    for (std::size_t i = 0; i < diff.samples.size(); ++i) diff.samples[i] -= tail.samples[i];
    EXPECT_LT(max_abs_diff(sum, diff), 1e-12);
    EXPECT_LT(max_abs_diff(sum, poisson_projection_sum(f, -3, 4)), 1e-12);
}

TEST(Operators, LinearAndTranslationInvariant) {
    Gen g(35);
    MultiplierCache cache;
    const GridSpec spec{2, 12, 1.0};
    const auto f = random_band_limited(spec, 4.0, 1);
    const auto h = random_band_limited(spec, 4.0, 2);
    const std::vector<MultiplierSymbol> symbols{Riesz{2}, TruncatedRiesz{1, 0.2}, FactorM{0.3}, ConjugatePoisson{2, 0.1},
                                                DirectionalHilbertTrunc{{0.6, 0.8}, 0.05}};
    for (const auto& s : symbols) {
        SpatialField mix = f;
        for (std::size_t i = 0; i < mix.samples.size(); ++i) mix.samples[i] = 2.0 * f.samples[i] - 0.5 * h.samples[i];
        const auto a = apply_symbol(mix, s, cache), b = apply_symbol(f, s, cache), c = apply_symbol(h, s, cache);
        for (std::size_t i = 0; i < a.samples.size(); ++i)
            EXPECT_NEAR(std::abs(a.samples[i] - (2.0 * b.samples[i] - 0.5 * c.samples[i])), 0.0, 1e-12);
        // Shift by one cell along the last axis.
        auto shift = [&](const SpatialField& x) {
            SpatialField y = x;
            const int n = spec.points_per_axis;
            for (int r = 0; r < n; ++r)
                for (int q = 0; q < n; ++q) y.samples[std::size_t(r * n + (q + 1) % n)] = x.samples[std::size_t(r * n + q)];
            return y;
        };
        EXPECT_LT(max_abs_diff(apply_symbol(shift(f), s, cache), shift(b)), 1e-12);
    }
}

TEST(Operators, SingleModeTruncatedRiesz) {
    MultiplierCache cache;
    const GridSpec spec{4, 8, 2.0};
    const std::vector<int> k{1, 2, 0, -1};
    const auto out = forward_transform(apply_symbol(plane_wave(spec, k), TruncatedRiesz{2, 0.3}, cache));
    const double rho = std::sqrt(6.0) / 2.0;
    const Complex expected = Complex(0.0, -(2.0 / 2.0) / rho) * m_eval(4, 0.3 * rho).value * std::pow(2.0, 2.0);
    EXPECT_NEAR(std::abs(out.coefficients[frequency_index(spec, k)] - expected), 0.0, 1e-10);
}

TEST(Operators, DirectionalHilbertLimit) {
    const GridSpec spec{2, 16, 1.0};
    const std::vector<int> k{3, -1};
    const double theta[2] = {0.6, 0.8};
    const auto f = plane_wave(spec, k);
    const auto out = forward_transform(directional_hilbert_trunc(f, theta, 1e-9));
    // a = θ·ξ = 1.8 - 0.8 > 0, so the symbol tends to -i.
    EXPECT_NEAR(std::abs(out.coefficients[frequency_index(spec, k)] - Complex(0.0, -1.0)), 0.0, 1e-7);
    const auto far = forward_transform(directional_hilbert_trunc(f, theta, 50.0));
    EXPECT_LT(std::abs(far.coefficients[frequency_index(spec, k)]), 0.01);
    const double bad[4] = {1, 0, 0, 0};
    EXPECT_THROW(directional_hilbert_trunc(random_band_limited({4, 4, 1.0}, 1.0, 1), bad, 0.1), UnsupportedError);
}

TEST(TruncationGridTest, Values) {
    const TruncationGrid g;
    const auto ts = g.values();
    EXPECT_EQ(ts.size(), 208u);
    EXPECT_DOUBLE_EQ(ts.front(), std::ldexp(1.0, -8));
    EXPECT_DOUBLE_EQ(ts.back(), 16.0 * (1.0 + 15.0 / 16.0));
    for (double t : ts) {
        const int n = TruncationGrid::dyadic_exponent(t);
        EXPECT_LE(std::ldexp(1.0, n), t);
        EXPECT_LT(t, std::ldexp(1.0, n + 1));
    }
    EXPECT_THROW((TruncationGrid{3, 2, 1}.values()), DomainError);
    EXPECT_THROW((TruncationGrid{0, 1, -1}.values()), DomainError);
}

TEST(Maximal, SingleModeEqualsSymbolMaximum) {
    MultiplierCache cache;
    const GridSpec spec{4, 8, 1.0};
    const std::vector<int> k{2, 1, 0, 0};
    const auto f = plane_wave(spec, k);
    const TruncationGrid grid;
    const double rho = std::sqrt(5.0);
    double expected = 0.0;
    for (double t : grid.values()) expected = std::max(expected, std::abs(m_eval(4, t * rho).value));
    const auto mx = maximal_over(f, Family{FamilyKind::FactorM, 1}, grid, cache);
    // Both sides carry the multiplier's 1e-10 quadrature tolerance.
    EXPECT_NEAR(lp_norm(spec, mx) / l2_norm(f), expected, 2e-10);
}

TEST(Maximal, MatchesBruteForce) {
    Gen g(36);
    MultiplierCache cache;
    const std::vector<FamilyKind> kinds{FamilyKind::TruncatedRiesz, FamilyKind::FactorM, FamilyKind::Poisson,
                                        FamilyKind::ConjugatePoisson};
    for (int i = 0; i < 8; ++i) {
        // Small bands use the shell path, large ones the direct path.
        const GridSpec spec = i % 2 ? GridSpec{2, 32, 1.0} : GridSpec{3, 8, 1.0};
        const double band = i < 4 ? 2.0 : 0.45 * spec.points_per_axis;
        const auto f = random_band_limited(spec, band, g.seed());
        std::vector<double> ts;
        for (int q = 0; q < 6; ++q) ts.push_back(g.log_uniform(0.01, 2.0));
        for (auto kind : kinds) {
            const Family fam{kind, 1};
            std::vector<double> brute(spec.size(), 0.0);
            for (double t : ts) {
                MultiplierSymbol s;
                switch (kind) {
                    case FamilyKind::TruncatedRiesz: s = TruncatedRiesz{1, t}; break;
                    case FamilyKind::FactorM: s = FactorM{t}; break;
                    case FamilyKind::Poisson: s = Poisson{t}; break;
                    case FamilyKind::ConjugatePoisson: s = ConjugatePoisson{1, t}; break;
                }
                const auto u = apply_symbol(f, s, cache);
                for (std::size_t x = 0; x < brute.size(); ++x) brute[x] = std::max(brute[x], std::abs(u.samples[x]));
            }
            EXPECT_LT(max_diff(maximal_over(f, fam, ts, cache), brute), 1e-10) << int(kind) << " " << i;
        }
    }
}

TEST(Maximal, VectorMatchesBruteForce) {
    Gen g(37);
    MultiplierCache cache;
    // (6, 6) at band 1.5 has two shells and six components, which takes the Gram path.
    for (const auto& [spec, band] : {std::pair{GridSpec{6, 6, 1.0}, 1.5}, std::pair{GridSpec{3, 8, 1.0}, 3.5},
                                     std::pair{GridSpec{2, 32, 1.0}, 14.0}}) {
        const auto f = random_band_limited(spec, band, g.seed());
        const std::vector<double> ts{0.05, 0.13, 0.4};
        std::vector<double> brute(spec.size(), 0.0);
        for (double t : ts) {
            std::vector<double> s(spec.size(), 0.0);
            for (int j = 1; j <= spec.dimension; ++j) {
                const auto u = apply_symbol(f, TruncatedRiesz{j, t}, cache);
                for (std::size_t x = 0; x < s.size(); ++x) s[x] += std::norm(u.samples[x]);
            }
            for (std::size_t x = 0; x < s.size(); ++x) brute[x] = std::max(brute[x], std::sqrt(s[x]));
            if (t == ts[1]) {
                std::vector<double> single(s.size());
                for (std::size_t x = 0; x < s.size(); ++x) single[x] = std::sqrt(s[x]);
                EXPECT_LT(max_diff(vector_truncated_riesz(f, t, cache), single), 1e-10);
            }
        }
        EXPECT_LT(max_diff(vector_maximal(f, ts, cache), brute), 1e-10) << spec.dimension;
    }
}

TEST(RadialFamilyPaths, ShellDirectAndGramAgree) {
    Gen g(38);
    const GridSpec spec{4, 6, 1.0};
    const auto f = random_band_limited(spec, 1.8, 3);
    std::vector<AngularFactor> comps;
    for (int j = 1; j <= 4; ++j) comps.push_back(riesz_factor(j));
    const RadialFamily shells(f, comps), direct(f, comps, 0);
    EXPECT_TRUE(shells.uses_shells());
    EXPECT_FALSE(direct.uses_shells());
    const std::size_t S = shells.radii().size();
    std::vector<std::vector<double>> w(5, std::vector<double>(S));
    for (auto& row : w)
        for (auto& v : row) v = g.uniform(-1, 1);
    const std::vector<int> group{0, 0, 1, 2, 2};
    const std::vector<double> coef{1.0, 0.5, 2.0};
    EXPECT_LT(max_diff(shells.reduce(w, group, coef), direct.reduce(w, group, coef)), 1e-11);
    EXPECT_THROW(shells.reduce(w, {0, 1, 0, 2, 2}, coef), DomainError);
}

TEST(SquareFunctions, SingleModeHalf) {
    const GridSpec spec{4, 8, 1.0};
    const std::vector<int> k{1, 0, 0, 0};
    const auto f = plane_wave(spec, k);
    const auto g = square_function(f, log_nodes(-16, 10, 16));
    EXPECT_NEAR(lp_norm(spec, g) / l2_norm(f), 0.5, 1e-2);
}

TEST(SquareFunctions, ProjectionSumBelowOne) {
    const GridSpec spec{3, 8, 1.0};
    const auto f = random_band_limited(spec, 3.0, 4);
    const double r = lp_norm(spec, projection_square_sum(f, -20, 20)) / l2_norm(f);
    EXPECT_GT(r, 0.0);
    EXPECT_LE(r, 1.0);
    EXPECT_LT(relative_l2_error(poisson_projection_sum(f, -20, 20), f), 1e-6);
}

TEST(SpatialKernel, AgreesWithSpectralOperator) {
    MultiplierCache cache;
    const GridSpec spec{2, 64, 1.0};
    const auto f = random_band_limited(spec, 3.0, 11);
    const auto spatial = truncated_riesz_spatial(f, 1, 0.1);
    const auto spectral = apply_symbol(f, TruncatedRiesz{1, 0.1}, cache);
    EXPECT_LT(relative_l2_error(spatial, spectral) * l2_norm(spectral) / l2_norm(f), 0.05);
}

TEST(SpatialKernel, ResidualShrinksWithResolution) {
    MultiplierCache cache;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        double prev = 1e9;
        for (int n : {32, 64, 128, 256}) {
            const GridSpec spec{2, n, 1.0};
            const auto f = random_band_limited(spec, 3.0, seed);
            const auto rf = apply_symbol(f, TruncatedRiesz{1, 0.15}, cache);
            double num = 0.0;
            const auto s = truncated_riesz_spatial(f, 1, 0.15);
            for (std::size_t i = 0; i < s.samples.size(); ++i) num += std::norm(s.samples[i] - rf.samples[i]);
            const double res = std::sqrt(num * spec.cell_volume()) / l2_norm(f);
            EXPECT_LT(res, prev) << n;
            prev = res;
        }
    }
}

TEST(SpatialKernel, RejectsBadParameters) {
    const auto f = random_band_limited({2, 8, 1.0}, 2.0, 1);
    EXPECT_THROW(truncated_riesz_spatial(f, 1, 0.5), DomainError);
    EXPECT_THROW(truncated_riesz_spatial(f, 3, 0.1), DomainError);
    EXPECT_THROW(truncated_riesz_spatial(f, 1, 0.1, -1), DomainError);
}

TEST(LatticeSums, EpsteinZeta) {
    EXPECT_NEAR(detail::lattice_zeta(1, 2.0), std::pow(kPi, 4) / 45.0, 1e-10);
    EXPECT_NEAR(detail::lattice_zeta(2, 1.5), 9.0336217, 1e-6);
}

TEST(Rotations, SphereRuleWeights) {
    for (int n : {16, 64, 256}) {
        double s2 = 0.0, s3 = 0.0;
        for (const auto& [th, w] : sphere_rule(2, n)) s2 += w;
        for (const auto& [th, w] : sphere_rule(3, n)) {
            s3 += w;
            EXPECT_NEAR(th[0] * th[0] + th[1] * th[1] + th[2] * th[2], 1.0, 1e-12);
        }
        EXPECT_NEAR(s2, 2 * kPi, 1e-12);
        EXPECT_NEAR(s3, 4 * kPi, 1e-12);
    }
    EXPECT_THROW(sphere_rule(4, 64), UnsupportedError);
}

TEST(Rotations, SphereMoments) {
    for (int d = 2; d <= 16; ++d) EXPECT_NEAR(sphere_moment(2.0, d), sphere_area(d) / d, 1e-10);
    EXPECT_NEAR(sphere_moment(1.0, 2), 4.0, 1e-12);
    EXPECT_NEAR(sphere_moment(1.0, 3), 2 * kPi, 1e-12);
}

TEST(Rotations, ReconstructTruncatedRiesz) {
    MultiplierCache cache;
    const GridSpec spec{2, 64, 1.0};
    const auto f = random_band_limited(spec, 3.0, 21);
    const auto ref = apply_symbol(f, TruncatedRiesz{1, 0.1}, cache);
    EXPECT_LT(relative_l2_error(rotation_reconstruct(f, 1, 0.1, 256), ref), 1e-2);
    EXPECT_THROW(rotation_reconstruct(random_band_limited({4, 4, 1.0}, 1.0, 1), 1, 0.1, 64), UnsupportedError);
}

TEST(Rotations, ConvergesInThreeDimensions) {
    MultiplierCache cache;
    const GridSpec spec{3, 16, 1.0};
    const auto f = random_band_limited(spec, 3.0, 21);
    const auto ref = apply_symbol(f, TruncatedRiesz{1, 0.1}, cache);
    double prev = 1e9;
    for (int n : {256, 1024, 4096, 16384}) {
        const double err = relative_l2_error(rotation_reconstruct(f, 1, 0.1, n), ref);
        EXPECT_LT(err, prev) << n;
        prev = err;
    }
    EXPECT_LT(prev, 2e-2);
}
