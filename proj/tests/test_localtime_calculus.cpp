#include "skewlab/localtime_calculus.hpp"
#include "skewlab/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace skewlab;

namespace {

double phi(double t, double x) { return std::exp(-x * x / (2 * t)) / std::sqrt(2 * std::numbers::pi * t); }

// Expected local time at 0 of a Brownian bridge from a to b over [0, h]:
// int_0^h phi_s(a) phi_{h-s}(b) / phi_h(b - a) ds, composite Simpson on s = h sin^2(u).
double bridge_local_time_quadrature(double a, double b, double h) {
    const int n = 20000;
    const double du = (std::numbers::pi / 2) / n;
    double acc = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double u = k * du;
        const double s = h * std::sin(u) * std::sin(u);
        const double ds = 2 * h * std::sin(u) * std::cos(u);
        double f = 0.0;
        if (s > 0.0 && s < h) f = phi(s, a) * phi(h - s, b) / phi(h, b - a) * ds;
        acc += f * ((k == 0 || k == n) ? 1 : (k % 2 ? 4 : 2));
    }
    return acc * du / 3;
}

}  // namespace

TEST(ItoSum, HandComputedValues) {
    const GridPtr g = make_grid(1.0, 3);
    const SamplePath h = make_path(g, {1.0, 2.0, -1.0, 5.0});
    const SamplePath x = make_path(g, {0.0, 1.0, 3.0, 2.0});
    EXPECT_EQ(ito_sum(h, x).values, (std::vector<double>{0.0, 1.0, 5.0, 6.0}));
    EXPECT_EQ(quadratic_covariation(x, x).values, (std::vector<double>{0.0, 1.0, 5.0, 6.0}));
    EXPECT_EQ(quadratic_covariation(h, x).values, (std::vector<double>{0.0, 1.0, -5.0, -11.0}));
}

TEST(QuadraticVariation, BrownianIsCloseToT) {
    const std::size_t N = 1 << 16;
    const SamplePath w = sample_brownian(make_grid(1.0, N), SeedSpec{1, "qv", 0});
    // [W]_1 = chi2(N) / N: sd sqrt(2 / N)
    EXPECT_NEAR(quadratic_covariation(w, w).terminal(), 1.0, 5.0 * std::sqrt(2.0 / N));
}

TEST(PathOps, Elementwise) {
    const GridPtr g = make_grid(1.0, 2);
    const SamplePath a = make_path(g, {1.0, -2.0, 0.0});
    const SamplePath b = make_path(g, {3.0, 4.0, 5.0});
    EXPECT_EQ(add_paths(a, b, 2.0).values, (std::vector<double>{7.0, 6.0, 10.0}));
    EXPECT_EQ(multiply_paths(a, b).values, (std::vector<double>{3.0, -8.0, 0.0}));
    EXPECT_EQ(sign_path(a).values, (std::vector<double>{1.0, -1.0, 0.0}));
    EXPECT_EQ(abs_path(a).values, (std::vector<double>{1.0, 2.0, 0.0}));
    EXPECT_EQ(scale_path(a, -1.0).values, (std::vector<double>{-1.0, 2.0, -0.0}));
    EXPECT_EQ(map_path(a, [](double t, double x) { return t + x; }).values, (std::vector<double>{1.0, -1.5, 1.0}));
}

TEST(LocalTime, TanakaIsExactlyZeroWithoutZeroCrossing) {
    const GridPtr g = make_grid(1.0, 4096);
    SamplePath w = sample_brownian(g, SeedSpec{2, "pos", 0});
    for (double& x : w.values) x = 10.0 + x;
    for (double v : local_time(w, LocalTimeMethod::tanaka).curve.values) ASSERT_EQ(v, 0.0);
}

TEST(LocalTime, BridgeIncrementMatchesQuadrature) {
    for (auto [a, b, h] : {std::tuple{0.3, -0.2, 0.01}, std::tuple{0.05, 0.07, 0.001}, std::tuple{-0.1, -0.3, 0.05}}) {
        const SamplePath p = make_path(make_grid(h, 1), {a, b});
        const double got = local_time(p, LocalTimeMethod::bridge).curve.terminal();
        EXPECT_NEAR(got, bridge_local_time_quadrature(a, b, h), 1e-7 + 1e-5 * got) << a << " " << b << " " << h;
    }
}

TEST(LocalTime, BridgeAsymptoticBranchMatchesLongDouble) {
    // z = (|a| + |b|) / sqrt(2 h) just above and below the switch at 25
    for (double a : {17.6, 17.7, 18.5}) {
        const SamplePath p = make_path(make_grid(1.0, 1), {a, a});
        const long double z = (2.0L * a) / std::sqrt(2.0L);
        const long double want = 0.5L * std::sqrt(2.0L * std::numbers::pi_v<long double>) * std::erfc(z);
        const double got = local_time(p, LocalTimeMethod::bridge).curve.terminal();
        EXPECT_NEAR(got / static_cast<double>(want), 1.0, 2e-3) << a;
    }
}

TEST(LocalTime, MeanMatchesExpectedAbsoluteValue) {
    // E L_1 = E |W_1| = sqrt(2 / pi) for the symmetric local time at 0
    const double want = std::sqrt(2.0 / std::numbers::pi);
    const std::size_t n_paths = 4000;
    for (auto [method, steps, bias] : {std::tuple{LocalTimeMethod::tanaka, 256u, 0.0},
                                       std::tuple{LocalTimeMethod::bridge, 256u, 0.0},
                                       std::tuple{LocalTimeMethod::occupation, 4096u, 0.03}}) {
        const GridPtr g = make_grid(1.0, steps);
        std::vector<double> l;
        for (std::size_t i = 0; i < n_paths; ++i)
            l.push_back(local_time(sample_brownian(g, SeedSpec{3, "mean", i}), method).curve.terminal());
        const double se = sample_sd(l) / std::sqrt(static_cast<double>(n_paths));
        EXPECT_NEAR(mean(l), want, 5.0 * se + bias) << to_string(method);
    }
}

TEST(LocalTime, OccupationBandwidth) {
    const GridPtr g = make_grid(1.0, 1024);
    EXPECT_DOUBLE_EQ(default_bandwidth(*g), std::pow(1.0 / 1024, 0.4));
    const SamplePath z = constant_path(g, 0.0);
    // always inside the band: (2 eps)^-1 * t
    const LocalTimeCurve c = local_time(z, LocalTimeMethod::occupation, 0.25);
    EXPECT_NEAR(c.curve.terminal(), 2.0, 1e-12);
    EXPECT_EQ(c.bandwidth, 0.25);
}

TEST(Identities, TanakaResidualVanishesForTanakaEstimator) {
    const SamplePath w = sample_brownian(make_grid(1.0, 4096), SeedSpec{4, "t", 0});
    ResidualInputs in;
    in.x = &w;
    in.method = LocalTimeMethod::tanaka;
    EXPECT_LT(identity_residual(IdentityKind::tanaka, in).sup_norm, 1e-12);
}

TEST(Identities, BalayageWithUnitKIsExact) {
    const SamplePath b = sample_brownian(make_grid(1.0, 4096), SeedSpec{5, "k", 0});
    const SamplePath y = abs_path(b);
    ResidualInputs in;
    in.y = &y;
    in.zero_reference = &b;
    in.k = [](double) { return 1.0; };
    const ResidualReport r = identity_residual(IdentityKind::balayage_predictable, in);
    EXPECT_EQ(r.sup_norm, 0.0);
    EXPECT_EQ(r.terminal, 0.0);
}

TEST(Identities, BalayageDefectIsCarriedByZeros) {
    // k(gamma_t) only changes at zeros of b, where y vanishes up to one grid step
    const SamplePath b = sample_brownian(make_grid(1.0, 1 << 14), SeedSpec{6, "k", 0});
    const SamplePath y = abs_path(b);
    ResidualInputs in;
    in.y = &y;
    in.zero_reference = &b;
    in.k = [](double t) { return std::cos(t); };
    EXPECT_LT(identity_residual(IdentityKind::balayage_predictable, in).sup_norm, 0.02);
}

TEST(Identities, TransformWithConstantFvIsExact) {
    const SamplePath m = sample_brownian(make_grid(1.0, 1024), SeedSpec{7, "c3", 0});
    const SamplePath v = constant_path(m.grid, 0.0);
    ResidualInputs in;
    in.x = &m;
    in.m = &m;
    in.v = &v;
    in.f = [](double x) { return std::exp(-x); };
    in.F = [](double x) { return 1.0 - std::exp(-x); };
    EXPECT_EQ(identity_residual(IdentityKind::transform_c3, in).sup_norm, 0.0);
}

TEST(Identities, TransformOnReflectedBrownianConverges) {
    // M = |W| = int sgn(W) dW + L, f(L) |W| - int f(L) d(int sgn dW) - F(L) -> 0
    auto sup = [](std::size_t n) {
        std::vector<double> s;
        for (std::uint64_t i = 0; i < 16; ++i) {
            const SamplePath w = coupled_brownian(256, n, SeedSpec{8, "c3", i});
            const SamplePath M = abs_path(w);
            const SamplePath m = ito_sum(sign_path(w), w);
            const SamplePath v = local_time(w, LocalTimeMethod::tanaka).curve;
            ResidualInputs in;
            in.x = &M;
            in.m = &m;
            in.v = &v;
            in.f = [](double x) { return std::exp(-x); };
            in.F = [](double x) { return 1.0 - std::exp(-x); };
            s.push_back(identity_residual(IdentityKind::transform_c3, in).sup_norm);
        }
        return median(s);
    };
    const double coarse = sup(256), fine = sup(16384);
    EXPECT_LT(fine, coarse);
    EXPECT_LT(fine, 0.05);
}

TEST(Identities, MissingInputsThrow) {
    EXPECT_THROW(identity_residual(IdentityKind::tanaka, ResidualInputs{}), std::invalid_argument);
    EXPECT_THROW(identity_residual(IdentityKind::balayage_predictable, ResidualInputs{}), std::invalid_argument);
    EXPECT_THROW(identity_residual(IdentityKind::transform_c3, ResidualInputs{}), std::invalid_argument);
}

TEST(MeshStudy, TanakaMediansDecreaseOnSmallLevels) {
    TanakaStudyOptions o;
    o.levels = {256, 1024, 4096};
    o.n_seeds = 16;
    o.reference_steps = 1 << 16;
    const MeshStudy s = tanaka_mesh_study(o);
    ASSERT_EQ(s.medians.size(), 3u);
    EXPECT_TRUE(s.strictly_decreasing()) << s.medians[0] << " " << s.medians[1] << " " << s.medians[2];
    ASSERT_EQ(s.first_seed.size(), 3u);
    EXPECT_EQ(s.first_seed[2].n_steps, 4096u);
}

TEST(MeshStudy, CoupledLevelsNest) {
    const SamplePath f = coupled_brownian(64, 1024, SeedSpec{9, "nest", 0});
    const SamplePath c = sample_brownian(make_grid(1.0, 64), SeedSpec{9, "nest", 0}.child("coarse"));
    EXPECT_EQ(restrict_path(f, 16).values, c.values);
    EXPECT_THROW(coupled_brownian(3, 64, SeedSpec{}), std::invalid_argument);
}
