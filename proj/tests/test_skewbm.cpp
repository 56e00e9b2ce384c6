#include "skewlab/skewbm.hpp"
#include "skewlab/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace skewlab;

namespace {

double simpson_cdf(double alpha, double t, double y) {
    // integral of the density from -10 sqrt(t) to y, split at 0
    auto integrate = [&](double a, double b) {
        const int n = 20000;
        const double h = (b - a) / n;
        double acc = 0.0;
        for (int k = 0; k <= n; ++k) {
            double x = a + k * h;
            if (k == n && b == 0.0) x = -1e-300;
            if (k == 0 && a == 0.0) x = 1e-300;
            acc += skew_transition_density(alpha, t, x) * ((k == 0 || k == n) ? 1 : (k % 2 ? 4 : 2));
        }
        return acc * h / 3;
    };
    const double lo = -10.0 * std::sqrt(t);
    if (y <= 0.0) return integrate(lo, y);
    return integrate(lo, 0.0) + integrate(0.0, y);
}

SkewBuildSpec spec_for(SamplePath base, AlphaSchedule s, SignMode v, SignRule r, double x0 = 0.0) {
    SkewBuildSpec spec;
    spec.base.total = std::move(base);
    spec.schedule = std::move(s);
    spec.variant = v;
    spec.rule = r;
    spec.x0 = x0;
    return spec;
}

}  // namespace

TEST(SkewLaw, CdfMatchesIntegratedDensity) {
    for (double alpha : {0.0, 0.3, 0.5, 0.9})
        for (double t : {0.5, 1.0})
            for (double y : {-1.2, -0.1, 0.0, 0.4, 2.0})
                EXPECT_NEAR(skew_cdf(alpha, t, y), simpson_cdf(alpha, t, y), 1e-9) << alpha << " " << t << " " << y;
    EXPECT_DOUBLE_EQ(skew_cdf(0.3, 1.0, 0.0), 0.7);
    EXPECT_DOUBLE_EQ(skew_cdf(0.5, 2.0, 0.7), standard_normal_cdf(0.7 / std::sqrt(2.0)));
    EXPECT_THROW(skew_transition_density(0.5, 0.0, 1.0), std::invalid_argument);
}

TEST(Walk, LatticeAndParity) {
    for (std::size_t n : {7u, 8u}) {
        const SamplePath w = harrison_shepp_walk(0.3, n, SeedSpec{1, "walk", n});
        const double rn = std::sqrt(static_cast<double>(n));
        for (std::size_t k = 0; k <= n; ++k) {
            const double s = w.values[k] * rn;
            EXPECT_NEAR(s, std::round(s), 1e-9);
            EXPECT_EQ(static_cast<long long>(std::llround(s)) % 2 == 0, k % 2 == 0);
        }
        const LawSample ls = walk_terminal_sample(0.3, n, 50, SeedSpec{1, "walk", 0});
        for (double x : ls.values) {
            const double k = (x - ls.lattice_offset) / ls.lattice_spacing;
            EXPECT_NEAR(k, std::round(k), 1e-9);
        }
    }
}

TEST(Walk, AlphaOneNeverGoesNegative) {
    for (std::uint64_t i = 0; i < 20; ++i)
        for (double v : harrison_shepp_walk(1.0, 500, SeedSpec{2, "up", i}).values) ASSERT_GE(v, 0.0);
}

TEST(Construction, TerminalShortcutMatchesFullBuild) {
    struct Case {
        AlphaSchedule schedule;
        SignMode variant;
        SignRule rule;
        double x0;
    };
    const std::vector<Case> cases{
        {AlphaSchedule::constant(0.3), SignMode::absolute, SignRule::split, 0.0},
        {AlphaSchedule::constant(0.3), SignMode::signed_product, SignRule::split, 0.0},
        {AlphaSchedule::piecewise_constant({0.0, 0.5}, {0.2, 0.9}), SignMode::absolute, SignRule::split, 0.0},
        {AlphaSchedule::piecewise_constant({0.0, 0.5}, {0.2, 0.9}), SignMode::absolute, SignRule::hold_from_start, 0.0},
        {AlphaSchedule::constant(0.6), SignMode::absolute, SignRule::split, -0.3},
        {AlphaSchedule::constant(0.6), SignMode::signed_product, SignRule::split, 0.3},
    };
    for (std::size_t c = 0; c < cases.size(); ++c) {
        SkewSampleConfig cfg;
        cfg.schedules = {cases[c].schedule};
        cfg.variant = cases[c].variant;
        cfg.rule = cases[c].rule;
        cfg.x0 = cases[c].x0;
        cfg.n_paths = 40;
        cfg.n_steps = 512;
        cfg.seed = SeedSpec{3, "short", 0};
        const LawSample got = skew_terminal_samples(cfg)[0];
        for (std::size_t i = 0; i < cfg.n_paths; ++i) {
            const SeedSpec si = cfg.seed.with_index(i);
            const SamplePath base = sample_brownian(make_grid(1.0, cfg.n_steps), si.child("base"), cfg.x0);
            const SkewBuildSpec spec = spec_for(base, cfg.schedules[0], cfg.variant, cfg.rule, cfg.x0);
            ASSERT_EQ(got.values[i], build_skew(spec, si.child("skew0")).terminal()) << "case " << c << " path " << i;
        }
    }
}

TEST(Construction, StartsAtX0AndKeepsItsSign) {
    const SamplePath base = sample_brownian(make_grid(1.0, 256), SeedSpec{4, "x0", 0}, -0.5);
    const SamplePath x = build_skew(spec_for(base, AlphaSchedule::constant(1.0), SignMode::absolute, SignRule::split, -0.5),
                                    SeedSpec{4, "x0", 1});
    EXPECT_EQ(x.values[0], -0.5);
    EXPECT_THROW(build_skew(spec_for(base, AlphaSchedule::constant(0.5), SignMode::absolute, SignRule::split, 0.0),
                            SeedSpec{}),
                 std::invalid_argument);
}

TEST(Construction, SignedVariantIsSymmetric) {
    // sign flips of a Brownian path leave its law unchanged
    SkewSampleConfig cfg;
    cfg.schedules = {AlphaSchedule::constant(0.7)};
    cfg.variant = SignMode::signed_product;
    cfg.n_paths = 20000;
    cfg.n_steps = 256;
    cfg.seed = SeedSpec{5, "signed", 0};
    const double p = fraction_positive(skew_terminal_samples(cfg)[0].values);
    EXPECT_NEAR(p, 0.5, 5.0 * std::sqrt(0.25 / 20000));
}

TEST(Construction, AbsoluteVariantPositiveFraction) {
    SkewSampleConfig cfg;
    cfg.schedules = {AlphaSchedule::constant(0.25), AlphaSchedule::constant(0.8)};
    cfg.n_paths = 20000;
    cfg.n_steps = 256;
    cfg.seed = SeedSpec{6, "abs", 0};
    const auto s = skew_terminal_samples(cfg);
    EXPECT_NEAR(fraction_positive(s[0].values), 0.25, 5.0 * std::sqrt(0.25 * 0.75 / 20000));
    EXPECT_NEAR(fraction_positive(s[1].values), 0.8, 5.0 * std::sqrt(0.8 * 0.2 / 20000));
    // shared bases: |X| agrees across schedules
    for (std::size_t i = 0; i < 100; ++i) ASSERT_EQ(std::fabs(s[0].values[i]), std::fabs(s[1].values[i]));
}

TEST(SdeResidual, AlphaOneIsTanakaIdentity) {
    const SamplePath base = sample_brownian(make_grid(1.0, 4096), SeedSpec{7, "one", 0});
    const SkewBuildSpec spec = spec_for(base, AlphaSchedule::constant(1.0), SignMode::absolute, SignRule::split);
    const SkewConstruction c = build_skew_construction(spec, SeedSpec{7, "one", 1});
    const ResidualReport r = sde_residual(c.x, spec.base, c.sign, spec.schedule, spec.variant);
    EXPECT_LT(r.sup_norm, 1e-10);
}

TEST(SdeResidual, DriverHasUnitQuadraticVariation) {
    const SamplePath base = sample_brownian(make_grid(1.0, 1 << 14), SeedSpec{8, "qv", 0});
    const SkewBuildSpec spec = spec_for(base, AlphaSchedule::constant(0.3), SignMode::absolute, SignRule::split);
    const SkewConstruction c = build_skew_construction(spec, SeedSpec{8, "qv", 1});
    const ResidualReport r = sde_residual(c.x, spec.base, c.sign, spec.schedule, spec.variant);
    double qv = -1.0;
    for (const auto& [k, v] : r.extras)
        if (k == "qv_terminal") qv = v;
    EXPECT_NEAR(qv, 1.0, 5.0 * std::sqrt(2.0 / (1 << 14)));
}

TEST(SdeResidual, MeshStudyMediansShrink) {
    SdeStudyOptions o;
    o.levels = {1024, 4096, 16384};
    o.n_seeds = 16;
    const MeshStudy s = sde_mesh_study(o);
    ASSERT_EQ(s.medians.size(), 3u);
    EXPECT_LT(s.medians[2], s.medians[0]);
}

TEST(Hypotheses, ShiftedModelRejectsPlainBrownianBase) {
    const GridPtr g = make_grid(1.0, 1024);
    const SignedMeasureModel m = build_model(ModelFamily::shifted_brownian, g, SeedSpec{9, "h", 0});
    SkewBuildSpec spec = spec_for(make_instance("brownian", m, SeedSpec{9, "h", 0}).total, AlphaSchedule::constant(0.5),
                                  SignMode::absolute, SignRule::split);
    spec.model = &m;
    if (m.gbar > 0) { EXPECT_THROW(build_skew(spec, SeedSpec{}), HypothesisNotMet); }
    spec.enforce_hypotheses = false;
    EXPECT_NO_THROW(build_skew(spec, SeedSpec{}));
}

TEST(LawTest, InsufficientSamplesAndVerdicts) {
    LawSample small;
    small.values.assign(10, 0.0);
    EXPECT_THROW(law_test(small, standard_normal_cdf, LawTestOptions{}), InsufficientSamples);

    SkewSampleConfig cfg;
    cfg.schedules = {AlphaSchedule::constant(0.5)};
    cfg.n_paths = 5000;
    cfg.n_steps = 256;
    cfg.seed = SeedSpec{10, "law", 0};
    const LawSample s = skew_terminal_samples(cfg)[0];
    LawTestOptions o;
    o.sign_reference = 0.5;
    o.sign_tolerance = 0.03;
    EXPECT_TRUE(law_test(s, [](double y) { return skew_cdf(0.5, 1.0, y); }, o).pass);
    EXPECT_FALSE(law_test(s, [](double y) { return skew_cdf(0.9, 1.0, y); }, o).pass);
}
