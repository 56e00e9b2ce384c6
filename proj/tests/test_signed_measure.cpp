#include "skewlab/signed_measure.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace skewlab;

namespace {

GridPtr grid_n(std::size_t n) { return make_grid(1.0, n); }

double max_abs_diff(const SamplePath& a, const SamplePath& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::fabs(a.values[i] - b.values[i]));
    return d;
}

}  // namespace

TEST(Model, TrivialHasNoZeros) {
    const SignedMeasureModel m = build_model(ModelFamily::trivial, grid_n(64), SeedSpec{});
    for (double d : m.d_path.values) EXPECT_EQ(d, 1.0);
    for (auto h : m.h_set) EXPECT_EQ(h, 0);
    EXPECT_EQ(m.gbar, 0u);
    EXPECT_EQ(m.d_infinity, 1.0);
}

TEST(Model, ShiftedBrownianStartsAtOneAndTracksLastZero) {
    for (std::uint64_t i = 0; i < 20; ++i) {
        const SignedMeasureModel m = build_model(ModelFamily::shifted_brownian, grid_n(1024), SeedSpec{1, "m", i});
        EXPECT_EQ(m.d_path.values[0], 1.0);
        EXPECT_EQ(m.d_infinity, m.d_path.terminal());
        for (std::size_t t = 0; t < m.h_set.size(); ++t)
            if (m.h_set[t]) { EXPECT_EQ(m.gamma.gamma[t], t); }
        EXPECT_EQ(m.gbar, m.gamma.gamma.back());
    }
}

TEST(Model, ParseFamily) {
    EXPECT_EQ(parse_model_family("trivial"), ModelFamily::trivial);
    EXPECT_EQ(parse_model_family("shifted_brownian"), ModelFamily::shifted_brownian);
    EXPECT_THROW(parse_model_family("other"), std::invalid_argument);
}

TEST(Decompositions, PartsAddUp) {
    const GridPtr g = grid_n(2048);
    for (const auto& name : instance_names()) {
        const SeedSpec s{2, "parts", 0};
        const SignedMeasureModel m = build_model(ModelFamily::shifted_brownian, g, s);
        const Decomposition d = make_instance(name, m, s);
        EXPECT_LT(max_abs_diff(d.total, add_paths(d.martingale_part, d.fv_part)), 1e-9) << name;
        const Decomposition a = abs_decomposition(d);
        EXPECT_LT(max_abs_diff(a.total, add_paths(a.martingale_part, a.fv_part)), 1e-9) << name;
        const Decomposition z = zalpha_decomposition(d, 0.3, s);
        EXPECT_LT(max_abs_diff(z.total, add_paths(z.martingale_part, z.fv_part)), 1e-9) << name;
        const Decomposition x = ito_xdx_decomposition(d);
        EXPECT_LT(max_abs_diff(x.total, add_paths(x.martingale_part, x.fv_part)), 1e-9) << name;
    }
    EXPECT_THROW(make_instance("nope", build_model(ModelFamily::trivial, g, SeedSpec{}), SeedSpec{}),
                 std::invalid_argument);
}

TEST(Decompositions, ZalphaWithAlphaOneIsAbsoluteValueOfReflected) {
    const GridPtr g = grid_n(1024);
    const SeedSpec s{3, "z1", 0};
    const SignedMeasureModel m = build_model(ModelFamily::trivial, g, s);
    const Decomposition d = make_instance("abs_brownian", m, s);
    const Decomposition z = zalpha_decomposition(d, 1.0, s);
    EXPECT_EQ(z.total.values, d.total.values);
}

TEST(QpResidual, OrthogonalMartingaleIsSmallAndDriftIsOne) {
    const GridPtr g = grid_n(4096);
    std::vector<double> w, drift;
    for (std::uint64_t i = 0; i < 400; ++i) {
        const SeedSpec s{4, "qp", i};
        const SignedMeasureModel m = build_model(ModelFamily::shifted_brownian, g, s);
        w.push_back(qp_residual(make_instance("brownian", m, s), m).terminal);
        drift.push_back(qp_residual(make_instance("drifted", m, s), m).terminal);
    }
    // [W, D]_1 has sd 1/sqrt(N); int D dt has mean 1 and sd about 0.58
    EXPECT_LT(median(w), 5.0 / std::sqrt(4096.0));
    EXPECT_NEAR(mean(drift), 1.0, 5.0 * sample_sd(drift) / std::sqrt(400.0));
}

TEST(CarriedBy, StatisticDefinition) {
    const GridPtr g = grid_n(10);
    ZeroMask mask(11, 0);
    mask[5] = 1;
    // one unit increment on step 4 -> 5 (touches the mask), one on step 8 -> 9 (does not)
    const SamplePath fv = make_path(g, {0, 0, 0, 0, 0, 1, 1, 1, 1, 2, 2});
    const TestReport r = carried_by_check(fv, mask, 0.05, 0);
    EXPECT_DOUBLE_EQ(r.statistic, 0.5);
    EXPECT_FALSE(r.pass);
    EXPECT_DOUBLE_EQ(carried_by_check(fv, mask, 0.05, 4).statistic, 1.0);
    EXPECT_TRUE(carried_by_check(constant_path(g, 3.0), mask, 0.05).pass);
    EXPECT_THROW(carried_by_check(fv, ZeroMask(3, 0), 0.05), std::invalid_argument);
}

TEST(DriftTest, BrownianPassesDriftedFails) {
    const GridPtr g = grid_n(256);
    auto gen = [&](const std::string& name) {
        return [&, name](std::size_t i) {
            const SeedSpec s{5, "drift/" + name, i};
            const SignedMeasureModel m = build_model(ModelFamily::shifted_brownian, g, s);
            return multiply_paths(m.d_path, make_instance(name, m, s).total);
        };
    };
    EXPECT_TRUE(martingale_drift_test(gen("brownian"), 4000).pass);
    const TestReport bad = martingale_drift_test(gen("drifted"), 4000);
    EXPECT_FALSE(bad.pass);
    EXPECT_GT(bad.statistic, 5.0);
    EXPECT_THROW(martingale_drift_test(gen("brownian"), 999), InsufficientSamples);
}

TEST(DriftTest, ConstantPathsGiveZeroStatistic) {
    const GridPtr g = grid_n(16);
    const TestReport r = martingale_drift_test([&](std::size_t) { return constant_path(g, 2.0); }, 1000);
    EXPECT_EQ(r.statistic, 0.0);
    EXPECT_TRUE(r.pass);
}

TEST(SigmaH, ExamplesFromTheModelZoo) {
    const GridPtr g = grid_n(8192);
    for (std::uint64_t i = 0; i < 8; ++i) {
        const SeedSpec s{6, "sigma", i};
        const SignedMeasureModel m = build_model(ModelFamily::shifted_brownian, g, s);
        EXPECT_TRUE(sigma_h_check(make_instance("abs_brownian", m, s), m).pass);
        EXPECT_TRUE(sigma_h_check(make_instance("brownian_plus_local_time", m, s), m).pass);
        EXPECT_FALSE(sigma_h_check(make_instance("drifted", m, s), m).pass);
    }
}

TEST(Equivalence, HypothesisViolationIsReportedNotFailed) {
    // W vanishes off the (empty) zero set of the trivial density
    EquivalenceOptions o;
    o.n_paths = 1000;
    o.n_steps = 128;
    const EquivalenceResult r = equivalence_suite("abs_mart", ModelFamily::trivial, "brownian", SeedSpec{7, "e", 0}, o);
    EXPECT_EQ(r.summary.status, ReportStatus::hypothesis_not_met);
    EXPECT_EQ(r.left.status, ReportStatus::hypothesis_not_met);
    EXPECT_FALSE(r.summary.pass);
    o.enforce_hypotheses = false;
    const EquivalenceResult u = equivalence_suite("abs_mart", ModelFamily::trivial, "brownian", SeedSpec{7, "e", 0}, o);
    EXPECT_NE(u.summary.status, ReportStatus::hypothesis_not_met);
    // unenforced, W passes and |W| fails: the theorem's hypothesis is what makes them agree
    EXPECT_TRUE(u.left.pass);
    EXPECT_FALSE(u.right.pass);
}

TEST(Equivalence, PositiveAndNegativeInstancesAgree) {
    EquivalenceOptions o;
    o.n_paths = 2000;
    o.n_steps = 256;
    const auto pos = equivalence_suite("zalpha_mart", ModelFamily::shifted_brownian, "exp_martingale",
                                       SeedSpec{8, "e", 0}, o);
    EXPECT_TRUE(pos.left.pass);
    EXPECT_TRUE(pos.right.pass);
    EXPECT_TRUE(pos.summary.pass);
    const auto neg = equivalence_suite("abs_sigma", ModelFamily::shifted_brownian, "drifted", SeedSpec{8, "e", 1}, o);
    EXPECT_FALSE(neg.left.pass);
    EXPECT_FALSE(neg.right.pass);
    EXPECT_TRUE(neg.summary.pass);
    EXPECT_THROW(equivalence_suite("nope", ModelFamily::trivial, "brownian", SeedSpec{}, o), std::invalid_argument);
}

TEST(Representation, TrivialModelReducesToMartingaleProperty) {
    const auto gen = representation_generator(ModelFamily::trivial, "brownian", grid_n(128), SeedSpec{9, "r", 0});
    StoppingRule half;
    half.time = 0.5;
    const TestReport r = optional_representation_check(gen, half, default_events(), 4000);
    EXPECT_TRUE(r.pass) << r.detail;
    StoppingRule hit;
    hit.kind = StoppingRule::Kind::first_hitting;
    hit.level = 0.5;
    EXPECT_TRUE(optional_representation_check(gen, hit, default_events(), 4000).pass);
}

TEST(Representation, DriftedControlIsRejected) {
    const auto gen = representation_generator(ModelFamily::trivial, "drifted", grid_n(128), SeedSpec{9, "r", 1});
    StoppingRule half;
    half.time = 0.5;
    EXPECT_FALSE(optional_representation_check(gen, half, default_events(), 4000).pass);
}

TEST(Representation, Preconditions) {
    const auto gen = representation_generator(ModelFamily::trivial, "brownian", grid_n(16), SeedSpec{});
    EXPECT_THROW(optional_representation_check(gen, StoppingRule{}, {}, 4000), std::invalid_argument);
    EXPECT_THROW(optional_representation_check(gen, StoppingRule{}, default_events(), 10), InsufficientSamples);
}
