#include <gtest/gtest.h>

#include <cmath>

#include "survopt/game.hpp"
#include "survopt/mechanism.hpp"
#include "survopt/regression.hpp"
#include "survopt/simulate.hpp"

using namespace survopt;

namespace {

const DiscreteCostDistribution kIntroTrue({0.0, 4.0, 8.0}, {0.5, 0.25, 0.25});

Menu intro_menu() { return design_mechanism(kIntroTrue, 7.0).menu; }

}  // namespace

TEST(CounterRng, DeterministicAcrossInstances) {
    CounterRng a(42, 3), b(42, 3), c(42, 4);
    bool differed = false;
    for (int i = 0; i < 100; ++i) {
        const std::uint64_t va = a.next_u64();
        EXPECT_EQ(va, b.next_u64());
        if (va != c.next_u64()) differed = true;
    }
    EXPECT_TRUE(differed);
}

TEST(CounterRng, UniformsInRangeNormalsCentered) {
    CounterRng rng(7, 0);
    double sum = 0.0, nsum = 0.0;
    const int k = 20000;
    for (int i = 0; i < k; ++i) {
        const double u = rng.next_double();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
        sum += u;
        nsum += rng.next_normal();
    }
    EXPECT_NEAR(sum / k, 0.5, 0.02);
    EXPECT_NEAR(nsum / k, 0.0, 0.03);
}

TEST(HtEstimate, ManualSamples) {
    SurveySample s;
    s.agents.resize(4);
    const double data[4] = {0.0, 1.0, 1.0, 0.0};
    for (int i = 0; i < 4; ++i) {
        s.agents[i].selected = true;
        s.agents[i].alloc = 1.0;
        s.agents[i].data = {data[i]};
    }
    EXPECT_DOUBLE_EQ(ht_estimate(s), 0.5);

    SurveySample empty;
    empty.agents.resize(3);
    EXPECT_DOUBLE_EQ(ht_estimate(empty), 0.0);

    SurveySample one;
    one.agents.resize(2);
    one.agents[0].selected = true;
    one.agents[0].alloc = 0.5;
    one.agents[0].data = {1.0};
    EXPECT_DOUBLE_EQ(ht_estimate(one), 1.0);
}

TEST(HtEstimateMulti, ScalarCoordinateMatches) {
    CounterRng rng(9, 0);
    auto model = DataModel::moment_binary({0.0, 1.0, 1.0}, 1);
    auto sample = run_survey(model, kIntroTrue, intro_menu(), 500, rng);
    auto multi = ht_estimate_multi(sample, 1);
    EXPECT_DOUBLE_EQ(multi[0], ht_estimate(sample));
}

TEST(WlsEstimate, NoiselessRecoversTheta) {
    // hand-built sample: y = 2 x1 - x2 exactly
    SurveySample s;
    const double xs[4][2] = {{1, 0}, {0, 1}, {1, 1}, {2, -1}};
    s.agents.resize(4);
    for (int i = 0; i < 4; ++i) {
        s.agents[i].selected = true;
        s.agents[i].alloc = 0.5;
        const double y = 2.0 * xs[i][0] - xs[i][1];
        s.agents[i].data = {xs[i][0], xs[i][1], y};
    }
    auto theta = wls_estimate(s, 2);
    EXPECT_NEAR(theta[0], 2.0, 1e-12);
    EXPECT_NEAR(theta[1], -1.0, 1e-12);
}

TEST(WlsEstimate, SingularGramThrows) {
    SurveySample s;
    s.agents.resize(2);
    for (int i = 0; i < 2; ++i) {
        s.agents[i].selected = true;
        s.agents[i].alloc = 1.0;
        s.agents[i].data = {1.0, 1.0, 3.0};  // collinear features
    }
    EXPECT_THROW(wls_estimate(s, 2), SingularGram);
}

TEST(MonteCarlo, DegenerateDataHasZeroVariance) {
    // q = 0 everywhere: every moment is 0, so estimates vary only through
    // selection of zero values
    SimulationConfig cfg;
    cfg.n = 200;
    cfg.reps = 30;
    cfg.seed = 5;
    auto model = DataModel::moment_binary({0.0, 0.0, 0.0}, 1);
    auto report = monte_carlo(model, kIntroTrue, intro_menu(), cfg, 0.0);
    EXPECT_DOUBLE_EQ(report.empirical_variance_scaled, 0.0);
    EXPECT_DOUBLE_EQ(report.mean_estimate[0], 0.0);
}

TEST(MonteCarlo, UnbiasedAndVarianceNearPrediction) {
    auto m = design_mechanism(kIntroTrue, 7.0);
    const std::vector<double> q{0.0, 1.0, 1.0};  // equilibrium adversary
    double theta = 0.0;
    for (std::size_t t = 0; t < 3; ++t) theta += kIntroTrue.pmf[t] * q[t];

    SimulationConfig cfg;
    cfg.n = 2000;
    cfg.reps = 400;
    cfg.seed = 12345;
    auto report = monte_carlo(DataModel::moment_binary(q, 1), kIntroTrue, m.menu, cfg,
                              m.design.value);
    const double se = std::sqrt(m.design.value / (double(cfg.n) * double(cfg.reps)));
    EXPECT_NEAR(report.mean_estimate[0], theta, 5.0 * se);
    EXPECT_NEAR(report.empirical_variance_scaled, 0.3125, 0.1 * 0.3125);
    EXPECT_NEAR(report.mean_spend_per_agent, 7.0, 0.2);
}

TEST(MonteCarlo, RepeatedRunsBitIdentical) {
    SimulationConfig cfg;
    cfg.n = 300;
    cfg.reps = 25;
    cfg.seed = 99;
    auto model = DataModel::moment_binary({0.0, 1.0, 1.0}, 1);
    auto menu = intro_menu();
    auto r1 = monte_carlo(model, kIntroTrue, menu, cfg, 0.3125);
    auto r2 = monte_carlo(model, kIntroTrue, menu, cfg, 0.3125);
    ASSERT_EQ(r1.rows.size(), r2.rows.size());
    for (std::size_t i = 0; i < r1.rows.size(); ++i) {
        EXPECT_EQ(r1.rows[i].estimate[0], r2.rows[i].estimate[0]);
        EXPECT_EQ(r1.rows[i].spend_per_agent, r2.rows[i].spend_per_agent);
    }
}

TEST(MonteCarlo, MultiDimVarianceScales) {
    auto m = design_mechanism(kIntroTrue, 7.0);
    SimulationConfig cfg;
    cfg.n = 1000;
    cfg.reps = 400;
    cfg.seed = 31;
    auto report = monte_carlo(DataModel::moment_binary({0.0, 1.0, 1.0}, 3), kIntroTrue,
                              m.menu, cfg, 3.0 * m.design.value);
    EXPECT_NEAR(report.empirical_variance_scaled, 3.0 * 0.3125, 0.12 * 3.0 * 0.3125);
}

TEST(MonteCarlo, RegressionRecoversTheta) {
    DiscreteCostDistribution F({1.0, 4.0}, {0.5, 0.5});
    RegressionInstance inst;
    inst.costs_dist = F;
    inst.noise_lo = -1.0;
    inst.noise_hi = 2.0;
    inst.budget_per_agent = 1.0;
    auto d = design_regression(inst);
    auto P = payments_discrete(d.rule, F.costs);
    auto menu = build_menu(d.rule, P);

    auto model = DataModel::regression({1.0}, inst.noise_lo, inst.noise_hi,
                                       d.adversary.induced_q());
    SimulationConfig cfg;
    cfg.n = 2000;
    cfg.reps = 200;
    cfg.seed = 77;
    auto report = monte_carlo(model, F, menu, cfg, d.objective);
    EXPECT_NEAR(report.mean_estimate[0], 1.0, 0.02);
}

TEST(DataModel, Validation) {
    auto short_q = DataModel::moment_binary({0.5}, 1);
    EXPECT_THROW(short_q.validate(kIntroTrue), DimensionMismatch);
    auto bad_q = DataModel::moment_binary({0.5, 1.5, 0.5}, 1);
    EXPECT_THROW(bad_q.validate(kIntroTrue), InvalidInput);
    // regression noise must be mean-zero under q
    auto biased =
        DataModel::regression({1.0}, -1.0, 2.0, {1.0, 1.0, 1.0});
    EXPECT_THROW(biased.validate(kIntroTrue), InvalidInput);
}

TEST(SimulationConfig, Validation) {
    SimulationConfig cfg;
    cfg.n = 0;
    cfg.reps = 1;
    EXPECT_THROW(cfg.validate(), InvalidInput);
}
