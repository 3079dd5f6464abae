#include <gtest/gtest.h>

#include <cmath>

#include "survopt/cost_model.hpp"

using namespace survopt;

TEST(DiscreteCostDistribution, ValidatesInputs) {
    EXPECT_THROW(DiscreteCostDistribution({}, {}), InvalidInput);
    EXPECT_THROW(DiscreteCostDistribution({1.0, 2.0}, {1.0}), InvalidInput);
    EXPECT_THROW(DiscreteCostDistribution({2.0, 1.0}, {0.5, 0.5}), NonMonotoneInput);
    EXPECT_THROW(DiscreteCostDistribution({1.0, 1.0}, {0.5, 0.5}), NonMonotoneInput);
    EXPECT_THROW(DiscreteCostDistribution({-1.0, 2.0}, {0.5, 0.5}), InvalidInput);
    EXPECT_THROW(DiscreteCostDistribution({1.0, 2.0}, {0.5, 0.6}), InvalidInput);
    EXPECT_THROW(DiscreteCostDistribution({1.0, 2.0}, {1.0, 0.0}), InvalidInput);
    EXPECT_NO_THROW(DiscreteCostDistribution({0.0, 2.0}, {0.5, 0.5}));
}

TEST(DiscreteCostDistribution, Moments) {
    DiscreteCostDistribution F({1.0, 4.0}, {0.5, 0.5});
    EXPECT_DOUBLE_EQ(F.mean_cost(), 2.5);
    EXPECT_DOUBLE_EQ(F.mean_sqrt_cost(), 1.5);
    EXPECT_DOUBLE_EQ(F.cdf_at_index(0), 0.5);
    EXPECT_DOUBLE_EQ(F.cdf_at_index(1), 1.0);
}

TEST(VirtualCosts, IntroExample) {
    // {0,4,8} with masses {1/2,1/4,1/4} virtualizes to {0,12,20}
    DiscreteCostDistribution F({0.0, 4.0, 8.0}, {0.5, 0.25, 0.25});
    auto v = virtual_costs_discrete(F);
    ASSERT_EQ(v.virtual_costs.size(), 3u);
    EXPECT_NEAR(v.virtual_costs[0], 0.0, 1e-12);
    EXPECT_NEAR(v.virtual_costs[1], 12.0, 1e-12);
    EXPECT_NEAR(v.virtual_costs[2], 20.0, 1e-12);
}

TEST(VirtualCosts, FirstTypeKeepsItsCost) {
    DiscreteCostDistribution F({3.0, 5.0}, {0.6, 0.4});
    auto v = virtual_costs_discrete(F);
    EXPECT_DOUBLE_EQ(v.virtual_costs[0], 3.0);
}

TEST(VirtualCosts, NonRegularThrows) {
    DiscreteCostDistribution F({1.0, 100.0, 101.0}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
    EXPECT_THROW(virtual_costs_discrete(F), NonRegular);
    EXPECT_FALSE(check_regular(F));
    EXPECT_TRUE(check_regular(DiscreteCostDistribution({1.0, 2.0}, {0.5, 0.5})));
}

TEST(VirtualCosts, ContinuousUniform) {
    // uniform: F(c)/f(c) = c, so phi(c) = 2c
    auto F = ContinuousCostDistribution::uniform();
    for (double c : {0.1, 0.5, 1.0}) EXPECT_NEAR(virtual_cost_continuous(F, c), 2.0 * c, 1e-12);
    EXPECT_TRUE(check_regular(F));
    EXPECT_THROW(virtual_cost_continuous(F, 0.0), OutOfSupport);
    EXPECT_THROW(virtual_cost_continuous(F, 1.5), OutOfSupport);
}

TEST(VirtualCosts, ContinuousPower) {
    // power p: F/f = c/(p+1), phi = c (p+2)/(p+1)
    auto F = ContinuousCostDistribution::power(2.0);
    EXPECT_NEAR(virtual_cost_continuous(F, 0.5), 0.5 * 4.0 / 3.0, 1e-12);
    EXPECT_TRUE(check_regular(F));
    EXPECT_THROW(ContinuousCostDistribution::power(-1.0), InvalidInput);
}

TEST(Discretize, UniformTenCells) {
    auto F = ContinuousCostDistribution::uniform();
    auto D = discretize(F, 0.1);
    ASSERT_EQ(D.size(), 10u);
    for (std::size_t t = 0; t < 10; ++t) {
        EXPECT_NEAR(D.costs[t], 0.1 * static_cast<double>(t + 1), 1e-12);
        EXPECT_NEAR(D.pmf[t], 0.1, 1e-12);
    }
}

TEST(Discretize, RejectsNonIntegralGrid) {
    auto F = ContinuousCostDistribution::uniform();
    EXPECT_THROW(discretize(F, 0.3), BadGrid);
    EXPECT_THROW(discretize(F, 0.0), BadGrid);
    EXPECT_THROW(discretize(F, 1.5), BadGrid);
}

TEST(Discretize, MassSumsToOneAndMeanConverges) {
    auto F = ContinuousCostDistribution::power(1.5);
    for (double eps : {0.1, 0.02, 0.01}) {
        auto D = discretize(F, eps);
        double total = 0.0;
        for (double m : D.pmf) total += m;
        EXPECT_NEAR(total, 1.0, 1e-12);
        // grid uses right endpoints so the mean overshoots by at most eps
        EXPECT_GE(D.mean_cost(), F.mean_cost());
        EXPECT_LE(D.mean_cost(), F.mean_cost() + eps);
    }
}
