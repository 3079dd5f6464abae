#pragma once

// Deterministic random-instance generators shared by the unit and acceptance
// tests.

#include <algorithm>
#include <random>
#include <vector>

#include "survopt/cost_model.hpp"
#include "survopt/types.hpp"

namespace testutil {

/// Random regular discrete cost prior with 2..max_types support points.
inline survopt::DiscreteCostDistribution random_regular(std::mt19937_64& gen, int max_types,
                                                        bool allow_zero_first = false) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (;;) {
        const int n = 2 + static_cast<int>(u(gen) * static_cast<double>(max_types - 1));
        std::vector<double> costs, pmf;
        double cur = (allow_zero_first && u(gen) < 0.3) ? 0.0 : 0.05 + 2.0 * u(gen);
        for (int t = 0; t < n; ++t) {
            costs.push_back(cur);
            cur += 0.2 + 2.0 * u(gen);
        }
        double total = 0.0;
        for (int t = 0; t < n; ++t) {
            pmf.push_back(0.2 + u(gen));
            total += pmf.back();
        }
        for (double& p : pmf) p /= total;
        survopt::DiscreteCostDistribution F(std::move(costs), std::move(pmf));
        if (survopt::check_regular(F)) return F;
    }
}

/// Random monotone non-increasing allocation with entries in (0, 1].
inline survopt::AllocationRule random_monotone_alloc(std::mt19937_64& gen, std::size_t n) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    survopt::AllocationRule A;
    A.probs.resize(n);
    double level = u(gen);
    for (std::size_t t = 0; t < n; ++t) {
        A.probs[t] = level;
        level *= 0.3 + 0.7 * u(gen);
        level = std::max(level, 0.01);
    }
    return A;
}

}  // namespace testutil
