#pragma once

#include <cstddef>
#include <vector>

#include "survopt/errors.hpp"

namespace survopt {

/// Per-cost-type purchase probabilities, aligned to a DiscreteCostDistribution.
/// Valid rules are monotone non-increasing with entries in (0,1].
struct AllocationRule {
    std::vector<double> probs;

    std::size_t size() const { return probs.size(); }

    bool is_monotone(double tol = 1e-12) const {
        for (std::size_t t = 1; t < probs.size(); ++t)
            if (probs[t] > probs[t - 1] + tol) return false;
        return true;
    }
};

/// Adversary's conditional data distribution: q_t = Pr[m(z)=1 | c_t].
struct AdversaryResponse {
    std::vector<double> q;

    std::size_t size() const { return q.size(); }
};

}  // namespace survopt
