#pragma once

// Zero-sum game between the analyst (allocation A) and an adversary choosing
// the conditional data distribution q. Provides V(A,q), exact best responses
// for both players, equilibrium certificates, and a brute-force minimax
// oracle for small supports.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "survopt/cost_model.hpp"
#include "survopt/types.hpp"

namespace survopt {

/// n-normalized variance V(A,q) = <pi, q./A> - <pi, q>^2.
inline double variance(const AllocationRule& A, const AdversaryResponse& q,
                       const DiscreteCostDistribution& F) {
    const std::size_t n = F.size();
    if (A.size() != n || q.size() != n)
        throw DimensionMismatch("allocation/adversary must match the support size");
    double lin = 0.0, mean = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        if (A.probs[t] <= 0.0) throw ZeroAllocation("allocation entries must be positive");
        lin += F.pmf[t] * q.q[t] / A.probs[t];
        mean += F.pmf[t] * q.q[t];
    }
    return lin - mean * mean;
}

inline double expected_spend(const AllocationRule& A, const DiscreteCostDistribution& F) {
    double s = 0.0;
    for (std::size_t t = 0; t < F.size(); ++t) s += F.pmf[t] * F.costs[t] * A.probs[t];
    return s;
}

namespace detail {

/// Fill order for the adversary's fractional knapsack: largest 1/A_t first,
/// ties broken by lowest index.
inline std::vector<std::size_t> knapsack_order(const AllocationRule& A) {
    std::vector<std::size_t> order(A.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return A.probs[a] < A.probs[b]; });
    return order;
}

/// Greedy q achieving mean m in knapsack order.
inline AdversaryResponse fill_to_mean(const AllocationRule& A,
                                      const DiscreteCostDistribution& F, double m) {
    AdversaryResponse q;
    q.q.assign(F.size(), 0.0);
    double remaining = m;
    for (std::size_t idx : knapsack_order(A)) {
        if (remaining <= 0.0) break;
        const double take = std::min(remaining, F.pmf[idx]);
        q.q[idx] = take / F.pmf[idx];
        remaining -= take;
    }
    return q;
}

}  // namespace detail

/// Exact sup_q V(A,q) over the box [0,1]^|C|, with the maximizer.
///
/// For fixed mean m = <pi,q>, max <pi, q./A> is a fractional-knapsack value
/// h(m): concave piecewise linear with slope 1/A on each segment. The outer
/// objective h(m) - m^2 is concave in m; the maximum lies at a segment
/// breakpoint or at the interior stationary point m = slope/2 of a segment.
inline std::pair<double, AdversaryResponse> worst_case_variance(
    const AllocationRule& A, const DiscreteCostDistribution& F) {
    const std::size_t n = F.size();
    if (A.size() != n) throw DimensionMismatch("allocation must match the support size");
    for (double a : A.probs)
        if (a <= 0.0) throw ZeroAllocation("allocation entries must be positive");

    const auto order = detail::knapsack_order(A);
    double best_val = 0.0, best_m = 0.0;
    double mass_left = 0.0, h_left = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double slope = 1.0 / A.probs[order[j]];
        const double mass_right = mass_left + F.pmf[order[j]];
        const double m = std::clamp(slope / 2.0, mass_left, mass_right);
        const double val = h_left + slope * (m - mass_left) - m * m;
        if (val > best_val) {
            best_val = val;
            best_m = m;
        }
        h_left += slope * F.pmf[order[j]];
        mass_left = mass_right;
    }
    return {best_val, detail::fill_to_mean(A, F, best_m)};
}

/// Adversary's best response to A; achieves the worst_case_variance value.
inline AdversaryResponse best_response_adversary(const AllocationRule& A,
                                                 const DiscreteCostDistribution& F) {
    return worst_case_variance(A, F).second;
}

/// Min-player best response to q > 0: A_t = min(1, sqrt(q_t / (lambda c_t)))
/// with lambda chosen so the budget binds. Zero-cost types get A_t = 1.
inline AllocationRule best_response_alloc(const AdversaryResponse& q,
                                          const DiscreteCostDistribution& F,
                                          double budget_per_agent) {
    const std::size_t n = F.size();
    if (q.size() != n) throw DimensionMismatch("adversary must match the support size");
    for (double v : q.q)
        if (v <= 0.0) throw ZeroAdversaryEntry("best response requires q_t > 0 for all t");
    if (budget_per_agent <= 0.0) throw InfeasibleBudget("budget must be positive");

    AllocationRule A;
    A.probs.assign(n, 1.0);
    if (expected_spend(A, F) <= budget_per_agent) return A;  // cap active everywhere

    const auto alloc_at_lambda = [&](double lambda) {
        AllocationRule out;
        out.probs.resize(n);
        for (std::size_t t = 0; t < n; ++t)
            out.probs[t] = F.costs[t] == 0.0
                               ? 1.0
                               : std::min(1.0, std::sqrt(q.q[t] / (lambda * F.costs[t])));
        return out;
    };

    constexpr double kAllocFloor = 1e-9;
    double lo = 1e-30, hi = 0.0;
    for (std::size_t t = 0; t < n; ++t)
        if (F.costs[t] > 0.0)
            hi = std::max(hi, q.q[t] / (F.costs[t] * kAllocFloor * kAllocFloor));

    const double spend_tol = 1e-11 * budget_per_agent;
    AllocationRule out = alloc_at_lambda(lo);
    for (int iter = 0; iter < 400 && hi / lo > 1.0 + 1e-15; ++iter) {
        const double mid = std::sqrt(lo * hi);
        out = alloc_at_lambda(mid);
        const double spend = expected_spend(out, F);
        if (std::abs(spend - budget_per_agent) <= spend_tol) return out;
        (spend > budget_per_agent ? lo : hi) = mid;
    }
    return alloc_at_lambda(std::sqrt(lo * hi));
}

struct EquilibriumCertificate {
    bool min_player_ok = false;
    bool max_player_ok = false;
    bool budget_binding = false;
    double lambda = 0.0;
    std::vector<double> per_index_slack;  // 1/A_t - 2<pi,q>, signed
    double value = 0.0;

    bool pass() const { return min_player_ok && max_player_ok && budget_binding; }
};

/// Certifies that (A, q) is an equilibrium pair of the zero-sum game at the
/// given budget. Failures are recorded in the certificate, not thrown.
inline EquilibriumCertificate verify_equilibrium(const AllocationRule& A,
                                                 const AdversaryResponse& q,
                                                 const DiscreteCostDistribution& F,
                                                 double budget_per_agent, double tol = 1e-8) {
    const std::size_t n = F.size();
    if (A.size() != n || q.size() != n)
        throw DimensionMismatch("allocation/adversary must match the support size");

    EquilibriumCertificate cert;
    cert.value = variance(A, q, F);

    // (i) budget binds, or A == 1 and affordable
    const double spend = expected_spend(A, F);
    const bool flat_one =
        std::all_of(A.probs.begin(), A.probs.end(), [&](double a) { return a >= 1.0 - tol; });
    cert.budget_binding = std::abs(spend - budget_per_agent) <= tol * std::max(1.0, budget_per_agent)
                          || (flat_one && spend <= budget_per_agent + tol);

    // (ii) min player: recover lambda from interior indices (median of implied
    // values), then check A_t = min(1, sqrt(q_t/(lambda c_t))) wherever q_t > tol
    std::vector<double> implied;
    for (std::size_t t = 0; t < n; ++t)
        if (q.q[t] > tol && F.costs[t] > 0.0 && A.probs[t] < 1.0 - tol)
            implied.push_back(q.q[t] / (F.costs[t] * A.probs[t] * A.probs[t]));
    double lambda;
    if (!implied.empty()) {
        std::sort(implied.begin(), implied.end());
        lambda = implied[implied.size() / 2];
    } else {
        // all capped at 1: any lambda <= min q_t/c_t works
        lambda = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t)
            if (F.costs[t] > 0.0 && q.q[t] > tol)
                lambda = std::min(lambda, q.q[t] / F.costs[t]);
        if (!std::isfinite(lambda)) lambda = 0.0;
    }
    cert.lambda = lambda;
    cert.min_player_ok = lambda >= 0.0;
    for (std::size_t t = 0; t < n && cert.min_player_ok; ++t) {
        if (q.q[t] <= tol) continue;  // lemma undefined at q_t = 0; skipped
        const double expect = F.costs[t] == 0.0 || lambda == 0.0
                                  ? 1.0
                                  : std::min(1.0, std::sqrt(q.q[t] / (lambda * F.costs[t])));
        if (std::abs(A.probs[t] - expect) > tol) cert.min_player_ok = false;
    }

    // (iii) max player: per-index trichotomy against 2<pi,q>
    double mean = 0.0;
    for (std::size_t t = 0; t < n; ++t) mean += F.pmf[t] * q.q[t];
    cert.max_player_ok = true;
    cert.per_index_slack.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double d = 1.0 / A.probs[t] - 2.0 * mean;
        cert.per_index_slack[t] = d;
        if (q.q[t] <= tol) {
            if (d > tol) cert.max_player_ok = false;
        } else if (q.q[t] >= 1.0 - tol) {
            if (d < -tol) cert.max_player_ok = false;
        } else {
            if (std::abs(d) > tol) cert.max_player_ok = false;
        }
    }
    return cert;
}

namespace detail {

/// Exact sup_q V(A,q) by enumerating KKT activity patterns. Each index is
/// either at 0, at 1, or interior with 1/A_j = 2<pi,q>. V is concave in q,
/// so the KKT conditions are sufficient; this path shares no code with the
/// knapsack scan above.
inline double max_variance_kkt(const std::vector<double>& pmf, const std::vector<double>& alloc) {
    const std::size_t n = pmf.size();
    std::size_t patterns = 1;
    for (std::size_t i = 0; i < n; ++i) patterns *= 3;

    double best = 0.0;
    std::vector<int> trit(n);
    for (std::size_t p = 0; p < patterns; ++p) {
        std::size_t rem = p;
        for (std::size_t i = 0; i < n; ++i) {
            trit[i] = static_cast<int>(rem % 3);
            rem /= 3;
        }
        double base = 0.0, lin = 0.0, interior_mass = 0.0;
        double m0 = -1.0;
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            if (trit[i] == 1) {
                base += pmf[i];
                lin += pmf[i] / alloc[i];
            } else if (trit[i] == 2) {
                const double cand = 1.0 / (2.0 * alloc[i]);
                if (m0 < 0.0)
                    m0 = cand;
                else if (std::abs(cand - m0) > 1e-9)
                    ok = false;  // interior indices must share 1/A
                interior_mass += pmf[i];
            }
        }
        if (!ok) continue;
        double v;
        if (m0 < 0.0) {
            v = lin - base * base;
        } else {
            const double extra = m0 - base;
            if (extra < -1e-12 || extra > interior_mass + 1e-12) continue;
            const double e = std::clamp(extra, 0.0, interior_mass);
            v = lin + e * 2.0 * m0 - m0 * m0;
        }
        best = std::max(best, v);
    }
    return best;
}

inline void enumerate_monotone(std::vector<double>& alloc, std::size_t depth, int prev_step,
                               double partial_spend, int grid_n, double a_step,
                               const DiscreteCostDistribution& F, double spend_limit,
                               double& best) {
    const std::size_t n = F.size();
    if (depth == n) {
        best = std::min(best, max_variance_kkt(F.pmf, alloc));
        return;
    }
    // even at the minimum level for all remaining types the budget must hold
    double min_tail = 0.0;
    for (std::size_t t = depth; t < n; ++t) min_tail += F.pmf[t] * F.costs[t] * a_step;
    if (partial_spend + min_tail > spend_limit) return;
    for (int s = prev_step; s >= 1; --s) {
        const double a = a_step * s;
        const double spend = partial_spend + F.pmf[depth] * F.costs[depth] * a;
        if (spend > spend_limit && F.costs[depth] > 0.0) continue;
        alloc[depth] = a;
        enumerate_monotone(alloc, depth + 1, s, spend, grid_n, a_step, F, spend_limit, best);
    }
}

}  // namespace detail

/// Independent minimax oracle for |C| <= 4: minimum over all monotone,
/// budget-feasible allocations on the a_step grid of the exact inner sup.
inline double brute_force_minimax(const DiscreteCostDistribution& F, double budget_per_agent,
                                  double a_step, double q_step) {
    if (F.size() > 4) throw TooLarge("brute_force_minimax supports |C| <= 4");
    if (!(a_step > 0.0 && a_step <= 0.5) || !(q_step > 0.0 && q_step <= 0.5))
        throw InvalidInput("steps must lie in (0, 0.5]");
    if (budget_per_agent <= 0.0) throw InfeasibleBudget("budget must be positive");

    const int grid_n = static_cast<int>(std::llround(1.0 / a_step));
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> alloc(F.size());
    // rounding the optimal rule down to the grid only lowers spend, so the
    // strict budget admits a near-optimal grid point; relax it only when the
    // grid is empty outright
    detail::enumerate_monotone(alloc, 0, grid_n, 0.0, grid_n, a_step, F, budget_per_agent, best);
    if (!std::isfinite(best))
        detail::enumerate_monotone(alloc, 0, grid_n, 0.0, grid_n, a_step, F,
                                   budget_per_agent + a_step * F.mean_cost(), best);
    if (!std::isfinite(best)) throw InfeasibleBudget("no grid allocation fits the budget");
    return best;
}

}  // namespace survopt
