#pragma once

// Optimal allocation for regression data acquisition. The adversary's
// noise-placement problem reduces to a knapsack whose solution is independent
// of the (monotone) allocation; the analyst's problem is then solved by an
// exhaustive search over the pooling bracket (t-, t+) and the cap boundary t1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "survopt/cost_model.hpp"
#include "survopt/types.hpp"

namespace survopt {

struct RegressionInstance {
    DiscreteCostDistribution costs_dist;
    double noise_lo = 0.0;  // L <= 0
    double noise_hi = 0.0;  // U >= 0
    double budget_per_agent = 0.0;

    void validate() const {
        costs_dist.validate();
        if (noise_lo > 0.0 || noise_hi < 0.0)
            throw InvalidInput("noise range must satisfy L <= 0 <= U");
        if (budget_per_agent <= 0.0) throw InfeasibleBudget("budget must be positive");
    }

    /// Role swap L <-> -U when |L| > U; the design is symmetric in the two.
    RegressionInstance normalized(bool& swapped) const {
        RegressionInstance out = *this;
        swapped = noise_lo * noise_lo > noise_hi * noise_hi;
        if (swapped) {
            out.noise_lo = -noise_hi;
            out.noise_hi = -noise_lo;
        }
        return out;
    }
};

struct KnapsackAdversary {
    std::size_t t_star = 0;  // 1-based split index
    double q_star = 0.0;     // Pr[eps = U | c_{t*}]
    double r_sq = 0.0;       // second moment of the split type's noise
    std::vector<double> gamma;

    /// Pr[eps = U | c_t] for each type; mean-zero by construction.
    std::vector<double> induced_q() const {
        std::vector<double> q(gamma.size(), 0.0);
        for (std::size_t t = t_star; t < gamma.size(); ++t) q[t] = 1.0;
        q[t_star - 1] = q_star;
        return q;
    }
};

/// Worst-case noise placement: subject to mean-zero, pack the U-outcomes onto
/// the highest-cost types. t* = min{j : -L/(U-L) > sum_{t>j} pi_t},
/// q* = (-L/(U-L) - sum_{t>t*} pi_t)/pi_{t*}, R^2 = (U^2-L^2) q* + L^2.
inline KnapsackAdversary adversary_knapsack(const RegressionInstance& inst) {
    inst.validate();
    const double L = inst.noise_lo, U = inst.noise_hi;
    if (L == 0.0)
        throw DegenerateNoise("mean-zero noise with L = 0 is identically zero");
    if (U == 0.0) throw DegenerateNoise("normalize with the L/U swap first");

    const DiscreteCostDistribution& F = inst.costs_dist;
    const std::size_t n = F.size();
    const double capacity = -L / (U - L);

    KnapsackAdversary adv;
    std::vector<double> suffix(n + 1, 0.0);  // suffix[j] = sum_{t > j} pi_t
    for (std::size_t j = n; j-- > 0;) suffix[j] = suffix[j + 1] + F.pmf[j];
    adv.t_star = n;
    for (std::size_t j = 1; j <= n; ++j)
        if (capacity > suffix[j]) {
            adv.t_star = j;
            break;
        }
    adv.q_star = std::min(
        1.0, std::max(0.0, (capacity - suffix[adv.t_star]) / F.pmf[adv.t_star - 1]));
    adv.r_sq = (U * U - L * L) * adv.q_star + L * L;
    adv.gamma.resize(n);
    for (std::size_t t = 0; t < n; ++t)
        adv.gamma[t] = t + 1 < adv.t_star ? -L
                       : t + 1 == adv.t_star ? std::sqrt(adv.r_sq)
                                             : U;
    return adv;
}

/// sum_t pi_t gamma_t^2 / A_t, the (feature-independent part of the)
/// worst-case estimation risk.
inline double regression_objective(const AllocationRule& A, const RegressionInstance& inst,
                                   const KnapsackAdversary& adv) {
    const DiscreteCostDistribution& F = inst.costs_dist;
    if (A.size() != F.size() || adv.gamma.size() != F.size())
        throw DimensionMismatch("allocation/gamma must match the support size");
    double s = 0.0;
    for (std::size_t t = 0; t < F.size(); ++t) {
        if (A.probs[t] <= 0.0) throw ZeroAllocation("allocation entries must be positive");
        s += F.pmf[t] * adv.gamma[t] * adv.gamma[t] / A.probs[t];
    }
    return s;
}

struct RegressionDesign {
    RegressionInstance instance;  // as given, before any swap
    KnapsackAdversary adversary;
    AllocationRule rule;
    std::size_t t_minus = 0, t_plus = 0, t_one = 0;  // 1-based; t_one may be 0
    double pooled_level = 1.0;
    double mu = 0.0;  // 1/sqrt(lambda); 0 when no capped side indices exist
    double objective = 0.0;
    bool swapped = false;
    bool degenerate = false;
};

namespace regression_detail {

struct Candidate {
    double mu = 0.0;
    bool side_all_capped = false;  // candidate (d): every side index at 1
};

/// Assembles the rule for one (t-, t+, t1, mu) tuple and checks consistency;
/// returns false when the tuple is infeasible.
inline bool assemble(const DiscreteCostDistribution& F, const std::vector<double>& gamma,
                     double budget, std::size_t t_minus, std::size_t t_plus, std::size_t t_one,
                     const Candidate& cand, AllocationRule& rule, double& pooled) {
    const std::size_t n = F.size();
    const double tol = 1e-9;
    double p0 = 0.0, p1 = 0.0, pm = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const std::size_t tt = t + 1;
        if (tt >= t_minus && tt <= t_plus)
            pm += F.pmf[t] * F.costs[t];
        else if (tt <= t_one)
            p0 += F.pmf[t] * F.costs[t];
        else
            p1 += F.pmf[t] * std::sqrt(F.costs[t]) * gamma[t];
    }
    if (cand.side_all_capped && p1 > 0.0) return false;

    if (pm <= 0.0) {
        // pool of zero-cost types: pooled level is 1 and the budget must
        // bind on the side indices alone
        pooled = 1.0;
        if (std::abs(p0 + cand.mu * p1 - budget) > tol * std::max(1.0, budget)) return false;
    } else {
        pooled = (budget - p0 - cand.mu * p1) / pm;
        if (!(pooled > tol && pooled <= 1.0 + tol)) return false;
        pooled = std::min(pooled, 1.0);
    }

    rule.probs.assign(n, pooled);
    for (std::size_t t = 0; t < n; ++t) {
        const std::size_t tt = t + 1;
        if (tt >= t_minus && tt <= t_plus) continue;
        if (tt <= t_one) {
            // capped at 1: requires the uncapped value to reach 1
            if (F.costs[t] > 0.0 &&
                cand.mu * gamma[t] / std::sqrt(F.costs[t]) < 1.0 - tol && !cand.side_all_capped)
                return false;
            rule.probs[t] = 1.0;
        } else {
            if (F.costs[t] == 0.0) return false;  // free types must be capped
            const double a = cand.mu * gamma[t] / std::sqrt(F.costs[t]);
            if (a > 1.0 + tol || a <= tol) return false;
            rule.probs[t] = std::min(a, 1.0);
        }
    }
    if (!rule.is_monotone(tol)) return false;
    return true;
}

}  // namespace regression_detail

/// Optimal monotone allocation: water-filling min(1, mu gamma_t / sqrt(c_t))
/// outside a pooled bracket [t-, t+] containing the adversary's split index.
/// All O(|C|^3) brackets and cap boundaries are tried; per tuple, mu comes
/// from a boundary equality or the interior stationary point of the budget-
/// eliminated objective.
inline RegressionDesign design_regression(const RegressionInstance& inst_in) {
    inst_in.validate();
    RegressionDesign d;
    d.instance = inst_in;
    const RegressionInstance inst = inst_in.normalized(d.swapped);
    const DiscreteCostDistribution& F = inst.costs_dist;
    const std::size_t n = F.size();

    if (inst.noise_lo == 0.0) {
        // noise is identically zero; any feasible rule has zero risk
        d.degenerate = true;
        d.adversary.t_star = 1;
        d.adversary.gamma.assign(n, 0.0);
        const double mean = F.mean_cost();
        const double flat = mean > 0.0 ? std::min(1.0, inst.budget_per_agent / mean) : 1.0;
        d.rule.probs.assign(n, flat);
        d.pooled_level = flat;
        d.t_minus = 1;
        d.t_plus = n;
        d.objective = 0.0;
        return d;
    }

    d.adversary = adversary_knapsack(inst);
    const std::vector<double>& gamma = d.adversary.gamma;

    if (inst.budget_per_agent >= F.mean_cost()) {
        d.rule.probs.assign(n, 1.0);
        d.pooled_level = 1.0;
        d.t_minus = 1;
        d.t_plus = n;
        d.t_one = 0;
        d.objective = regression_objective(d.rule, inst, d.adversary);
        return d;
    }

    const std::size_t t_star = d.adversary.t_star;
    double best_obj = std::numeric_limits<double>::infinity();
    bool found = false;

    for (std::size_t t_minus = 1; t_minus <= t_star; ++t_minus) {
        for (std::size_t t_plus = t_star; t_plus <= n; ++t_plus) {
            for (std::size_t t_one = 0; t_one <= n; ++t_one) {
                double p0 = 0.0, p1 = 0.0, pm = 0.0, k_sum = 0.0, pool_g2 = 0.0;
                for (std::size_t t = 0; t < n; ++t) {
                    const std::size_t tt = t + 1;
                    if (tt >= t_minus && tt <= t_plus) {
                        pm += F.pmf[t] * F.costs[t];
                        pool_g2 += F.pmf[t] * gamma[t] * gamma[t];
                    } else if (tt <= t_one) {
                        p0 += F.pmf[t] * F.costs[t];
                    } else {
                        p1 += F.pmf[t] * std::sqrt(F.costs[t]) * gamma[t];
                        k_sum += F.pmf[t] * gamma[t] * std::sqrt(F.costs[t]);
                    }
                }

                std::vector<regression_detail::Candidate> cands;
                if (p1 == 0.0) {
                    cands.push_back({0.0, true});
                } else {
                    const double budget_free = inst.budget_per_agent - p0;
                    // (a) pooled level meets the side value just below t-
                    if (t_minus >= 2 && t_minus - 1 > t_one) {
                        const std::size_t j = t_minus - 2;
                        if (F.costs[j] > 0.0) {
                            const double denom =
                                gamma[j] / std::sqrt(F.costs[j]) * pm + p1;
                            if (denom > 0.0) cands.push_back({budget_free / denom, false});
                        }
                    }
                    // (b) pooled level meets the side value just above t+
                    if (t_plus < n && t_plus + 1 > t_one) {
                        const std::size_t j = t_plus;
                        const double denom = gamma[j] / std::sqrt(F.costs[j]) * pm + p1;
                        if (denom > 0.0) cands.push_back({budget_free / denom, false});
                    }
                    // boundary where the pooled level hits 1 (t1 adjacent)
                    cands.push_back({(budget_free - pm) / p1, false});
                    // (c) interior stationary point of K/mu + Kp/(g - kappa mu)
                    const double kp = pm * pool_g2;
                    if (k_sum > 0.0 && kp > 0.0) {
                        const double denom =
                            std::sqrt(kp * p1) + std::sqrt(k_sum) * p1;
                        const double mu = std::sqrt(k_sum) * budget_free / denom;
                        if (mu > 0.0 && budget_free - p1 * mu > 0.0)
                            cands.push_back({mu, false});
                    }
                }

                for (const auto& cand : cands) {
                    if (!cand.side_all_capped && !(cand.mu > 0.0)) continue;
                    AllocationRule rule;
                    double pooled = 0.0;
                    if (!regression_detail::assemble(F, gamma, inst.budget_per_agent, t_minus,
                                                     t_plus, t_one, cand, rule, pooled))
                        continue;
                    const double obj = regression_objective(rule, inst, d.adversary);
                    if (obj < best_obj - 1e-12) {
                        best_obj = obj;
                        d.rule = rule;
                        d.t_minus = t_minus;
                        d.t_plus = t_plus;
                        d.t_one = t_one;
                        d.pooled_level = pooled;
                        d.mu = cand.mu;
                        d.objective = obj;
                        found = true;
                    }
                }
            }
        }
    }
    if (!found) throw Infeasible("no feasible pooling tuple; invalid instance");
    return d;
}

namespace regression_detail {

inline void enumerate_monotone(std::vector<double>& alloc, std::size_t depth, int prev_step,
                               double partial_spend, double a_step,
                               const RegressionInstance& inst, const KnapsackAdversary& adv,
                               double spend_limit, double& best) {
    const DiscreteCostDistribution& F = inst.costs_dist;
    const std::size_t n = F.size();
    if (depth == n) {
        double obj = 0.0;
        for (std::size_t t = 0; t < n; ++t)
            obj += F.pmf[t] * adv.gamma[t] * adv.gamma[t] / alloc[t];
        best = std::min(best, obj);
        return;
    }
    double min_tail = 0.0;
    for (std::size_t t = depth; t < n; ++t) min_tail += F.pmf[t] * F.costs[t] * a_step;
    if (partial_spend + min_tail > spend_limit) return;
    for (int s = prev_step; s >= 1; --s) {
        const double a = a_step * s;
        const double spend = partial_spend + F.pmf[depth] * F.costs[depth] * a;
        if (spend > spend_limit && F.costs[depth] > 0.0) continue;
        alloc[depth] = a;
        enumerate_monotone(alloc, depth + 1, s, spend, a_step, inst, adv, spend_limit, best);
    }
}

}  // namespace regression_detail

/// Grid oracle: min of the objective over monotone budget-feasible grid
/// allocations, with the adversary fixed to the knapsack response (which is
/// allocation-independent for monotone rules).
inline double brute_force_regression(const RegressionInstance& inst_in, double a_step) {
    inst_in.validate();
    if (inst_in.costs_dist.size() > 4)
        throw TooLarge("brute_force_regression supports |C| <= 4");
    if (!(a_step > 0.0 && a_step <= 0.5)) throw InvalidInput("a_step must lie in (0, 0.5]");

    bool swapped = false;
    const RegressionInstance inst = inst_in.normalized(swapped);
    const KnapsackAdversary adv = adversary_knapsack(inst);
    const int grid_n = static_cast<int>(std::llround(1.0 / a_step));
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> alloc(inst.costs_dist.size());
    regression_detail::enumerate_monotone(alloc, 0, grid_n, 0.0, a_step, inst, adv,
                                          inst.budget_per_agent, best);
    if (!std::isfinite(best))
        regression_detail::enumerate_monotone(
            alloc, 0, grid_n, 0.0, a_step, inst, adv,
            inst.budget_per_agent + a_step * inst.costs_dist.mean_cost(), best);
    if (!std::isfinite(best)) throw InfeasibleBudget("no grid allocation fits the budget");
    return best;
}

}  // namespace survopt
