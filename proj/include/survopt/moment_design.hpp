#pragma once

// Exact optimal allocation rules for moment estimation under a budget:
// the discrete closed form (pooling threshold t*, pooled level A-bar, and a
// sqrt-cost tail) and its continuous limit. Costs here live in optimization
// space; callers virtualize first when designing against strategic agents.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "survopt/cost_model.hpp"
#include "survopt/game.hpp"
#include "survopt/types.hpp"

namespace survopt {

/// Q(k,x) = sum_{t<=k} pi_t c_t + sum_{t>k} pi_t sqrt(c_t c_k / x).
/// k counts head types (1-based); k=0 means an empty head. When c_k = 0 the
/// tail is taken at its limit, 0.
inline double q_fun(const DiscreteCostDistribution& F, std::size_t k, double x) {
    const std::size_t n = F.size();
    if (k > n) throw IndexOutOfRange("k must lie in 0..|C|");
    if (!(x > 0.0 && x <= 1.0)) throw InvalidInput("x must lie in (0,1]");
    double head = 0.0;
    for (std::size_t t = 0; t < k; ++t) head += F.pmf[t] * F.costs[t];
    const double ck = (k == 0) ? 0.0 : F.costs[k - 1];
    if (ck == 0.0) return head;
    double tail = 0.0;
    for (std::size_t t = k; t < n; ++t) tail += F.pmf[t] * std::sqrt(F.costs[t] * ck / x);
    return head + tail;
}

/// R(k,x) = 2 (sum_{t<=k} pi_t c_t x / c_k + sum_{t>k} pi_t). When c_k = 0
/// (possible only for k=1) the head sum degenerates to pi_1 x.
inline double r_fun(const DiscreteCostDistribution& F, std::size_t k, double x) {
    const std::size_t n = F.size();
    if (k > n) throw IndexOutOfRange("k must lie in 0..|C|");
    if (!(x > 0.0 && x <= 1.0)) throw InvalidInput("x must lie in (0,1]");
    double tail = 0.0;
    for (std::size_t t = k; t < n; ++t) tail += F.pmf[t];
    if (k == 0) return 2.0 * tail;
    const double ck = F.costs[k - 1];
    double head = 0.0;
    if (ck == 0.0) {
        head = F.pmf[0] * x;  // limit of c_1 x / c_1 with c_1 -> 0
    } else {
        for (std::size_t t = 0; t < k; ++t) head += F.pmf[t] * F.costs[t] * x / ck;
    }
    return 2.0 * (head + tail);
}

inline double b_fun(const DiscreteCostDistribution& F, std::size_t k, double x) {
    return q_fun(F, k, x) / r_fun(F, k, x);
}

enum class DesignCase { FlatHighBudget, PooledInterior, NoPoolLowBudget };

inline const char* to_string(DesignCase c) {
    switch (c) {
        case DesignCase::FlatHighBudget: return "FlatHighBudget";
        case DesignCase::PooledInterior: return "PooledInterior";
        default: return "NoPoolLowBudget";
    }
}

inline DesignCase design_case_from_string(const std::string& s) {
    if (s == "FlatHighBudget") return DesignCase::FlatHighBudget;
    if (s == "PooledInterior") return DesignCase::PooledInterior;
    if (s == "NoPoolLowBudget") return DesignCase::NoPoolLowBudget;
    throw InvalidInput("unknown design case: " + s);
}

struct MomentDesign {
    DiscreteCostDistribution F;
    double budget_per_agent = 0.0;
    AllocationRule rule;
    std::size_t pool_end = 0;     // t*, types 1..t* share the pooled level
    double pooled_level = 1.0;    // A-bar
    double alpha = 0.0;           // tail coefficient, A_t = alpha / sqrt(c_t)
    DesignCase design_case = DesignCase::FlatHighBudget;
    AdversaryResponse adversary;  // equilibrium q from the matching case proof
    double value = 0.0;           // n-normalized worst-case variance V(A*, q*)
    double budget_spend = 0.0;

    // solver internals, kept for diagnostics and certificates
    std::size_t k_star = 0;
    double x_star = 0.0;
    std::size_t k_tilde = 0;  // 0 when unused
    double x_tilde = 0.0;
};

namespace detail {

inline void ensure(bool ok, const char* what) {
    if (!ok) throw std::logic_error(std::string("internal invariant violated: ") + what);
}

/// Solves B(k, x) = budget for x in [c_k/c_{k+1}, 1] by bisection on s=sqrt(x)
/// (B is decreasing in x).
inline double solve_x_star(const DiscreteCostDistribution& F, std::size_t k, double budget) {
    double lo = std::sqrt(F.costs[k - 1] / F.costs[k]);  // requires k < |C|
    double hi = 1.0;
    if (b_fun(F, k, 1.0) >= budget) return 1.0;
    for (int iter = 0; iter < 200 && hi - lo > 1e-15; ++iter) {
        const double mid = 0.5 * (lo + hi);
        (b_fun(F, k, mid * mid) > budget ? lo : hi) = mid;
    }
    const double s = 0.5 * (lo + hi);
    return s * s;
}

inline double tail_alpha(const DiscreteCostDistribution& F, std::size_t t_star, double pooled,
                         double budget) {
    double head = 0.0, tail = 0.0;
    for (std::size_t t = 0; t < F.size(); ++t) {
        if (t < t_star)
            head += F.pmf[t] * F.costs[t];
        else
            tail += F.pmf[t] * std::sqrt(F.costs[t]);
    }
    return (budget - pooled * head) / tail;
}

inline void finalize(MomentDesign& d) {
    const std::size_t n = d.F.size();
    d.rule.probs.resize(n);
    for (std::size_t t = 0; t < n; ++t)
        d.rule.probs[t] =
            t < d.pool_end ? d.pooled_level : d.alpha / std::sqrt(d.F.costs[t]);
    for (double a : d.rule.probs) ensure(a > 0.0 && a <= 1.0 + 1e-12, "allocation in (0,1]");
    for (double& a : d.rule.probs) a = std::min(a, 1.0);
    ensure(d.rule.is_monotone(1e-9), "allocation monotone non-increasing");
    for (std::size_t t = 0; t < n; ++t)
        ensure(d.F.costs[t] > 0.0 || t < d.pool_end, "zero-cost types are pooled");
    d.budget_spend = expected_spend(d.rule, d.F);
    if (d.design_case != DesignCase::FlatHighBudget)
        ensure(std::abs(d.budget_spend - d.budget_per_agent) <=
                   1e-9 * std::max(1.0, d.budget_per_agent),
               "budget binds");
    d.value = variance(d.rule, d.adversary, d.F);
}

}  // namespace detail

/// Closed-form optimal allocation for discrete supports: find k* with
/// B(k*,1) <= budget < B(k*+1,1), solve budget = B(k*, x*), then branch on
/// R(k*, x*) vs 1. The equilibrium adversary is materialized per the matching
/// case so the pair can be certified downstream.
inline MomentDesign design_moment_discrete(const DiscreteCostDistribution& F,
                                           double budget_per_agent) {
    F.validate();
    if (budget_per_agent <= 0.0) throw InfeasibleBudget("budget must be positive");
    const std::size_t n = F.size();

    MomentDesign d;
    d.F = F;
    d.budget_per_agent = budget_per_agent;

    if (budget_per_agent >= F.mean_cost()) {
        d.design_case = DesignCase::FlatHighBudget;
        d.pool_end = n;
        d.pooled_level = 1.0;
        d.alpha = std::sqrt(F.costs.back());
        d.adversary = detail::fill_to_mean(AllocationRule{std::vector<double>(n, 1.0)}, F, 0.5);
        detail::finalize(d);
        return d;
    }

    // k* = largest k with B(k,1) <= budget; B(k,1) is non-decreasing in k
    std::size_t k_star = 0;
    for (std::size_t k = 1; k <= n; ++k)
        if (b_fun(F, k, 1.0) <= budget_per_agent) k_star = k;
    d.k_star = k_star;

    if (k_star == 0) {
        // budget below B(1,1) = sqrt(c_1) E[sqrt(c)] / 2: no pooling region
        d.design_case = DesignCase::NoPoolLowBudget;
        d.pool_end = 0;
        d.alpha = budget_per_agent / F.mean_sqrt_cost();
        d.adversary.q.assign(n, 1.0);
        d.pooled_level = d.alpha / std::sqrt(F.costs.front());
        detail::finalize(d);
        return d;
    }

    const bool zero_head = F.costs[k_star - 1] == 0.0;  // forces k_star = 1
    double x_star = 0.0, r_at_star = 0.0;
    if (!zero_head) {
        x_star = (k_star == n) ? F.costs.back() / (2.0 * budget_per_agent)
                               : detail::solve_x_star(F, k_star, budget_per_agent);
        d.x_star = x_star;
        r_at_star = r_fun(F, k_star, x_star);
    } else {
        // c_1 = 0 with k* = 1: B(1,.) vanishes identically, so take the
        // limit of Case 1 as c_1 -> 0, where x* -> 0 and R(1, x*) -> 2 T_1
        r_at_star = 2.0 * (1.0 - F.pmf[0]);
    }

    if (r_at_star >= 1.0) {
        // Case 1: interior pooled level 1/R(k*, x*)
        d.design_case = DesignCase::PooledInterior;
        d.pool_end = k_star;
        d.pooled_level = (k_star == n) ? budget_per_agent / F.mean_cost() : 1.0 / r_at_star;
        d.alpha = (k_star == n)
                      ? d.pooled_level * std::sqrt(F.costs.back() / x_star)
                      : detail::tail_alpha(F, k_star, d.pooled_level, budget_per_agent);
        d.adversary.q.resize(n);
        for (std::size_t t = 0; t < n; ++t)
            d.adversary.q[t] = t >= k_star           ? 1.0
                               : zero_head           ? 0.0
                                                     : (F.costs[t] / F.costs[k_star - 1]) * x_star;
    } else {
        // Case 2: pooled level capped at 1; threshold from the Q(k,1) scan
        d.design_case = DesignCase::PooledInterior;
        d.pooled_level = 1.0;
        std::size_t t_star = 0;
        for (std::size_t k = 1; k <= n; ++k)
            if (q_fun(F, k, 1.0) < budget_per_agent) t_star = k;
        detail::ensure(t_star >= 1 && t_star < n, "Case-2 threshold interior");
        d.pool_end = t_star;
        d.alpha = detail::tail_alpha(F, t_star, 1.0, budget_per_agent);

        // adversary from the smallest k with R(k+1,1) <= 1 <= R(k,1)
        std::size_t k_tilde = 0;
        for (std::size_t k = 1; k <= k_star && k_tilde == 0; ++k)
            if (r_fun(F, k, 1.0) >= 1.0 && (k == n || r_fun(F, k + 1, 1.0) <= 1.0)) k_tilde = k;
        detail::ensure(k_tilde >= 1, "Case-2 adversary index exists");
        const double ck = F.costs[k_tilde - 1];
        double head = 0.0, tail = 0.0;
        for (std::size_t t = 0; t < n; ++t)
            (t < k_tilde ? head : tail) += (t < k_tilde ? F.pmf[t] * F.costs[t] : F.pmf[t]);
        // R(k~, x~) = 1
        const double x_tilde =
            ck == 0.0 ? (0.5 - tail) / F.pmf[0] : (0.5 - tail) * ck / head;
        detail::ensure(x_tilde >= -1e-12 && x_tilde <= 1.0 + 1e-12, "x~ in [0,1]");
        d.k_tilde = k_tilde;
        d.x_tilde = std::clamp(x_tilde, 0.0, 1.0);
        d.adversary.q.resize(n);
        for (std::size_t t = 0; t < n; ++t) {
            if (t >= k_tilde)
                d.adversary.q[t] = 1.0;
            else if (t + 1 == k_tilde)
                d.adversary.q[t] = d.x_tilde;
            else
                d.adversary.q[t] = (F.costs[t] / ck) * d.x_tilde;
        }
    }
    detail::finalize(d);
    return d;
}

/// Risk of estimating a d-dimensional moment vector is d times the scalar
/// worst case; the optimal allocation does not change with d.
inline double multi_dim_value(const MomentDesign& d, std::size_t dims) {
    if (dims == 0) throw InvalidInput("dimension must be positive");
    return static_cast<double>(dims) * d.value;
}

struct ContinuousDesign {
    ContinuousCostDistribution F;
    double budget_per_agent = 0.0;
    double x_star = 1.0;        // pooling threshold on cost values; 1 pools all
    double pooled_level = 1.0;  // A-bar
    double alpha = 1.0;         // A(c) = alpha / sqrt(c) above the threshold
};

/// E[c 1{c <= x}] for the power family with density (p+1) c^p.
inline double partial_mean_below(const ContinuousCostDistribution& F, double x) {
    const double a = F.exponent() + 1.0;
    return a * std::pow(x, a + 1.0) / (a + 1.0);
}

/// E[sqrt(c) 1{c > x}].
inline double partial_sqrt_mean_above(const ContinuousCostDistribution& F, double x) {
    const double a = F.exponent() + 1.0;
    return a / (a + 0.5) * (1.0 - std::pow(x, a + 0.5));
}

inline double q_inf(const ContinuousCostDistribution& F, double x) {
    return partial_mean_below(F, x) + std::sqrt(x) * partial_sqrt_mean_above(F, x);
}

inline double r_inf(const ContinuousCostDistribution& F, double x) {
    const double a = F.exponent() + 1.0;
    return 2.0 * (partial_mean_below(F, x) / x + 1.0 - std::pow(x, a));
}

inline double g_fun(const ContinuousCostDistribution& F, double x) {
    return q_inf(F, x) / std::max(1.0, r_inf(F, x));
}

/// Continuous limit: x* = min{1, G^{-1}(budget)} with G = Q_inf/max(1,R_inf),
/// pooled level 1/max(1, R_inf(x*)), alpha making the budget bind. Budgets at
/// or above the range of G pool everyone.
inline ContinuousDesign design_moment_continuous(const ContinuousCostDistribution& F,
                                                 double budget_per_agent) {
    if (budget_per_agent <= 0.0) throw InfeasibleBudget("budget must be positive");
    ContinuousDesign d;
    d.F = F;
    d.budget_per_agent = budget_per_agent;

    double x_star = 1.0;
    if (budget_per_agent < g_fun(F, 1.0)) {
        double lo = 0.0, hi = 1.0;  // G is increasing with G(0+) = 0
        for (int iter = 0; iter < 200 && hi - lo > 1e-14; ++iter) {
            const double mid = 0.5 * (lo + hi);
            (g_fun(F, mid) < budget_per_agent ? lo : hi) = mid;
        }
        x_star = 0.5 * (lo + hi);
    }
    d.x_star = x_star;
    d.pooled_level = 1.0 / std::max(1.0, r_inf(F, x_star));
    d.alpha = x_star >= 1.0
                  ? d.pooled_level
                  : (budget_per_agent - d.pooled_level * partial_mean_below(F, x_star)) /
                        partial_sqrt_mean_above(F, x_star);
    return d;
}

/// Evaluates the designed rule at a cost in the support.
inline double alloc_at(const MomentDesign& d, double c) {
    for (std::size_t t = 0; t < d.F.size(); ++t)
        if (std::abs(d.F.costs[t] - c) <= 1e-12) return d.rule.probs[t];
    throw OutOfSupport("cost is not a support point of the design");
}

inline double alloc_at(const ContinuousDesign& d, double c) {
    if (c <= 0.0 || c > 1.0) throw OutOfSupport("c must lie in (0,1]");
    return c <= d.x_star ? d.pooled_level : std::min(1.0, d.alpha / std::sqrt(c));
}

}  // namespace survopt
