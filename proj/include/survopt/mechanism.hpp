#pragma once

// Truthful implementation layer: unique IC payments for a monotone allocation,
// posted menus, IC/IR certification, and the end-to-end pipeline that designs
// against virtual costs and pays in true costs.

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "survopt/cost_model.hpp"
#include "survopt/moment_design.hpp"
#include "survopt/types.hpp"

namespace survopt {

struct PaymentRule {
    std::vector<double> prices;  // aligned to costs; prices[t] >= costs[t]

    std::size_t size() const { return prices.size(); }
};

struct MenuItem {
    double price = 0.0;
    double prob = 0.0;
};

/// Posted menu: deduplicated (price, prob) pairs, probs strictly decreasing
/// and prices strictly increasing across items.
struct Menu {
    std::vector<MenuItem> items;
};

/// Minimal IC payments for a monotone allocation:
/// P_{|C|} = c_{|C|}, P_t = c_t + sum_{j>t} (A_j/A_t)(c_j - c_{j-1}).
inline PaymentRule payments_discrete(const AllocationRule& A, const std::vector<double>& costs) {
    const std::size_t n = costs.size();
    if (A.size() != n) throw DimensionMismatch("allocation must align with costs");
    if (!A.is_monotone(1e-12)) throw NonMonotoneAllocation("allocation must be non-increasing");
    for (double a : A.probs)
        if (a <= 0.0) throw ZeroAllocation("allocation entries must be positive");

    PaymentRule P;
    P.prices.resize(n);
    double acc = 0.0;  // sum_{j>t} A_j (c_j - c_{j-1})
    for (std::size_t t = n; t-- > 0;) {
        P.prices[t] = costs[t] + acc / A.probs[t];
        if (t > 0) acc += A.probs[t] * (costs[t] - costs[t - 1]);
    }
    return P;
}

/// Continuous analogue P(c) = c + (1/A(c)) \int_c^{c_max} A(z) dz, by adaptive
/// Simpson quadrature to absolute tolerance 1e-9.
inline double payment_continuous(const std::function<double(double)>& alloc, double c,
                                 double c_max) {
    if (c > c_max) throw OutOfSupport("c must not exceed c_max");
    const double ac = alloc(c);
    if (ac <= 0.0) throw ZeroAllocation("allocation must be positive at c");

    const std::function<double(double, double, double, double, double, double)> simpson =
        [&](double a, double b, double fa, double fm, double fb, double tol) -> double {
        const double m = 0.5 * (a + b);
        const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
        const double flm = alloc(lm), frm = alloc(rm);
        const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if (std::abs(left + right - whole) <= 15.0 * tol || b - a < 1e-12)
            return left + right + (left + right - whole) / 15.0;
        return simpson(a, m, fa, flm, fm, tol / 2.0) + simpson(m, b, fm, frm, fb, tol / 2.0);
    };
    const double mid = 0.5 * (c + c_max);
    const double integral =
        c == c_max ? 0.0 : simpson(c, c_max, alloc(c), alloc(mid), alloc(c_max), 1e-9);
    return c + integral / ac;
}

/// Per-agent expected spend sum_t pi_t P_t A_t.
inline double expected_budget(const AllocationRule& A, const PaymentRule& P,
                              const DiscreteCostDistribution& F) {
    const std::size_t n = F.size();
    if (A.size() != n || P.size() != n)
        throw DimensionMismatch("allocation/payments must match the support size");
    double s = 0.0;
    for (std::size_t t = 0; t < n; ++t) s += F.pmf[t] * P.prices[t] * A.probs[t];
    return s;
}

/// Collapses (A, P) into unique menu items; pooled types share a price, so
/// deduplication is on the probability within 1e-9.
inline Menu build_menu(const AllocationRule& A, const PaymentRule& P) {
    if (A.size() != P.size()) throw DimensionMismatch("allocation/payments must align");
    Menu menu;
    for (std::size_t t = 0; t < A.size(); ++t) {
        if (!menu.items.empty() && std::abs(menu.items.back().prob - A.probs[t]) <= 1e-9)
            continue;
        menu.items.push_back({P.prices[t], A.probs[t]});
    }
    return menu;
}

struct IcIrWitness {
    std::size_t type = 0;
    std::size_t deviation = 0;  // == type for an IR violation
    double gap = 0.0;
};

struct IcIrResult {
    bool ok = true;
    std::optional<IcIrWitness> witness;
};

/// Truthfulness check: (P_t - c_t) A_t >= (P_s - c_t) A_s for all t, s, and
/// P_t >= c_t, both within 1e-10. Ties pass; the first violation is returned.
inline IcIrResult check_ic_ir(const std::vector<double>& costs, const AllocationRule& A,
                              const PaymentRule& P, double tol = 1e-10) {
    const std::size_t n = costs.size();
    if (A.size() != n || P.size() != n)
        throw DimensionMismatch("allocation/payments must align with costs");
    IcIrResult res;
    for (std::size_t t = 0; t < n; ++t) {
        if (P.prices[t] < costs[t] - tol) {
            res.ok = false;
            res.witness = {t, t, costs[t] - P.prices[t]};
            return res;
        }
        const double truthful = (P.prices[t] - costs[t]) * A.probs[t];
        for (std::size_t s = 0; s < n; ++s) {
            const double deviating = (P.prices[s] - costs[t]) * A.probs[s];
            if (deviating > truthful + tol) {
                res.ok = false;
                res.witness = {t, s, deviating - truthful};
                return res;
            }
        }
    }
    return res;
}

struct MechanismDesign {
    DiscreteCostDistribution true_costs;
    VirtualCostDistribution virt;
    MomentDesign design;  // computed on the virtualized costs
    PaymentRule payments;
    Menu menu;
    double expected_spend_per_agent = 0.0;
};

/// End-to-end pipeline: virtualize costs, run the allocation design in
/// virtual space, then pay and post the menu in true-cost space. Spend equals
/// the virtual-space spend sum pi_t phi_t A_t by the budget identity.
inline MechanismDesign design_mechanism(const DiscreteCostDistribution& F_true,
                                        double budget_per_agent) {
    MechanismDesign m;
    m.true_costs = F_true;
    m.virt = virtual_costs_discrete(F_true);
    const DiscreteCostDistribution virt_dist(m.virt.virtual_costs, F_true.pmf);
    m.design = design_moment_discrete(virt_dist, budget_per_agent);
    m.payments = payments_discrete(m.design.rule, F_true.costs);
    m.menu = build_menu(m.design.rule, m.payments);
    m.expected_spend_per_agent = expected_budget(m.design.rule, m.payments, F_true);

    detail::ensure(m.expected_spend_per_agent <= budget_per_agent + 1e-9,
                   "mechanism spend within budget");
    double virtual_spend = 0.0;
    for (std::size_t t = 0; t < F_true.size(); ++t)
        virtual_spend += F_true.pmf[t] * m.virt.virtual_costs[t] * m.design.rule.probs[t];
    detail::ensure(std::abs(m.expected_spend_per_agent - virtual_spend) <=
                       1e-9 * std::max(1.0, budget_per_agent),
                   "spend matches the virtual-cost identity");
    detail::ensure(check_ic_ir(F_true.costs, m.design.rule, m.payments).ok,
                   "mechanism is IC and IR");
    return m;
}

/// Menu choice of an agent with the given cost: utility argmax with ties
/// resolved toward the higher allocation probability.
inline std::optional<std::size_t> choose_item(const Menu& menu, double cost) {
    std::optional<std::size_t> best;
    double best_u = 0.0;  // opting out yields zero
    for (std::size_t i = 0; i < menu.items.size(); ++i) {
        const double u = (menu.items[i].price - cost) * menu.items[i].prob;
        if (u < -1e-12) continue;
        // items are scanned in decreasing-probability order, so requiring a
        // strict improvement resolves ties toward the higher probability
        if (!best || u > best_u + 1e-12) {
            best = i;
            best_u = u;
        }
    }
    return best;
}

}  // namespace survopt
