#pragma once

// Cost priors for survey design: discrete supports with probability masses,
// two built-in continuous families on (0,1], virtual costs and regularity.

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "survopt/errors.hpp"

namespace survopt {

inline constexpr double kPmfTol = 1e-12;

/// Discrete cost prior: strictly increasing support and positive masses
/// summing to one.
struct DiscreteCostDistribution {
    std::vector<double> costs;
    std::vector<double> pmf;

    DiscreteCostDistribution() = default;

    DiscreteCostDistribution(std::vector<double> costs_in, std::vector<double> pmf_in)
        : costs(std::move(costs_in)), pmf(std::move(pmf_in)) {
        validate();
    }

    std::size_t size() const { return costs.size(); }

    void validate() const {
        if (costs.empty() || costs.size() != pmf.size())
            throw InvalidInput("costs and pmf must be non-empty and of equal length");
        if (costs.front() < 0.0)
            throw InvalidInput("costs must be non-negative");
        for (std::size_t t = 1; t < costs.size(); ++t)
            if (costs[t] <= costs[t - 1])
                throw NonMonotoneInput("costs must be strictly increasing");
        double total = 0.0;
        for (double p : pmf) {
            if (p <= 0.0) throw InvalidInput("pmf entries must be positive");
            total += p;
        }
        if (std::abs(total - 1.0) > kPmfTol)
            throw InvalidInput("pmf must sum to 1 within 1e-12");
    }

    double mean_cost() const {
        double s = 0.0;
        for (std::size_t t = 0; t < size(); ++t) s += pmf[t] * costs[t];
        return s;
    }

    double mean_sqrt_cost() const {
        double s = 0.0;
        for (std::size_t t = 0; t < size(); ++t) s += pmf[t] * std::sqrt(costs[t]);
        return s;
    }

    /// CDF evaluated at the support point with index t (0-based), i.e. the
    /// mass at or below costs[t].
    double cdf_at_index(std::size_t t) const {
        double s = 0.0;
        for (std::size_t j = 0; j <= t; ++j) s += pmf[j];
        return s;
    }
};

/// Built-in continuous families, both supported on (0,1].
/// Power has density f(c) = (p+1) c^p with p > -1; Uniform is Power with p=0.
enum class ContinuousFamily { Uniform, Power };

struct ContinuousCostDistribution {
    ContinuousFamily kind = ContinuousFamily::Uniform;
    double p = 0.0;  // exponent for the Power family

    static ContinuousCostDistribution uniform() { return {ContinuousFamily::Uniform, 0.0}; }

    static ContinuousCostDistribution power(double p) {
        if (p <= -1.0) throw InvalidInput("power family requires p > -1");
        return {ContinuousFamily::Power, p};
    }

    double exponent() const { return kind == ContinuousFamily::Uniform ? 0.0 : p; }

    double pdf(double c) const {
        if (c <= 0.0 || c > 1.0) return 0.0;
        const double q = exponent();
        return (q + 1.0) * std::pow(c, q);
    }

    double cdf(double c) const {
        if (c <= 0.0) return 0.0;
        if (c >= 1.0) return 1.0;
        return std::pow(c, exponent() + 1.0);
    }

    double mean_cost() const {
        const double q = exponent();
        return (q + 1.0) / (q + 2.0);
    }
};

struct VirtualCostDistribution {
    DiscreteCostDistribution base;
    std::vector<double> virtual_costs;
};

/// Discrete virtual costs phi_t = c_t + (c_t - c_{t-1}) F(c_{t-1}) / pi_t,
/// with c_0 = 0 and F(c_0) = 0 (so phi_1 = c_1). Throws NonRegular if the
/// result is not strictly increasing; ironing is unsupported.
inline VirtualCostDistribution virtual_costs_discrete(const DiscreteCostDistribution& F) {
    F.validate();
    const std::size_t n = F.size();
    std::vector<double> phi(n);
    double cum = 0.0;  // F(c_{t-1})
    double prev_cost = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        phi[t] = F.costs[t] + (F.costs[t] - prev_cost) * cum / F.pmf[t];
        cum += F.pmf[t];
        prev_cost = F.costs[t];
    }
    for (std::size_t t = 1; t < n; ++t)
        if (phi[t] <= phi[t - 1])
            throw NonRegular("virtual costs are not strictly increasing");
    return {F, std::move(phi)};
}

/// Continuous virtual cost phi(c) = c + F(c)/f(c).
inline double virtual_cost_continuous(const ContinuousCostDistribution& F, double c) {
    if (c <= 0.0 || c > 1.0) throw OutOfSupport("c must lie in (0,1]");
    const double f = F.pdf(c);
    if (f <= 0.0) throw OutOfSupport("density vanishes at c");
    return c + F.cdf(c) / f;
}

inline bool check_regular(const DiscreteCostDistribution& F) {
    try {
        virtual_costs_discrete(F);
        return true;
    } catch (const NonRegular&) {
        return false;
    }
}

/// Continuous regularity checked on a 10,001-point grid: phi must be strictly
/// increasing with tolerance 1e-10.
inline bool check_regular(const ContinuousCostDistribution& F) {
    constexpr int kGridPoints = 10001;
    double prev = -std::numeric_limits<double>::infinity();
    for (int i = 1; i <= kGridPoints; ++i) {
        const double c = static_cast<double>(i) / kGridPoints;
        const double phi = virtual_cost_continuous(F, c);
        if (phi <= prev + 1e-10) return false;
        prev = phi;
    }
    return true;
}

/// Discretize onto the grid {eps, 2 eps, ..., 1} with mass
/// pi_t = F(t eps) - F((t-1) eps); zero-mass cells are dropped.
inline DiscreteCostDistribution discretize(const ContinuousCostDistribution& F, double eps) {
    if (!(eps > 0.0 && eps <= 1.0)) throw BadGrid("eps must lie in (0,1]");
    const double cells_real = 1.0 / eps;
    const auto cells = static_cast<long>(std::llround(cells_real));
    if (std::abs(cells_real - static_cast<double>(cells)) > 1e-9)
        throw BadGrid("1/eps must be integral");

    std::vector<double> costs, pmf;
    double prev_cdf = 0.0;
    for (long t = 1; t <= cells; ++t) {
        const double right = (t == cells) ? 1.0 : eps * static_cast<double>(t);
        const double mass = F.cdf(right) - prev_cdf;
        prev_cdf = F.cdf(right);
        if (mass > 0.0) {
            costs.push_back(right);
            pmf.push_back(mass);
        }
    }
    // normalize away accumulated rounding so the invariant holds exactly
    double total = 0.0;
    for (double m : pmf) total += m;
    for (double& m : pmf) m /= total;
    return DiscreteCostDistribution(std::move(costs), std::move(pmf));
}

}  // namespace survopt
