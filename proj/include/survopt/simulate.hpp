#pragma once

// Monte-Carlo harness: synthesizes populations with cost-correlated data,
// runs posted-menu surveys, and measures Horvitz-Thompson / weighted least
// squares estimates against the analytic worst-case predictions. All
// randomness comes from a counter-based generator so runs are reproducible
// bit-for-bit across platforms and parallel schedules.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "survopt/cost_model.hpp"
#include "survopt/mechanism.hpp"
#include "survopt/types.hpp"

namespace survopt {

/// splitmix64 keyed by (seed, rep). std:: distributions are implementation
/// defined, so uniforms and normals are derived here directly.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t rep)
        : state_(mix(seed + 0x9E3779B97F4A7C15ull * (rep + 1))) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix(state_);
    }

    /// Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; one spare value is cached.
    double next_normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Worst-case data models are binary by construction: {0,1} moments and
/// {L,U} regression noise attain the adversary's sup.
struct DataModel {
    enum class Kind { MomentBinary, Regression };

    Kind kind = Kind::MomentBinary;
    std::vector<double> q;  // Pr[m(z)=1 | c_t] resp. Pr[eps=U | c_t]
    std::size_t dims = 1;

    // regression only
    std::vector<double> theta_star;
    double noise_lo = 0.0;
    double noise_hi = 0.0;
    double feature_scale = 1.0;

    static DataModel moment_binary(std::vector<double> q_in, std::size_t d = 1) {
        DataModel m;
        m.kind = Kind::MomentBinary;
        m.q = std::move(q_in);
        m.dims = d;
        return m;
    }

    static DataModel regression(std::vector<double> theta, double L, double U,
                                std::vector<double> q_in, double feature_scale = 1.0) {
        DataModel m;
        m.kind = Kind::Regression;
        m.theta_star = std::move(theta);
        m.dims = m.theta_star.size();
        m.noise_lo = L;
        m.noise_hi = U;
        m.q = std::move(q_in);
        m.feature_scale = feature_scale;
        return m;
    }

    void validate(const DiscreteCostDistribution& F) const {
        if (q.size() != F.size())
            throw DimensionMismatch("model q must match the support size");
        for (double v : q)
            if (v < 0.0 || v > 1.0) throw InvalidInput("q entries must lie in [0,1]");
        if (dims == 0) throw InvalidInput("dimension must be positive");
        if (kind == Kind::Regression) {
            double mean = 0.0;
            for (std::size_t t = 0; t < F.size(); ++t)
                mean += F.pmf[t] * ((1.0 - q[t]) * noise_lo + q[t] * noise_hi);
            if (std::abs(mean) > 1e-9)
                throw InvalidInput("regression noise must be mean-zero within 1e-9");
        }
    }
};

struct SimulationConfig {
    std::size_t n = 0;
    std::size_t reps = 0;
    std::uint64_t seed = 0;
    bool adversarial = true;  // use the design's equilibrium q

    void validate() const {
        if (n < 1 || reps < 1) throw InvalidInput("n and reps must be at least 1");
    }
};

struct Agent {
    std::size_t type = 0;
    bool selected = false;
    double alloc = 0.0;    // probability of the chosen menu item; 0 if opted out
    double payment = 0.0;  // realized payment (paid only when selected)
    std::vector<double> data;  // moments, or features followed by the response
};

struct SurveySample {
    std::vector<Agent> agents;
    double total_spend = 0.0;
};

/// One survey round: n i.i.d. costs, truthful menu choice (ties resolved
/// toward the higher-probability item), Bernoulli selection, data drawn from
/// the model conditional on cost.
inline SurveySample run_survey(const DataModel& model, const DiscreteCostDistribution& F,
                               const Menu& menu, std::size_t n, CounterRng& rng) {
    model.validate(F);
    SurveySample sample;
    sample.agents.resize(n);
    std::vector<double> cum(F.size());
    double acc = 0.0;
    for (std::size_t t = 0; t < F.size(); ++t) cum[t] = acc += F.pmf[t];

    for (std::size_t i = 0; i < n; ++i) {
        Agent& ag = sample.agents[i];
        const double u = rng.next_double();
        ag.type = F.size() - 1;
        for (std::size_t t = 0; t < F.size(); ++t)
            if (u < cum[t]) {
                ag.type = t;
                break;
            }
        const auto item = choose_item(menu, F.costs[ag.type]);
        if (item) {
            ag.alloc = menu.items[*item].prob;
            ag.selected = rng.next_double() < ag.alloc;
            if (ag.selected) {
                ag.payment = menu.items[*item].price;
                sample.total_spend += ag.payment;
            }
        } else {
            rng.next_double();  // keep the draw count cost-independent
        }

        if (model.kind == DataModel::Kind::MomentBinary) {
            ag.data.resize(model.dims);
            for (std::size_t k = 0; k < model.dims; ++k)
                ag.data[k] = rng.next_double() < model.q[ag.type] ? 1.0 : 0.0;
        } else {
            ag.data.resize(model.dims + 1);
            double y = 0.0;
            for (std::size_t k = 0; k < model.dims; ++k) {
                ag.data[k] = model.feature_scale * rng.next_normal();
                y += ag.data[k] * model.theta_star[k];
            }
            y += rng.next_double() < model.q[ag.type] ? model.noise_hi : model.noise_lo;
            ag.data[model.dims] = y;
        }
    }
    return sample;
}

/// (1/n) sum_{i in S} m(z_i) / A(c_i); the empty selection estimates 0.
inline double ht_estimate(const SurveySample& sample) {
    double s = 0.0;
    for (const Agent& ag : sample.agents) {
        if (!ag.selected) continue;
        if (ag.alloc <= 0.0) throw ZeroAllocation("selected agent with zero allocation");
        s += ag.data[0] / ag.alloc;
    }
    return s / static_cast<double>(sample.agents.size());
}

inline std::vector<double> ht_estimate_multi(const SurveySample& sample, std::size_t d) {
    std::vector<double> out(d, 0.0);
    for (const Agent& ag : sample.agents) {
        if (!ag.selected) continue;
        if (ag.alloc <= 0.0) throw ZeroAllocation("selected agent with zero allocation");
        for (std::size_t k = 0; k < d; ++k) out[k] += ag.data[k] / ag.alloc;
    }
    for (double& v : out) v /= static_cast<double>(sample.agents.size());
    return out;
}

/// Weighted least squares over the selected set: solves
/// (sum x x^T / A) theta = sum x y / A by Gaussian elimination with partial
/// pivoting. data = (x_1..x_d, y).
inline std::vector<double> wls_estimate(const SurveySample& sample, std::size_t d) {
    std::vector<std::vector<double>> gram(d, std::vector<double>(d, 0.0));
    std::vector<double> rhs(d, 0.0);
    for (const Agent& ag : sample.agents) {
        if (!ag.selected) continue;
        if (ag.alloc <= 0.0) throw ZeroAllocation("selected agent with zero allocation");
        const double w = 1.0 / ag.alloc;
        for (std::size_t r = 0; r < d; ++r) {
            for (std::size_t c = 0; c < d; ++c) gram[r][c] += w * ag.data[r] * ag.data[c];
            rhs[r] += w * ag.data[r] * ag.data[d];
        }
    }

    std::vector<std::size_t> perm(d);
    for (std::size_t i = 0; i < d; ++i) perm[i] = i;
    for (std::size_t col = 0; col < d; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < d; ++r)
            if (std::abs(gram[r][col]) > std::abs(gram[piv][col])) piv = r;
        if (std::abs(gram[piv][col]) < 1e-12) throw SingularGram("weighted Gram is singular");
        std::swap(gram[col], gram[piv]);
        std::swap(rhs[col], rhs[piv]);
        for (std::size_t r = col + 1; r < d; ++r) {
            const double f = gram[r][col] / gram[col][col];
            for (std::size_t c = col; c < d; ++c) gram[r][c] -= f * gram[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<double> theta(d, 0.0);
    for (std::size_t r = d; r-- > 0;) {
        double s = rhs[r];
        for (std::size_t c = r + 1; c < d; ++c) s -= gram[r][c] * theta[c];
        theta[r] = s / gram[r][r];
    }
    return theta;
}

struct RepRow {
    std::vector<double> estimate;
    double spend_per_agent = 0.0;
};

struct SimulationReport {
    std::vector<double> mean_estimate;
    double empirical_variance_scaled = 0.0;  // n * sample variance (summed over coords)
    double mean_spend_per_agent = 0.0;
    double predicted_value = 0.0;
    std::vector<RepRow> rows;
};

/// Runs config.reps independent surveys (per-rep RNG keyed by (seed, rep)),
/// estimates with HT or WLS per the model kind, and reports the n-scaled
/// empirical variance next to the analytic prediction.
inline SimulationReport monte_carlo(const DataModel& model, const DiscreteCostDistribution& F,
                                    const Menu& menu, const SimulationConfig& config,
                                    double predicted_value) {
    config.validate();
    model.validate(F);
    const std::size_t d =
        model.kind == DataModel::Kind::MomentBinary ? model.dims : model.theta_star.size();

    SimulationReport report;
    report.predicted_value = predicted_value;
    report.rows.resize(config.reps);
    for (std::size_t rep = 0; rep < config.reps; ++rep) {
        CounterRng rng(config.seed, rep);
        const SurveySample sample = run_survey(model, F, menu, config.n, rng);
        RepRow& row = report.rows[rep];
        row.spend_per_agent = sample.total_spend / static_cast<double>(config.n);
        if (model.kind == DataModel::Kind::MomentBinary) {
            row.estimate = ht_estimate_multi(sample, d);
        } else {
            try {
                row.estimate = wls_estimate(sample, d);
            } catch (const SingularGram&) {
                row.estimate.assign(d, 0.0);  // empty/degenerate selections count
            }
        }
    }

    report.mean_estimate.assign(d, 0.0);
    double spend = 0.0;
    for (const RepRow& row : report.rows) {
        spend += row.spend_per_agent;
        for (std::size_t k = 0; k < d; ++k) report.mean_estimate[k] += row.estimate[k];
    }
    spend /= static_cast<double>(config.reps);
    for (double& v : report.mean_estimate) v /= static_cast<double>(config.reps);
    report.mean_spend_per_agent = spend;

    double var = 0.0;
    if (config.reps > 1) {
        for (const RepRow& row : report.rows)
            for (std::size_t k = 0; k < d; ++k) {
                const double delta = row.estimate[k] - report.mean_estimate[k];
                var += delta * delta;
            }
        var /= static_cast<double>(config.reps - 1);
    }
    report.empirical_variance_scaled = static_cast<double>(config.n) * var;
    return report;
}

}  // namespace survopt
