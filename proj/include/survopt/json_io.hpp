#pragma once

// JSON (de)serialization for priors, design artifacts, certificates, and
// regression instances. One artifact schema covers all design kinds via a
// "kind" discriminator; artifacts embed the prior and budget so downstream
// commands (verify, simulate, menu) are self-contained.

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "survopt/cost_model.hpp"
#include "survopt/game.hpp"
#include "survopt/mechanism.hpp"
#include "survopt/moment_design.hpp"
#include "survopt/regression.hpp"

namespace survopt {

using nlohmann::json;

namespace io_detail {

inline void reject_unknown_fields(const json& j, const std::set<std::string>& allowed,
                                  const std::string& what) {
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key))
            throw InvalidInput("unknown field \"" + key + "\" in " + what);
}

inline json load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw InvalidInput(std::string("JSON parse error: ") + e.what());
    }
    return j;
}

inline void save_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path);
    out << j.dump(2) << "\n";
}

}  // namespace io_detail

/// Cost prior config: either {"costs": [...], "pmf": [...]} or
/// {"family": "uniform"} / {"family": "power", "p": x}.
struct PriorConfig {
    bool is_discrete = true;
    DiscreteCostDistribution discrete;
    ContinuousCostDistribution continuous;
};

inline PriorConfig parse_prior(const json& j) {
    PriorConfig cfg;
    if (j.contains("family")) {
        io_detail::reject_unknown_fields(j, {"family", "p"}, "continuous prior");
        cfg.is_discrete = false;
        const std::string family = j.at("family").get<std::string>();
        if (family == "uniform") {
            if (j.contains("p")) throw InvalidInput("uniform family takes no exponent");
            cfg.continuous = ContinuousCostDistribution::uniform();
        } else if (family == "power") {
            cfg.continuous = ContinuousCostDistribution::power(j.at("p").get<double>());
        } else {
            throw InvalidInput("unknown family \"" + family + "\"");
        }
        return cfg;
    }
    io_detail::reject_unknown_fields(j, {"costs", "pmf"}, "discrete prior");
    if (!j.contains("costs") || !j.contains("pmf"))
        throw InvalidInput("discrete prior requires costs and pmf");
    cfg.discrete = DiscreteCostDistribution(j.at("costs").get<std::vector<double>>(),
                                            j.at("pmf").get<std::vector<double>>());
    return cfg;
}

inline PriorConfig load_prior(const std::string& path) {
    return parse_prior(io_detail::load_file(path));
}

inline json to_json(const RegressionInstance& inst) {
    return json{{"costs", inst.costs_dist.costs},
                {"pmf", inst.costs_dist.pmf},
                {"L", inst.noise_lo},
                {"U", inst.noise_hi},
                {"budget_per_agent", inst.budget_per_agent}};
}

inline RegressionInstance parse_regression_instance(const json& j) {
    io_detail::reject_unknown_fields(j, {"costs", "pmf", "L", "U", "budget_per_agent"},
                                     "regression instance");
    RegressionInstance inst;
    inst.costs_dist = DiscreteCostDistribution(j.at("costs").get<std::vector<double>>(),
                                               j.at("pmf").get<std::vector<double>>());
    inst.noise_lo = j.at("L").get<double>();
    inst.noise_hi = j.at("U").get<double>();
    inst.budget_per_agent = j.at("budget_per_agent").get<double>();
    return inst;
}

inline json moment_core_json(const MomentDesign& d) {
    return json{{"costs", d.F.costs},
                {"pmf", d.F.pmf},
                {"budget_per_agent", d.budget_per_agent},
                {"probs", d.rule.probs},
                {"pool_end", d.pool_end},
                {"pooled_level", d.pooled_level},
                {"alpha", d.alpha},
                {"case", to_string(d.design_case)},
                {"adversary", d.adversary.q},
                {"value", d.value},
                {"budget_spend", d.budget_spend}};
}

inline json to_json(const MomentDesign& d) {
    json j = moment_core_json(d);
    j["kind"] = "moment";
    return j;
}

inline json to_json(const MechanismDesign& m) {
    json j = moment_core_json(m.design);
    j["kind"] = "mechanism";
    j["true_costs"] = m.true_costs.costs;
    j["virtual_costs"] = m.virt.virtual_costs;
    j["payments"] = m.payments.prices;
    json items = json::array();
    for (const MenuItem& it : m.menu.items)
        items.push_back(json{{"price", it.price}, {"prob", it.prob}});
    j["menu"] = items;
    j["expected_spend_per_agent"] = m.expected_spend_per_agent;
    return j;
}

inline json to_json(const RegressionDesign& d) {
    return json{{"kind", "regression"},
                {"costs", d.instance.costs_dist.costs},
                {"pmf", d.instance.costs_dist.pmf},
                {"L", d.instance.noise_lo},
                {"U", d.instance.noise_hi},
                {"budget_per_agent", d.instance.budget_per_agent},
                {"probs", d.rule.probs},
                {"t_minus", d.t_minus},
                {"t_plus", d.t_plus},
                {"t_one", d.t_one},
                {"pooled_level", d.pooled_level},
                {"mu", d.mu},
                {"objective", d.objective},
                {"swapped", d.swapped},
                {"degenerate", d.degenerate},
                {"t_star", d.adversary.t_star},
                {"q_star", d.adversary.q_star},
                {"r_sq", d.adversary.r_sq},
                {"gamma", d.adversary.gamma}};
}

inline MomentDesign parse_moment_core(const json& j) {
    MomentDesign d;
    d.F = DiscreteCostDistribution(j.at("costs").get<std::vector<double>>(),
                                   j.at("pmf").get<std::vector<double>>());
    d.budget_per_agent = j.at("budget_per_agent").get<double>();
    d.rule.probs = j.at("probs").get<std::vector<double>>();
    d.pool_end = j.at("pool_end").get<std::size_t>();
    d.pooled_level = j.at("pooled_level").get<double>();
    d.alpha = j.at("alpha").get<double>();
    d.design_case = design_case_from_string(j.at("case").get<std::string>());
    d.adversary.q = j.at("adversary").get<std::vector<double>>();
    d.value = j.at("value").get<double>();
    d.budget_spend = j.at("budget_spend").get<double>();
    return d;
}

inline MechanismDesign parse_mechanism(const json& j) {
    MechanismDesign m;
    m.design = parse_moment_core(j);
    m.true_costs = DiscreteCostDistribution(j.at("true_costs").get<std::vector<double>>(),
                                            m.design.F.pmf);
    m.virt.base = m.true_costs;
    m.virt.virtual_costs = j.at("virtual_costs").get<std::vector<double>>();
    m.payments.prices = j.at("payments").get<std::vector<double>>();
    for (const json& it : j.at("menu"))
        m.menu.items.push_back({it.at("price").get<double>(), it.at("prob").get<double>()});
    m.expected_spend_per_agent = j.at("expected_spend_per_agent").get<double>();
    return m;
}

inline RegressionDesign parse_regression_design(const json& j) {
    RegressionDesign d;
    d.instance.costs_dist = DiscreteCostDistribution(j.at("costs").get<std::vector<double>>(),
                                                     j.at("pmf").get<std::vector<double>>());
    d.instance.noise_lo = j.at("L").get<double>();
    d.instance.noise_hi = j.at("U").get<double>();
    d.instance.budget_per_agent = j.at("budget_per_agent").get<double>();
    d.rule.probs = j.at("probs").get<std::vector<double>>();
    d.t_minus = j.at("t_minus").get<std::size_t>();
    d.t_plus = j.at("t_plus").get<std::size_t>();
    d.t_one = j.at("t_one").get<std::size_t>();
    d.pooled_level = j.at("pooled_level").get<double>();
    d.mu = j.at("mu").get<double>();
    d.objective = j.at("objective").get<double>();
    d.swapped = j.at("swapped").get<bool>();
    d.degenerate = j.at("degenerate").get<bool>();
    d.adversary.t_star = j.at("t_star").get<std::size_t>();
    d.adversary.q_star = j.at("q_star").get<double>();
    d.adversary.r_sq = j.at("r_sq").get<double>();
    d.adversary.gamma = j.at("gamma").get<std::vector<double>>();
    return d;
}

inline json to_json(const EquilibriumCertificate& cert) {
    return json{{"min_player_ok", cert.min_player_ok},
                {"max_player_ok", cert.max_player_ok},
                {"budget_binding", cert.budget_binding},
                {"lambda", cert.lambda},
                {"per_index_slack", cert.per_index_slack},
                {"value", cert.value},
                {"pass", cert.pass()}};
}

}  // namespace survopt
