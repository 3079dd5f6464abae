// Command-line front end: design, verify, simulate, and oracle runs over
// JSON configs, with CSV emission for plots.
//
// Exit codes: 0 ok, 2 invalid config or arguments, 3 non-regular prior,
// 4 infeasible budget, 5 verification failure.

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "survopt/json_io.hpp"
#include "survopt/simulate.hpp"

using namespace survopt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNonRegular = 3;
constexpr int kExitBudget = 4;
constexpr int kExitVerifyFail = 5;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<double> parse_budget_grid(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw InvalidInput("bad budget grid entry \"" + tok + "\"");
        }
    }
    if (out.empty()) throw InvalidInput("budget grid is empty");
    return out;
}

DiscreteCostDistribution require_discrete(const PriorConfig& cfg) {
    if (!cfg.is_discrete)
        throw InvalidInput("this command requires a discrete prior; run discretize first");
    return cfg.discrete;
}

int cmd_design_moment(const std::string& config, double budget, const std::string& space,
                      const std::string& out) {
    const DiscreteCostDistribution F = require_discrete(load_prior(config));
    json artifact;
    if (space == "true") {
        artifact = to_json(design_mechanism(F, budget));
    } else if (space == "virtual") {
        artifact = to_json(design_moment_discrete(F, budget));
    } else {
        throw InvalidInput("space must be \"true\" or \"virtual\"");
    }
    if (!out.empty())
        io_detail::save_file(out, artifact);
    else
        std::cout << artifact.dump(2) << "\n";
    return kExitOk;
}

int cmd_design_regression(const std::string& config, const std::string& out) {
    const RegressionInstance inst =
        parse_regression_instance(io_detail::load_file(config));
    const json artifact = to_json(design_regression(inst));
    if (!out.empty())
        io_detail::save_file(out, artifact);
    else
        std::cout << artifact.dump(2) << "\n";
    return kExitOk;
}

int cmd_menu(const std::string& config, const std::string& out) {
    const json j = io_detail::load_file(config);
    if (j.value("kind", "") != "mechanism")
        throw InvalidInput("menu requires a \"mechanism\" design artifact");
    const MechanismDesign m = parse_mechanism(j);
    std::printf("%-20s %s\n", "price", "probability");
    for (const MenuItem& it : m.menu.items)
        std::printf("%-20.12g %.12g\n", it.price, it.prob);
    if (!out.empty()) {
        std::ofstream csv(out);
        if (!csv) throw InvalidInput("cannot write " + out);
        csv << "price,probability\n";
        for (const MenuItem& it : m.menu.items)
            csv << fmt(it.price) << "," << fmt(it.prob) << "\n";
    }
    return kExitOk;
}

int verify_regression(const RegressionDesign& d, double tol) {
    json cert;
    const DiscreteCostDistribution& F = d.instance.costs_dist;
    bool monotone = d.rule.is_monotone(tol);
    bool in_range = true;
    for (double a : d.rule.probs) in_range = in_range && a > 0.0 && a <= 1.0 + tol;
    double spend = 0.0;
    for (std::size_t t = 0; t < F.size(); ++t)
        spend += F.pmf[t] * F.costs[t] * d.rule.probs[t];
    const bool flat_one = d.pooled_level >= 1.0 - tol && d.t_minus == 1 && d.t_plus == F.size();
    bool budget_ok = d.degenerate || (flat_one && spend <= d.instance.budget_per_agent + tol) ||
                     std::abs(spend - d.instance.budget_per_agent) <=
                         tol * std::max(1.0, d.instance.budget_per_agent);
    bool bracket_ok = d.degenerate ||
                      (d.t_minus <= d.adversary.t_star && d.adversary.t_star <= d.t_plus);
    const bool pass = monotone && in_range && budget_ok && bracket_ok;
    cert["monotone"] = monotone;
    cert["allocation_in_range"] = in_range;
    cert["budget_binding"] = budget_ok;
    cert["pooling_bracket_ok"] = bracket_ok;
    cert["spend"] = spend;
    cert["pass"] = pass;
    std::cout << cert.dump(2) << "\n";
    return pass ? kExitOk : kExitVerifyFail;
}

int cmd_verify(const std::string& config, double tol) {
    const json j = io_detail::load_file(config);
    const std::string kind = j.value("kind", "");
    if (kind == "regression") return verify_regression(parse_regression_design(j), tol);
    if (kind != "moment" && kind != "mechanism")
        throw InvalidInput("unknown design kind \"" + kind + "\"");

    const MomentDesign d = parse_moment_core(j);
    DiscreteCostDistribution opt_space = d.F;
    if (kind == "mechanism")
        opt_space = DiscreteCostDistribution(j.at("virtual_costs").get<std::vector<double>>(),
                                             d.F.pmf);
    const EquilibriumCertificate cert =
        verify_equilibrium(d.rule, d.adversary, opt_space, d.budget_per_agent, tol);
    std::cout << to_json(cert).dump(2) << "\n";
    return cert.pass() ? kExitOk : kExitVerifyFail;
}

int cmd_oracle(const std::string& config, double budget, double step) {
    const DiscreteCostDistribution F = require_discrete(load_prior(config));
    const MomentDesign d = design_moment_discrete(F, budget);
    const double oracle = brute_force_minimax(F, budget, step, step);
    std::printf("oracle=%.12g closed_form=%.12g\n", oracle, d.value);
    return kExitOk;
}

int cmd_simulate(const std::string& config, std::size_t n, std::size_t reps,
                 std::uint64_t seed, bool adversarial, const std::string& out) {
    const json j = io_detail::load_file(config);
    const std::string kind = j.value("kind", "");

    DiscreteCostDistribution F;
    Menu menu;
    DataModel model;
    double predicted = 0.0;

    if (kind == "mechanism" || kind == "moment") {
        const MomentDesign d = parse_moment_core(j);
        if (kind == "mechanism") {
            const MechanismDesign m = parse_mechanism(j);
            F = m.true_costs;
            menu = m.menu;
        } else {
            F = d.F;
            menu = build_menu(d.rule, payments_discrete(d.rule, d.F.costs));
        }
        std::vector<double> q = d.adversary.q;
        if (!adversarial) {
            if (!j.contains("user_q"))
                throw InvalidInput("non-adversarial simulation needs a user_q field");
            q = j.at("user_q").get<std::vector<double>>();
        }
        model = DataModel::moment_binary(q);
        predicted = adversarial ? d.value : variance(d.rule, AdversaryResponse{q}, d.F);
    } else if (kind == "regression") {
        const RegressionDesign d = parse_regression_design(j);
        bool swapped = false;
        const RegressionInstance norm = d.instance.normalized(swapped);
        F = norm.costs_dist;
        menu = build_menu(d.rule, payments_discrete(d.rule, F.costs));
        std::vector<double> q = d.degenerate ? std::vector<double>(F.size(), 0.0)
                                             : d.adversary.induced_q();
        if (!adversarial) {
            if (!j.contains("user_q"))
                throw InvalidInput("non-adversarial simulation needs a user_q field");
            q = j.at("user_q").get<std::vector<double>>();
        }
        model = DataModel::regression({1.0}, norm.noise_lo, norm.noise_hi, q);
        predicted = d.objective;
    } else {
        throw InvalidInput("unknown design kind \"" + kind + "\"");
    }

    const SimulationConfig cfg{n, reps, seed, adversarial};
    const SimulationReport report = monte_carlo(model, F, menu, cfg, predicted);

    if (!out.empty()) {
        std::ofstream csv(out);
        if (!csv) throw InvalidInput("cannot write " + out);
        csv << "rep";
        for (std::size_t k = 0; k < report.mean_estimate.size(); ++k)
            csv << ",estimate_" << (k + 1);
        csv << ",spend\n";
        for (std::size_t rep = 0; rep < report.rows.size(); ++rep) {
            csv << rep;
            for (double e : report.rows[rep].estimate) csv << "," << fmt(e);
            csv << "," << fmt(report.rows[rep].spend_per_agent) << "\n";
        }
    }
    json summary{{"mean_estimate", report.mean_estimate},
                 {"empirical_variance_scaled", report.empirical_variance_scaled},
                 {"mean_spend_per_agent", report.mean_spend_per_agent},
                 {"predicted_value", report.predicted_value}};
    std::cout << summary.dump(2) << "\n";
    return kExitOk;
}

int cmd_curve(const std::string& config, const std::string& grid, const std::string& out) {
    const DiscreteCostDistribution F = require_discrete(load_prior(config));
    const std::vector<double> budgets = parse_budget_grid(grid);
    std::ostringstream csv;
    csv << "budget,value,t_star,pooled_level,alpha\n";
    for (double b : budgets) {
        const MomentDesign d = design_moment_discrete(F, b);
        csv << fmt(b) << "," << fmt(d.value) << "," << d.pool_end << ","
            << fmt(d.pooled_level) << "," << fmt(d.alpha) << "\n";
    }
    if (!out.empty()) {
        std::ofstream file(out);
        if (!file) throw InvalidInput("cannot write " + out);
        file << csv.str();
    } else {
        std::cout << csv.str();
    }
    return kExitOk;
}

int cmd_discretize(const std::string& config, double eps, const std::string& out) {
    const PriorConfig cfg = load_prior(config);
    if (cfg.is_discrete) throw InvalidInput("discretize requires a continuous prior");
    const DiscreteCostDistribution F = discretize(cfg.continuous, eps);
    const json j{{"costs", F.costs}, {"pmf", F.pmf}};
    if (!out.empty())
        io_detail::save_file(out, j);
    else
        std::cout << j.dump(2) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variance-minimizing survey design under per-agent budgets"};
    app.require_subcommand(1);

    std::string config, out, space = "true", grid;
    double budget = 0.0, tol = 1e-8, step = 0.02, eps = 0.01;
    std::size_t n = 1000, reps = 100;
    std::uint64_t seed = 0;
    bool adversarial = true;

    auto* design_moment = app.add_subcommand("design-moment", "Optimal moment-estimation design");
    design_moment->add_option("--config", config)->required();
    design_moment->add_option("--budget", budget)->required();
    design_moment->add_option("--space", space);
    design_moment->add_option("--out", out);

    auto* design_reg = app.add_subcommand("design-regression", "Optimal regression design");
    design_reg->add_option("--config", config)->required();
    design_reg->add_option("--out", out);

    auto* menu_cmd = app.add_subcommand("menu", "Print the posted menu of a design");
    menu_cmd->add_option("--config,--design", config)->required();
    menu_cmd->add_option("--out", out);

    auto* verify = app.add_subcommand("verify", "Certify a design artifact");
    verify->add_option("--config", config)->required();
    verify->add_option("--tol", tol);

    auto* oracle = app.add_subcommand("oracle", "Brute-force minimax cross-check");
    oracle->add_option("--config", config)->required();
    oracle->add_option("--budget", budget)->required();
    oracle->add_option("--step", step);

    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo survey simulation");
    simulate->add_option("--config", config)->required();
    simulate->add_option("--n", n);
    simulate->add_option("--reps", reps);
    simulate->add_option("--seed", seed)->required();
    simulate->add_option("--adversarial", adversarial);
    simulate->add_option("--out", out);

    auto* curve = app.add_subcommand("curve", "Design across a budget grid (CSV)");
    curve->add_option("--config", config)->required();
    curve->add_option("--budget-grid", grid)->required();
    curve->add_option("--out", out);

    auto* discretize_cmd = app.add_subcommand("discretize", "Grid a continuous prior");
    discretize_cmd->add_option("--config", config)->required();
    discretize_cmd->add_option("--eps", eps)->required();
    discretize_cmd->add_option("--out", out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (design_moment->parsed()) return cmd_design_moment(config, budget, space, out);
        if (design_reg->parsed()) return cmd_design_regression(config, out);
        if (menu_cmd->parsed()) return cmd_menu(config, out);
        if (verify->parsed()) return cmd_verify(config, tol);
        if (oracle->parsed()) return cmd_oracle(config, budget, step);
        if (simulate->parsed()) return cmd_simulate(config, n, reps, seed, adversarial, out);
        if (curve->parsed()) return cmd_curve(config, grid, out);
        if (discretize_cmd->parsed()) return cmd_discretize(config, eps, out);
    } catch (const NonRegular& e) {
        std::cerr << e.what() << "\n";
        return kExitNonRegular;
    } catch (const InfeasibleBudget& e) {
        std::cerr << e.what() << "\n";
        return kExitBudget;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "InternalError: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
