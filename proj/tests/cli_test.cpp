#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

using nlohmann::json;

namespace {

const std::string kCli = SURVOPT_CLI_PATH;

std::string work_dir() {
    static std::string dir = [] {
        std::string d = ::testing::TempDir() + "survopt_cli_test";
        [[maybe_unused]] int rc = std::system(("mkdir -p " + d).c_str());
        return d;
    }();
    return dir;
}

int run(const std::string& args, const std::string& stdout_file = "/dev/null") {
    const std::string cmd = kCli + " " + args + " > " + stdout_file + " 2>/dev/null";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string write_file(const std::string& name, const std::string& content) {
    const std::string path = work_dir() + "/" + name;
    std::ofstream out(path);
    out << content;
    return path;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string intro_prior() {
    static std::string path = write_file(
        "intro_prior.json", R"({"costs": [0.0, 4.0, 8.0], "pmf": [0.5, 0.25, 0.25]})");
    return path;
}

std::string intro_design() {
    static std::string path = [] {
        const std::string out = work_dir() + "/intro_design.json";
        EXPECT_EQ(run("design-moment --config " + intro_prior() +
                      " --budget 7 --space true --out " + out),
                  0);
        return out;
    }();
    return path;
}

}  // namespace

TEST(CliDesignMoment, IntroTrueSpaceArtifact) {
    const json j = json::parse(slurp(intro_design()));
    EXPECT_EQ(j.at("kind"), "mechanism");
    ASSERT_EQ(j.at("menu").size(), 2u);
    EXPECT_NEAR(j.at("menu")[0].at("price").get<double>(), 7.2, 1e-9);
    EXPECT_NEAR(j.at("menu")[0].at("prob").get<double>(), 1.0, 1e-9);
    EXPECT_NEAR(j.at("menu")[1].at("price").get<double>(), 8.0, 1e-9);
    EXPECT_NEAR(j.at("menu")[1].at("prob").get<double>(), 0.8, 1e-9);
    EXPECT_NEAR(j.at("expected_spend_per_agent").get<double>(), 7.0, 1e-9);
    EXPECT_NEAR(j.at("virtual_costs")[1].get<double>(), 12.0, 1e-9);
}

TEST(CliDesignMoment, VirtualSpaceSkipsMechanism) {
    const std::string out = work_dir() + "/virt_design.json";
    const std::string prior = write_file(
        "virt_prior.json", R"({"costs": [0.0, 12.0, 20.0], "pmf": [0.5, 0.25, 0.25]})");
    ASSERT_EQ(run("design-moment --config " + prior + " --budget 7 --space virtual --out " + out),
              0);
    const json j = json::parse(slurp(out));
    EXPECT_EQ(j.at("kind"), "moment");
    EXPECT_NEAR(j.at("probs")[2].get<double>(), 0.8, 1e-9);
    EXPECT_NEAR(j.at("value").get<double>(), 0.3125, 1e-9);
}

TEST(CliExitCodes, NonRegularPriorIsThree) {
    const std::string prior = write_file(
        "nonreg.json",
        R"({"costs": [1.0, 100.0, 101.0], "pmf": [0.3333333333333333, 0.3333333333333333, 0.3333333333333334]})");
    EXPECT_EQ(run("design-moment --config " + prior + " --budget 10"), 3);
}

TEST(CliExitCodes, ZeroBudgetIsFour) {
    EXPECT_EQ(run("design-moment --config " + intro_prior() + " --budget 0"), 4);
}

TEST(CliExitCodes, MalformedConfigIsTwo) {
    const std::string bad = write_file("bad.json", "{ not json");
    EXPECT_EQ(run("design-moment --config " + bad + " --budget 7"), 2);
    const std::string unknown =
        write_file("unknown.json", R"({"costs": [1.0], "pmf": [1.0], "bogus": 1})");
    EXPECT_EQ(run("design-moment --config " + unknown + " --budget 7"), 2);
}

TEST(CliExitCodes, MissingRequiredFlagIsTwo) {
    EXPECT_EQ(run("simulate --config " + intro_design()), 2);
    EXPECT_EQ(run("design-moment --budget 7"), 2);
}

TEST(CliVerify, FreshArtifactPasses) {
    EXPECT_EQ(run("verify --config " + intro_design()), 0);
}

TEST(CliVerify, PerturbedArtifactFails) {
    json j = json::parse(slurp(intro_design()));
    j["probs"][2] = 0.6;
    const std::string path = write_file("perturbed.json", j.dump());
    EXPECT_EQ(run("verify --config " + path), 5);
    // a huge tolerance accepts anything
    EXPECT_EQ(run("verify --config " + path + " --tol 1"), 0);
}

TEST(CliVerify, RegressionDesignStructuralCheck) {
    const std::string cfg = write_file(
        "reg_inst.json",
        R"({"costs": [1.0, 4.0], "pmf": [0.5, 0.5], "L": -1.0, "U": 2.0, "budget_per_agent": 1.0})");
    const std::string out = work_dir() + "/reg_design.json";
    ASSERT_EQ(run("design-regression --config " + cfg + " --out " + out), 0);
    const json j = json::parse(slurp(out));
    EXPECT_EQ(j.at("kind"), "regression");
    EXPECT_NEAR(j.at("probs")[0].get<double>(), 0.448, 2e-3);
    EXPECT_EQ(run("verify --config " + out), 0);
}

TEST(CliSimulate, DeterministicCsv) {
    const std::string a = work_dir() + "/sim_a.csv";
    const std::string b = work_dir() + "/sim_b.csv";
    const std::string args =
        "simulate --config " + intro_design() + " --n 500 --reps 20 --seed 7 --out ";
    ASSERT_EQ(run(args + a), 0);
    ASSERT_EQ(run(args + b), 0);
    const std::string ca = slurp(a), cb = slurp(b);
    EXPECT_FALSE(ca.empty());
    EXPECT_EQ(ca, cb);
    EXPECT_EQ(ca.substr(0, ca.find('\n')), "rep,estimate_1,spend");
}

TEST(CliSimulate, SummaryTracksPrediction) {
    const std::string log = work_dir() + "/sim_summary.json";
    ASSERT_EQ(run("simulate --config " + intro_design() + " --n 2000 --reps 200 --seed 11", log),
              0);
    const json j = json::parse(slurp(log));
    EXPECT_NEAR(j.at("predicted_value").get<double>(), 0.3125, 1e-9);
    EXPECT_NEAR(j.at("empirical_variance_scaled").get<double>(), 0.3125, 0.15 * 0.3125);
    EXPECT_NEAR(j.at("mean_spend_per_agent").get<double>(), 7.0, 0.3);
}

TEST(CliMenu, PrintsTableAndCsv) {
    const std::string log = work_dir() + "/menu.txt";
    const std::string csv = work_dir() + "/menu.csv";
    ASSERT_EQ(run("menu --design " + intro_design() + " --out " + csv, log), 0);
    EXPECT_NE(slurp(log).find("price"), std::string::npos);
    std::istringstream lines(slurp(csv));
    std::string header, row1, row2;
    std::getline(lines, header);
    std::getline(lines, row1);
    std::getline(lines, row2);
    EXPECT_EQ(header, "price,probability");
    EXPECT_NEAR(std::stod(row1), 7.2, 1e-9);
    EXPECT_NEAR(std::stod(row1.substr(row1.find(',') + 1)), 1.0, 1e-9);
    EXPECT_NEAR(std::stod(row2), 8.0, 1e-9);
    EXPECT_NEAR(std::stod(row2.substr(row2.find(',') + 1)), 0.8, 1e-9);
}

TEST(CliCurve, BudgetGridCsv) {
    const std::string csv = work_dir() + "/curve.csv";
    // virtual-space prior so pool_end is read off the design directly
    const std::string prior = write_file(
        "curve_prior.json", R"({"costs": [1.0, 4.0], "pmf": [0.5, 0.5]})");
    ASSERT_EQ(run("curve --config " + prior + " --budget-grid 0.3,0.6,1.2,2.0,3.0 --out " + csv),
              0);
    std::istringstream lines(slurp(csv));
    std::string line;
    std::getline(lines, line);
    EXPECT_EQ(line, "budget,value,t_star,pooled_level,alpha");
    long prev_pool = -1;
    double prev_value = 1e300;
    int rows = 0;
    while (std::getline(lines, line)) {
        std::stringstream ss(line);
        std::string budget, value, pool;
        std::getline(ss, budget, ',');
        std::getline(ss, value, ',');
        std::getline(ss, pool, ',');
        EXPECT_GE(std::stol(pool), prev_pool);  // pooling grows with the budget
        prev_pool = std::stol(pool);
        EXPECT_LE(std::stod(value), prev_value + 1e-12);  // value falls with the budget
        prev_value = std::stod(value);
        ++rows;
    }
    EXPECT_EQ(rows, 5);
    EXPECT_EQ(prev_pool, 2);  // budget 3.0 > E[c]: everyone pooled at 1
}

TEST(CliDiscretize, RoundTripsIntoDesign) {
    const std::string prior = write_file("uniform.json", R"({"family": "uniform"})");
    const std::string grid = work_dir() + "/grid.json";
    ASSERT_EQ(run("discretize --config " + prior + " --eps 0.1 --out " + grid), 0);
    const json j = json::parse(slurp(grid));
    ASSERT_EQ(j.at("costs").size(), 10u);
    EXPECT_NEAR(j.at("pmf")[0].get<double>(), 0.1, 1e-12);
    // the gridded prior feeds straight back into the design pipeline
    EXPECT_EQ(run("design-moment --config " + grid + " --budget 0.3 --space virtual"), 0);
    // discretize refuses discrete priors
    EXPECT_EQ(run("discretize --config " + intro_prior() + " --eps 0.1"), 2);
}

TEST(CliOracle, ReportsBothValues) {
    const std::string log = work_dir() + "/oracle.txt";
    const std::string prior = write_file(
        "oracle_prior.json", R"({"costs": [1.0, 4.0], "pmf": [0.5, 0.5]})");
    ASSERT_EQ(run("oracle --config " + prior + " --budget 0.6 --step 0.02", log), 0);
    const std::string text = slurp(log);
    EXPECT_NE(text.find("oracle="), std::string::npos);
    EXPECT_NE(text.find("closed_form="), std::string::npos);
}
