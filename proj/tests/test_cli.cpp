#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sheq/experiments.hpp"
#include "sheq/report.hpp"

using namespace sheq;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string temp_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() / ("sheq_test_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

} // namespace

TEST_CASE("config validation reports the offending field") {
    json j = {{"experiment", "simulate"},
              {"numerics", {{"N", {3}}, {"N_fine", 8}}}};
    try {
        config_from_json(j, "test");
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("N must divide N_fine") != std::string::npos);
        CHECK(std::string(e.what()).find("numerics.N[0]") != std::string::npos);
    }

    json pow2 = {{"experiment", "simulate"}, {"numerics", {{"N", {4}}, {"N_fine", 12}}}};
    CHECK_THROWS_AS(config_from_json(pow2, "test"), ConfigError);

    json unknown = {{"experiment", "bogus"}};
    try {
        config_from_json(unknown, "test");
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("weak-rate-exact") != std::string::npos);
    }
}

TEST_CASE("describe names the claims under test") {
    CHECK(describe_experiment("weak-rate-exact").find("1/2-eps") != std::string::npos);
    CHECK(describe_experiment("mollify-study").find("kappa^rho") != std::string::npos);
    CHECK_THROWS_AS(describe_experiment("bogus"), ConfigError);
}

TEST_CASE("auto mode count follows the resolution policy") {
    json j = {{"experiment", "weak-rate-mc"},
              {"numerics", {{"M", "auto"}, {"N", {8, 16}}, {"N_fine", 64}, {"samples", 4}}}};
    const Config cfg = config_from_json(j, "test");
    // lambda_M * (T/16) >= 50
    CHECK(cfg.op.mode_count == static_cast<int>(std::ceil(std::sqrt(50.0 * 16.0 / (kPi * kPi)))));
    CHECK(cfg.resolved["numerics"]["M"].get<int>() == cfg.op.mode_count);
}

TEST_CASE("simulate writes the exact semigroup trajectory for the unforced model") {
    json j = {{"experiment", "simulate"},
              {"model",
               {{"f", {{"kind", "zero"}}},
                {"b", {{"kind", "zero"}}},
                {"xi", {{"modes", {{{"k", 1}, {"coeff", 1.0}}, {{"k", 3}, {"coeff", -0.5}}}}}}}},
              {"numerics", {{"M", 4}, {"N", {16}}, {"N_fine", 16}}},
              {"output", {{"directory", temp_dir("simulate")}, {"formats", {"csv", "json"}}}}};
    const Config cfg = config_from_json(j, "test");
    std::ostringstream log;
    const RunOutcome out = run_experiment(cfg, log);
    CHECK(out.exit_code == 0);

    const std::string csv = slurp(cfg.output_dir + "/results.csv");
    // final row: t=1 coefficients e^{-pi^2 k^2} xi_k
    std::istringstream is(csv);
    std::string line, last;
    std::getline(is, line); // header
    CHECK(line == "t,a1,a2,a3,a4");
    while (std::getline(is, line))
        if (!line.empty()) last = line;
    std::array<double, 5> row{};
    std::sscanf(last.c_str(), "%lf,%lf,%lf,%lf,%lf", &row[0], &row[1], &row[2], &row[3], &row[4]);
    CHECK(row[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(row[1] == doctest::Approx(std::exp(-kPi * kPi)).epsilon(1e-12));
    CHECK(row[2] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(row[3] == doctest::Approx(-0.5 * std::exp(-9.0 * kPi * kPi)).epsilon(1e-12));

    const json summary = json::parse(slurp(cfg.output_dir + "/summary.json"));
    CHECK(summary["config"]["experiment"] == "simulate");
    CHECK(summary.contains("timing"));
}

TEST_CASE("uncoupled estimation runs on disjoint key subspaces") {
    json j = {{"experiment", "weak-rate-mc"},
              {"model", {{"p", 2.0}}},
              {"numerics",
               {{"M", 8},
                {"N", {8, 16, 32}},
                {"N_fine", 64},
                {"samples", 256},
                {"coupled", false}}},
              {"acceptance", {{"slope_max", 10.0}, {"ratio_exponent", -10.0}}},
              {"output", {{"directory", temp_dir("uncoupled")}, {"formats", {"json"}}}}};
    const Config cfg = config_from_json(j, "test");
    std::ostringstream log;
    const RunOutcome out = run_experiment(cfg, log);
    CHECK(out.exit_code == 0);
    for (const auto& row : out.summary["table"]["rows"]) CHECK(row["error"].get<double>() >= 0.0);
}

TEST_CASE("hypothesis validation can be promoted to an error") {
    json j = {{"experiment", "weak-rate-mc"},
              {"model", {{"p", 2.0}}},
              {"numerics", {{"M", 8}, {"N", {8, 16, 32}}, {"N_fine", 64}, {"samples", 8}}},
              {"bounds", {{"validate_hypotheses", true}}},
              {"output", {{"directory", temp_dir("hypo")}, {"formats", {"json"}}}}};
    const Config cfg = config_from_json(j, "test");
    std::ostringstream log;
    CHECK_THROWS_AS(run_experiment(cfg, log), ConfigError);
}

TEST_CASE("results are byte-identical across worker counts") {
    json base = {{"experiment", "weak-rate-mc"},
                 {"model", {{"p", 2.0}}},
                 {"numerics",
                  {{"M", 8}, {"N", {8, 16, 32}}, {"N_fine", 64}, {"samples", 512}, {"seed", 7}}},
                 {"acceptance", {{"slope_max", 10.0}, {"ratio_exponent", -10.0}}},
                 {"output", {{"formats", {"csv", "json"}}}}};
    std::string csv_ref, summary_ref;
    for (int threads : {1, 4}) {
        json j = base;
        j["numerics"]["threads"] = threads;
        j["output"]["directory"] = temp_dir("workers" + std::to_string(threads));
        const Config cfg = config_from_json(j, "test");
        std::ostringstream log;
        run_experiment(cfg, log);
        std::string csv = slurp(cfg.output_dir + "/results.csv");
        json summary = json::parse(slurp(cfg.output_dir + "/summary.json"));
        summary.erase("timing");
        summary["config"]["numerics"].erase("threads");
        summary["config"]["output"].erase("directory");
        if (csv_ref.empty()) {
            csv_ref = csv;
            summary_ref = summary.dump();
        } else {
            CHECK(csv == csv_ref);
            CHECK(summary.dump() == summary_ref);
        }
    }
}
