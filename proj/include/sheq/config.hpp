#pragma once

// Experiment configuration: one structured text file per run.  User files
// are merged over per-experiment defaults, so the resolved configuration is
// always complete and is embedded verbatim in summary.json.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sheq/bounds.hpp"
#include "sheq/estimators.hpp"
#include "sheq/model.hpp"
#include "sheq/noise.hpp"

namespace sheq {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Config {
    std::string experiment;
    nlohmann::json resolved; // full merged configuration

    ModelSpec model;
    OperatorSpec op;

    std::vector<long> n_list;
    long n_fine = 1;
    int grid_points = 0; // 0 = dealias default
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    int threads = 1;
    bool coupled = true;
    bool exact_ou = true;  // honored only for additive models
    int fit_skip_smallest = 0;
    bool validate_hypotheses = false;

    double vartheta = 0.0; // defaults to 2*beta
    UpsilonPolicy upsilon_policy = UpsilonPolicy::Ito;

    // experiment-specific knobs
    std::vector<double> kappa_list;
    double rho = 0.0;
    double rate_exponent = 0.0;          // semilinear bound exponent
    std::vector<double> delta_list;      // variation-check offsets
    int direction_mode = 1;              // variation direction e_k
    std::string strong_against = "reference"; // or "semilinear"
    StrongMetric strong_metric;
    std::string scheme = "exp_euler";    // simulate
    double kappa = 0.0;                  // simulate (mollified)

    std::string output_dir = "out";
    std::vector<std::string> formats;    // csv, json, svg

    // acceptance thresholds (experiment-specific defaults; NaN disables)
    double accept_slope_min = std::nan("");
    double accept_slope_max = std::nan("");
    double accept_r2_min = std::nan("");
    double accept_ratio_exponent = std::nan("");
    double accept_kappa_slope_min = std::nan("");
    double accept_fd_ratio_min = std::nan("");
    double accept_fd_ratio_max = std::nan("");
    bool accept_decreasing = false;
    bool accept_bound_pass = false;

    NoisePlan make_plan() const;
};

/// Known experiment names, in documentation order.
const std::vector<std::string>& experiment_names();

/// Built-in defaults for one experiment (the shipped baseline configs).
nlohmann::json default_config(const std::string& experiment);

/// Parse + merge + validate.  Throws ConfigError with a field path on any
/// violation.
Config config_from_json(const nlohmann::json& user, const std::string& source_name);

/// Load a config file (JSON, comments allowed).
Config load_config(const std::string& path);

/// Field literal ("zero" or {"modes": [{"k": 1, "coeff": ...}]} ) used by
/// experiment parameters such as perturbed initial values.
SpectralField parse_field_json(const nlohmann::json& j, const std::string& path,
                               const OperatorSpec& op);

} // namespace sheq
