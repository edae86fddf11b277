#include "sheq/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>

namespace sheq {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

const json& at(const json& j, const std::string& path, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) fail(path + "." + key, "missing field");
    return *it;
}

double num(const json& j, const std::string& path, const char* key) {
    const json& v = at(j, path, key);
    if (!v.is_number()) fail(path + "." + key, "expected a number");
    return v.get<double>();
}

long integer(const json& j, const std::string& path, const char* key) {
    const json& v = at(j, path, key);
    if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
    return v.get<long>();
}

ScalarFunction parse_scalar(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object with a \"kind\" field");
    const std::string kind = at(j, path, "kind").get<std::string>();
    if (kind == "zero") return ScalarFunction::zero();
    if (kind == "constant") return ScalarFunction::constant(num(j, path, "c"));
    if (kind == "sine") return ScalarFunction::sine(num(j, path, "a"), num(j, path, "w"));
    if (kind == "cos_affine") return ScalarFunction::cos_affine(num(j, path, "c0"), num(j, path, "c1"));
    if (kind == "tanh_scaled") return ScalarFunction::tanh_scaled(num(j, path, "a"));
    if (kind == "custom") {
        std::vector<Harmonic> table;
        const json& t = at(j, path, "table");
        if (!t.is_array() || t.empty()) fail(path + ".table", "expected a nonempty array");
        for (std::size_t i = 0; i < t.size(); ++i) {
            const std::string p = path + ".table[" + std::to_string(i) + "]";
            table.push_back({num(t[i], p, "amplitude"), num(t[i], p, "frequency"),
                             t[i].contains("phase") ? num(t[i], p, "phase") : 0.0});
        }
        return ScalarFunction::custom(std::move(table));
    }
    fail(path + ".kind", "unknown scalar function kind \"" + kind + "\"");
}

SpectralField parse_field(const json& j, const std::string& path, const OperatorSpec& op) {
    SpectralField v = SpectralField::zero(op);
    if (j.is_string() && j.get<std::string>() == "zero") return v;
    if (!j.is_object() || !j.contains("modes")) fail(path, "expected \"zero\" or {\"modes\": [...]}");
    for (std::size_t i = 0; i < j["modes"].size(); ++i) {
        const std::string p = path + ".modes[" + std::to_string(i) + "]";
        const long k = integer(j["modes"][i], p, "k");
        if (k < 1 || k > op.mode_count) fail(p + ".k", "mode index out of range 1..M");
        v.coeffs[k - 1] = num(j["modes"][i], p, "coeff");
    }
    return v;
}

Functional parse_functional(const json& j, const std::string& path, const OperatorSpec& op) {
    const std::string kind = at(j, path, "kind").get<std::string>();
    if (kind == "exp_neg_l2sq") return Functional::exp_neg_l2sq();
    if (kind == "cos_inner") return Functional::cos_inner(parse_field(j, path, op));
    fail(path + ".kind", "unknown functional kind \"" + kind + "\"");
}

bool power_of_two(long q) { return q >= 1 && (q & (q - 1)) == 0; }

} // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {
        "weak-rate-exact", "weak-rate-mc",  "strong-rate",     "mollify-study",
        "bounds",          "perturbation",  "variation-check", "simulate",
    };
    return names;
}

json default_config(const std::string& experiment) {
    json base = {
        {"experiment", experiment},
        {"model",
         {{"f", {{"kind", "sine"}, {"a", 1.0}, {"w", 1.0}}},
          {"b", {{"kind", "cos_affine"}, {"c0", 1.0}, {"c1", 0.5}}},
          {"phi", {{"kind", "exp_neg_l2sq"}}},
          {"xi", {{"modes", {{{"k", 1}, {"coeff", 1.0}}}}}},
          {"T", 1.0},
          {"p", 2.0},
          {"beta", 0.26}}},
        {"numerics",
         {{"M", 64},
          {"N", {64}},
          {"N_fine", 1024},
          {"J", 0},
          {"samples", 4000},
          {"seed", 12345},
          {"threads", 1},
          {"coupled", true},
          {"exact_ou", true}}},
        {"fit", {{"skip_smallest", 0}}},
        {"bounds", {{"vartheta", nullptr}, {"upsilon", "auto"}, {"validate_hypotheses", false}}},
        {"params", json::object()},
        {"output", {{"directory", "out"}, {"formats", {"csv", "json", "svg"}}}},
        {"acceptance", json::object()},
    };

    if (experiment == "weak-rate-exact") {
        base["model"]["f"] = {{"kind", "zero"}};
        base["model"]["b"] = {{"kind", "constant"}, {"c", 1.0}};
        base["model"]["xi"] = "zero";
        base["numerics"]["M"] = 4096;
        base["numerics"]["N"] = {4, 8, 16, 32, 64, 128, 256, 512, 1024};
        base["numerics"]["N_fine"] = 1024;
        base["numerics"]["samples"] = 0;
        base["fit"]["skip_smallest"] = 1; // N=4 is pre-asymptotic; both fits are reported
        base["acceptance"] = {{"slope_min", -0.55}, {"slope_max", -0.42}, {"r2_min", 0.99}};
    } else if (experiment == "weak-rate-mc") {
        base["numerics"]["M"] = "auto";
        base["numerics"]["N"] = {8, 16, 32, 64, 128, 256, 512};
        base["numerics"]["N_fine"] = 4096;
        base["numerics"]["samples"] = 20000;
        base["model"]["p"] = 6.0;
        base["acceptance"] = {{"slope_max", -0.35}, {"ratio_exponent", 0.35}};
    } else if (experiment == "strong-rate") {
        base["numerics"]["M"] = 32;
        base["numerics"]["N"] = {16, 32, 64};
        base["numerics"]["N_fine"] = 2048;
        base["numerics"]["samples"] = 2000;
        base["params"] = {{"against", "semilinear"}, {"metric", "Vr"}, {"r", -0.3},
                          {"rate_exponent", 0.2}};
        base["acceptance"] = {{"strictly_decreasing", true}};
    } else if (experiment == "mollify-study") {
        base["numerics"]["N"] = {64};
        base["numerics"]["N_fine"] = 1024;
        base["numerics"]["samples"] = 4000;
        base["params"] = {{"kappa_list", {1.0, 0.25, 0.0625, 0.015625}}, {"rho", 0.2}};
        base["acceptance"] = {{"bound_pass", true}, {"kappa_slope_min", 0.1}};
    } else if (experiment == "bounds") {
        base["numerics"]["N"] = {64};
        base["numerics"]["N_fine"] = 1024;
        base["numerics"]["samples"] = 10000;
        base["acceptance"] = {{"bound_pass", true}};
    } else if (experiment == "perturbation") {
        base["numerics"]["N"] = {64};
        base["numerics"]["N_fine"] = 1024;
        base["numerics"]["samples"] = 10000;
        base["params"] = {{"xi2", {{"modes", {{{"k", 1}, {"coeff", 1.1}}}}}}};
        base["acceptance"] = {{"bound_pass", true}};
    } else if (experiment == "variation-check") {
        // moderate horizon: the semigroup damping at T = 1 pushes the flow
        // derivative to ~e^{-pi^2} and the delta^2 term under the rounding
        // floor of the pinned offsets
        base["model"]["T"] = 0.5;
        base["numerics"]["M"] = 32;
        base["numerics"]["N"] = {64};
        base["numerics"]["N_fine"] = 64;
        base["numerics"]["samples"] = 1;
        base["params"] = {{"deltas", {1e-3, 1e-4}}, {"direction_mode", 1}};
        base["acceptance"] = {{"fd_ratio_min", 50.0}, {"fd_ratio_max", 200.0}};
    } else if (experiment == "simulate") {
        base["numerics"]["N"] = {64};
        base["numerics"]["N_fine"] = 64;
        base["params"] = {{"scheme", "exp_euler"}, {"kappa", 0.0}};
    } else {
        std::string known;
        for (const auto& n : experiment_names()) known += (known.empty() ? "" : ", ") + n;
        throw ConfigError("experiment: unknown name \"" + experiment + "\" (valid: " + known + ")");
    }
    return base;
}

Config config_from_json(const json& user, const std::string& source_name) {
    if (!user.is_object()) throw ConfigError(source_name + ": top-level value must be an object");
    if (!user.contains("experiment") || !user["experiment"].is_string())
        throw ConfigError(source_name + ": missing string field \"experiment\"");
    const std::string experiment = user["experiment"].get<std::string>();

    json resolved = default_config(experiment);
    resolved.merge_patch(user);

    Config cfg;
    cfg.experiment = experiment;
    cfg.resolved = resolved;

    const json& numerics = resolved["numerics"];
    const json& modelj = resolved["model"];

    const double T = num(modelj, "model", "T");
    if (!(T > 0.0)) fail("model.T", "horizon must be positive");

    // N list first; M may derive from it
    const json& nlist = at(numerics, "numerics", "N");
    if (!nlist.is_array() || nlist.empty()) fail("numerics.N", "expected a nonempty array");
    for (std::size_t i = 0; i < nlist.size(); ++i) {
        if (!nlist[i].is_number_integer() || nlist[i].get<long>() < 1)
            fail("numerics.N[" + std::to_string(i) + "]", "expected a positive integer");
        cfg.n_list.push_back(nlist[i].get<long>());
    }
    std::sort(cfg.n_list.begin(), cfg.n_list.end());
    cfg.n_fine = integer(numerics, "numerics", "N_fine");
    for (std::size_t i = 0; i < cfg.n_list.size(); ++i) {
        const long N = cfg.n_list[i];
        if (cfg.n_fine % N != 0)
            fail("numerics.N[" + std::to_string(i) + "]", "N must divide N_fine");
        if (!power_of_two(cfg.n_fine / N))
            fail("numerics.N[" + std::to_string(i) + "]",
                 "N_fine / N must be a power of two for bit-exact coupling");
    }

    int M;
    if (numerics["M"].is_string() && numerics["M"].get<std::string>() == "auto") {
        // resolve the truncation so that lambda_M * (T/N_max) >= 50
        const long n_max = cfg.n_list.back();
        M = static_cast<int>(
            std::ceil(std::sqrt(50.0 * static_cast<double>(n_max) / (kPi * kPi * T))));
        cfg.resolved["numerics"]["M"] = M;
    } else if (numerics["M"].is_number_integer()) {
        M = numerics["M"].get<int>();
    } else {
        fail("numerics.M", "expected a positive integer or \"auto\"");
        M = 0;
    }
    if (M < 1) fail("numerics.M", "mode count must be >= 1");

    cfg.op = OperatorSpec(M, T, 0.0);
    cfg.model.f = parse_scalar(modelj["f"], "model.f");
    cfg.model.b = parse_scalar(modelj["b"], "model.b");
    cfg.model.phi = parse_functional(modelj["phi"], "model.phi", cfg.op);
    cfg.model.xi = parse_field(modelj["xi"], "model.xi", cfg.op);
    cfg.model.T = T;
    cfg.model.p = num(modelj, "model", "p");
    cfg.model.beta = num(modelj, "model", "beta");
    if (cfg.model.p < 2.0) fail("model.p", "p must be >= 2");
    if (!(cfg.model.beta > 0.25) || !(cfg.model.beta < 0.5))
        fail("model.beta", "beta must lie in (1/4, 1/2)");

    cfg.grid_points = static_cast<int>(integer(numerics, "numerics", "J"));
    if (cfg.grid_points != 0 && cfg.grid_points < dealias_points(M))
        fail("numerics.J", "quadrature grid must satisfy J >= 2M+1 (or 0 for the default)");
    const long samples = integer(numerics, "numerics", "samples");
    if (samples < 0) fail("numerics.samples", "samples must be nonnegative");
    cfg.samples = static_cast<std::size_t>(samples);
    cfg.seed = static_cast<std::uint64_t>(integer(numerics, "numerics", "seed"));
    cfg.threads = static_cast<int>(integer(numerics, "numerics", "threads"));
    if (cfg.threads < 1) fail("numerics.threads", "threads must be >= 1");
    cfg.coupled = numerics["coupled"].get<bool>();
    cfg.exact_ou = numerics["exact_ou"].get<bool>();
    cfg.fit_skip_smallest = static_cast<int>(integer(resolved["fit"], "fit", "skip_smallest"));
    if (cfg.fit_skip_smallest < 0) fail("fit.skip_smallest", "must be nonnegative");

    const json& boundsj = resolved["bounds"];
    cfg.vartheta = boundsj["vartheta"].is_null() ? cfg.model.theta() : boundsj["vartheta"].get<double>();
    if (!(cfg.vartheta >= 0.0) || !(cfg.vartheta < 1.0)) fail("bounds.vartheta", "must lie in [0,1)");
    const std::string ups = boundsj["upsilon"].get<std::string>();
    if (ups == "auto")
        cfg.upsilon_policy = (cfg.model.p == 2.0) ? UpsilonPolicy::Ito : UpsilonPolicy::Bdg;
    else if (ups == "ito")
        cfg.upsilon_policy = UpsilonPolicy::Ito;
    else if (ups == "bdg")
        cfg.upsilon_policy = UpsilonPolicy::Bdg;
    else
        fail("bounds.upsilon", "expected \"auto\", \"ito\" or \"bdg\"");
    if (cfg.upsilon_policy == UpsilonPolicy::Ito && cfg.model.p != 2.0)
        fail("bounds.upsilon", "the Ito policy is valid only for p = 2");
    cfg.validate_hypotheses = boundsj["validate_hypotheses"].get<bool>();

    const json& params = resolved["params"];
    if (experiment == "mollify-study") {
        for (const auto& k : params["kappa_list"]) cfg.kappa_list.push_back(k.get<double>());
        for (std::size_t i = 0; i < cfg.kappa_list.size(); ++i)
            if (cfg.kappa_list[i] < 0.0 || cfg.kappa_list[i] > T)
                fail("params.kappa_list[" + std::to_string(i) + "]", "kappa must lie in [0, T]");
        cfg.rho = params["rho"].get<double>();
    }
    if (experiment == "strong-rate") {
        cfg.strong_against = params["against"].get<std::string>();
        if (cfg.strong_against != "reference" && cfg.strong_against != "semilinear")
            fail("params.against", "expected \"reference\" or \"semilinear\"");
        const std::string mk = params["metric"].get<std::string>();
        if (mk == "Vr")
            cfg.strong_metric.kind = StrongMetric::Kind::Vr;
        else if (mk == "Lp")
            cfg.strong_metric.kind = StrongMetric::Kind::Lp;
        else
            fail("params.metric", "expected \"Vr\" or \"Lp\"");
        cfg.strong_metric.r = params["r"].get<double>();
        cfg.rho = -cfg.strong_metric.r;
        cfg.rate_exponent = params["rate_exponent"].get<double>();
    }
    if (experiment == "variation-check") {
        for (const auto& d : params["deltas"]) cfg.delta_list.push_back(d.get<double>());
        if (cfg.delta_list.size() < 2) fail("params.deltas", "need at least two offsets");
        cfg.direction_mode = params["direction_mode"].get<int>();
        if (cfg.direction_mode < 1 || cfg.direction_mode > M)
            fail("params.direction_mode", "mode index out of range 1..M");
    }
    if (experiment == "simulate") {
        cfg.scheme = params["scheme"].get<std::string>();
        cfg.kappa = params["kappa"].get<double>();
    }

    const json& output = resolved["output"];
    cfg.output_dir = output["directory"].get<std::string>();
    if (const char* env = std::getenv("SHEQ_OUTPUT_DIR")) cfg.output_dir = env;
    for (const auto& f : output["formats"]) cfg.formats.push_back(f.get<std::string>());

    const json& acc = resolved["acceptance"];
    auto opt = [&](const char* key, double& slot) {
        if (acc.contains(key)) slot = acc[key].get<double>();
    };
    opt("slope_min", cfg.accept_slope_min);
    opt("slope_max", cfg.accept_slope_max);
    opt("r2_min", cfg.accept_r2_min);
    opt("ratio_exponent", cfg.accept_ratio_exponent);
    opt("kappa_slope_min", cfg.accept_kappa_slope_min);
    opt("fd_ratio_min", cfg.accept_fd_ratio_min);
    opt("fd_ratio_max", cfg.accept_fd_ratio_max);
    if (acc.contains("strictly_decreasing")) cfg.accept_decreasing = acc["strictly_decreasing"].get<bool>();
    if (acc.contains("bound_pass")) cfg.accept_bound_pass = acc["bound_pass"].get<bool>();

    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    json j;
    try {
        j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return config_from_json(j, path);
}

NoisePlan Config::make_plan() const {
    NoisePlan plan(seed, op.mode_count, n_fine, model.T);
    plan.exact_ou = exact_ou && model.additive();
    return plan;
}

SpectralField parse_field_json(const nlohmann::json& j, const std::string& path,
                               const OperatorSpec& op) {
    return parse_field(j, path, op);
}

} // namespace sheq
