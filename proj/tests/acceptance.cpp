// Acceptance suite: runs every headline criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion.  Exits nonzero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include "sheq/experiments.hpp"
#include "sheq/report.hpp"

using namespace sheq;
using nlohmann::json;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string out_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() / ("sheq_acceptance_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

RunOutcome run_patched(const std::string& experiment, const json& patch, const std::string& tag) {
    json j = patch;
    j["experiment"] = experiment;
    if (!j.contains("output")) j["output"] = json::object();
    j["output"]["directory"] = out_dir(tag);
    j["output"]["formats"] = {"csv", "json", "svg"};
    const Config cfg = config_from_json(j, "acceptance");
    std::ostringstream log;
    return run_experiment(cfg, log);
}

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

// 1. deterministic exact weak rate, M=4096, N in {4,...,1024}, < 10 s single-threaded
Outcome criterion1() {
    const auto t0 = std::chrono::steady_clock::now();
    const RunOutcome out = run_patched("weak-rate-exact", json::object(), "c1");
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double slope = out.summary["fit_selected"]["slope"].get<double>();
    const double r2 = out.summary["fit_selected"]["r_squared"].get<double>();
    Outcome o;
    o.pass = out.exit_code == 0 && secs < 10.0;
    o.detail = "slope=" + fmt(slope) + " in [-0.55,-0.42], r2=" + fmt(r2) +
               " >= 0.99, runtime " + fmt(secs) + "s < 10s";
    return o;
}

// 2. oracle/MC agreement at M=64, N=64, 1e5 samples
Outcome criterion2() {
    const auto t0 = std::chrono::steady_clock::now();
    const int M = 64;
    const long N = 64;
    OperatorSpec op(M, 1.0);
    ModelSpec model;
    model.f = ScalarFunction::zero();
    model.b = ScalarFunction::constant(1.0);
    model.phi = Functional::exp_neg_l2sq();
    model.xi = SpectralField::zero(op);
    // the exact reference is unbiased for any N_fine >= N; conditioning on the
    // coarse increments directly keeps the run inside the time budget
    NoisePlan plan(777, M, N, 1.0);
    plan.exact_ou = true;

    McOptions opts;
    opts.threads = 8;
    auto eval = [&](std::uint64_t s, std::span<double> out) {
        const NoisePlan sp = plan.with_sample(s);
        const SpectralField x = reference_solve(model, op, sp);
        SchemeConfig cfg{SchemeKind::ExpEuler, N, 0.0, &model, &op, sp};
        const SpectralField y = run_scheme_final(cfg);
        out[0] = model.phi(x) - model.phi(y);
        double s2 = 0.0;
        for (int k = 0; k < M; ++k) {
            const double d = x.coeffs[k] - y.coeffs[k];
            s2 += d * d;
        }
        out[1] = s2;
    };
    const McResult res = run_mc(100000, 2, opts, eval);

    OUSpec spec;
    spec.mode_count = M;
    spec.steps = N;
    const double weak_oracle =
        ou_weak_value(spec, OuLaw::Mild) - ou_weak_value(spec, OuLaw::Scheme);
    const double strong_oracle = ou_strong_error(spec);

    const double weak_gap = std::abs(res.mean(0) - weak_oracle);
    const double strong_gap = std::abs(res.mean(1) - strong_oracle);
    const double strong_rel = strong_gap / strong_oracle;
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    Outcome o;
    o.pass = weak_gap <= 3.0 * res.std_error(0) && strong_gap <= 3.0 * res.std_error(1) &&
             strong_rel <= 0.05 && secs < 120.0;
    o.detail = "weak gap " + fmt(weak_gap) + " <= 3se=" + fmt(3.0 * res.std_error(0)) +
               ", strong gap " + fmt(strong_gap) + " <= 3se=" + fmt(3.0 * res.std_error(1)) +
               ", rel " + fmt(100.0 * strong_rel) + "% <= 5%, runtime " + fmt(secs) + "s < 120s";
    return o;
}

// 3. nonlinear-diffusion weak self-convergence (slope and ratio)
Outcome criterion3() {
    const auto t0 = std::chrono::steady_clock::now();
    json patch = {{"numerics", {{"threads", 8}}}};
    const RunOutcome out = run_patched("weak-rate-mc", patch, "c3");
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double slope = out.summary["fit_selected"]["slope"].get<double>();
    Outcome o;
    o.pass = out.exit_code == 0 && secs < 1800.0;
    o.detail = "slope=" + fmt(slope) + " <= -0.35, ratio check " +
               (out.exit_code == 0 ? "ok" : "failed") + ", runtime " + fmt(secs) + "s < 1800s";
    return o;
}

// 4. a priori moment bound, p=2, ito policy, 1e4 samples
Outcome criterion4() {
    json patch = {{"bounds", {{"upsilon", "ito"}}}, {"numerics", {{"threads", 8}}}};
    const RunOutcome out = run_patched("bounds", patch, "c4");
    const auto& rep = out.summary["bound_report"];
    Outcome o;
    o.pass = out.exit_code == 0 && rep["pass"].get<bool>() && rep["margin"].get<double>() > 0.0;
    o.detail = "lhs=" + fmt(rep["lhs"].get<double>()) + " rhs=" + fmt(rep["rhs"].get<double>()) +
               " margin=" + fmt(rep["margin"].get<double>()) + " > 0";
    return o;
}

// 5. initial-condition perturbation bound, coupled, 1e4 samples
Outcome criterion5() {
    json patch = {{"numerics", {{"threads", 8}}}};
    const RunOutcome out = run_patched("perturbation", patch, "c5");
    const auto& rep = out.summary["bound_report"];
    Outcome o;
    o.pass = out.exit_code == 0 && rep["pass"].get<bool>();
    o.detail = "lhs=" + fmt(rep["lhs"].get<double>()) + " rhs=" + fmt(rep["rhs"].get<double>()) +
               " margin=" + fmt(rep["margin"].get<double>());
    return o;
}

// 6. mollification study: every kappa passes, LHS slope >= 0.1
Outcome criterion6() {
    json patch = {{"numerics", {{"threads", 8}}}};
    const RunOutcome out = run_patched("mollify-study", patch, "c6");
    bool all_pass = true;
    for (const auto& rep : out.summary["bound_reports"])
        all_pass = all_pass && rep["pass"].get<bool>();
    const double slope = out.summary["kappa_slope"].get<double>();
    Outcome o;
    o.pass = out.exit_code == 0 && all_pass && slope >= 0.1;
    o.detail = std::string("all kappa bounds ") + (all_pass ? "PASS" : "FAIL") +
               ", kappa slope=" + fmt(slope) + " >= 0.1";
    return o;
}

// 7. semilinear-integrated distance strictly decreasing at rho = 0.3
Outcome criterion7() {
    json patch = {{"numerics", {{"threads", 8}}}};
    const RunOutcome out = run_patched("strong-rate", patch, "c7");
    std::string vals;
    for (const auto& row : out.summary["table"]["rows"]) {
        if (!vals.empty()) vals += " > ";
        vals += fmt(row["error"].get<double>());
    }
    Outcome o;
    o.pass = out.exit_code == 0;
    o.detail = "distances " + vals + " (rho=0.3, N=16/32/64)";
    return o;
}

// 8. first-variation gradient check: O(delta^2) ratio in [50,200]
Outcome criterion8() {
    const RunOutcome out = run_patched("variation-check", json::object(), "c8");
    const double ratio = out.summary["fd_ratio"].get<double>();
    Outcome o;
    o.pass = out.exit_code == 0;
    o.detail = "fd ratio=" + fmt(ratio) + " in [50,200]";
    return o;
}

// 9. special functions at their stated tolerances
Outcome criterion9() {
    bool ok = true;
    std::string why;
    for (double x = 0.0; x <= 3.0 + 1e-12; x += 0.01) {
        if (std::abs(generalized_exponential(1.0, x) - std::exp(0.5 * x * x)) > 1e-12) {
            ok = false;
            why = "envelope closed form failed at x=" + fmt(x);
            break;
        }
    }
    for (double r : {0.1, 0.3, 0.5, 0.7, 0.9, 1.0})
        if (generalized_exponential(r, 0.0) != 1.0) {
            ok = false;
            why = "E_r(0) != 1";
        }
    OperatorSpec op(256, 1.0);
    for (double r = 0.0; r <= 1.0 + 1e-12; r += 0.125)
        if (std::abs(smoothing_constant(r, op) - 1.0) > 1e-12) {
            ok = false;
            why = "smoothing constant != 1 at r=" + fmt(r);
        }
    Outcome o;
    o.pass = ok;
    o.detail = ok ? "|E_1(x)-e^{x^2/2}| <= 1e-12 on [0,3]; E_r(0)=1; chi_r=1" : why;
    return o;
}

// 10. infrastructure invariants: transforms, semigroup law, bitwise reproducibility
Outcome criterion10() {
    bool ok = true;
    std::string why;

    OperatorSpec op(64, 1.0);
    std::mt19937_64 rng(314);
    std::normal_distribution<double> g(0.0, 1.0);
    SpectralField v = SpectralField::zero(op);
    for (auto& a : v.coeffs) a = g(rng);
    const SpectralField w = from_grid(to_grid(v, dealias_points(64)), op);
    for (int k = 0; k < 64; ++k)
        if (std::abs(w.coeffs[k] - v.coeffs[k]) >
            1e-12 * std::max(1.0, std::abs(v.coeffs[k]))) {
            ok = false;
            why = "transform round trip exceeded 1e-12";
        }
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 10 && ok; ++trial) {
        const double s = u(rng), t = u(rng);
        const SpectralField a = semigroup_apply(s + t, v);
        const SpectralField b = semigroup_apply(s, semigroup_apply(t, v));
        for (int k = 0; k < 64; ++k)
            if (std::abs(a.coeffs[k] - b.coeffs[k]) >
                1e-14 * std::max(1.0, std::abs(a.coeffs[k]))) {
                ok = false;
                why = "semigroup law exceeded 1e-14";
            }
    }

    std::string csv_ref;
    for (int threads : {1, 4, 8}) {
        json patch = {{"model", {{"p", 2.0}}},
                      {"numerics",
                       {{"M", 16},
                        {"N", {8, 16, 32}},
                        {"N_fine", 256},
                        {"samples", 1024},
                        {"seed", 99},
                        {"threads", threads}}},
                      {"acceptance", {{"slope_max", 10.0}, {"ratio_exponent", -10.0}}}};
        json j = patch;
        j["experiment"] = "weak-rate-mc";
        j["output"] = {{"directory", out_dir("c10_t" + std::to_string(threads))},
                       {"formats", {"csv"}}};
        const Config cfg = config_from_json(j, "acceptance");
        std::ostringstream log;
        run_experiment(cfg, log);
        const std::string csv = slurp(cfg.output_dir + "/results.csv");
        if (csv_ref.empty())
            csv_ref = csv;
        else if (csv != csv_ref) {
            ok = false;
            why = "results.csv differs across worker counts";
        }
    }

    Outcome o;
    o.pass = ok;
    o.detail = ok ? "round trip 1e-12, semigroup law 1e-14, results.csv identical for 1/4/8 workers"
                  : why;
    return o;
}

} // namespace

int main() {
    struct Entry {
        int id;
        const char* label;
        Outcome (*fn)();
    };
    const Entry entries[] = {
        {1, "exact weak rate", criterion1},
        {2, "oracle/MC agreement", criterion2},
        {3, "nonlinear weak self-convergence", criterion3},
        {4, "a priori moment bound", criterion4},
        {5, "perturbation bound", criterion5},
        {6, "mollification study", criterion6},
        {7, "semilinear-integrated distance", criterion7},
        {8, "first-variation gradient check", criterion8},
        {9, "special functions", criterion9},
        {10, "infrastructure invariants", criterion10},
    };
    int failures = 0;
    for (const auto& e : entries) {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            o = e.fn();
        } catch (const std::exception& ex) {
            o.pass = false;
            o.detail = std::string("exception: ") + ex.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] criterion %d (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", e.id,
                    e.label, o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    if (failures) std::printf("%d criterion(s) FAILED\n", failures);
    else std::printf("all 10 criteria PASSED\n");
    return failures == 0 ? 0 : 1;
}
