#pragma once

// Monte Carlo engine with deterministic chunked reduction, weak/strong error
// estimation under common-random-number coupling, and log-log rate fits.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sheq/model.hpp"
#include "sheq/noise.hpp"
#include "sheq/ou_oracle.hpp"
#include "sheq/schemes.hpp"

namespace sheq {

struct ErrorRow {
    long N = 0;
    double error = 0.0;
    double std_error = 0.0;
    long samples = 0;
    long aborted = 0;
};

struct ErrorTable {
    std::vector<ErrorRow> rows; // sorted by N ascending
    std::string metric;         // "weak(phi)" or "strong(p,r)"
    std::string model_fingerprint;
    int mode_count = 0;
    long fine_steps = 0;
};

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double slope_ci_halfwidth = 0.0; // ~95% from residual variance
    long fit_n_min = 0;
    long fit_n_max = 0;
    int rows_used = 0;
};

/// Least squares on (log N, log error) over rows with positive error,
/// optionally excluding the smallest `skip_smallest` N values
/// (pre-asymptotic range).  Throws on fewer than 3 usable rows.
RateFit fit_rate(const ErrorTable& table, int skip_smallest = 0);

/// Rate exponent 1 - kappa - 6 max{kappa - 1/2, 0} - eps predicted for drift
/// regularity kappa in [0, 4/7) and any eps > 0.
double predicted_exponent(double kappa, double eps);

/// Thrown when aborted samples exceed the tolerated fraction.
struct EstimationDegraded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Monte Carlo engine

struct McOptions {
    int threads = 1;
    std::size_t chunk = 64;           // fixed chunk size; reduction is over chunks
    double abort_tolerance = 0.01;    // abort fraction above which estimation fails
};

struct McResult {
    std::vector<double> sum;    // per-output sums over completed samples
    std::vector<double> sum_sq;
    long completed = 0;
    long aborted = 0;

    double mean(std::size_t i) const { return sum[i] / static_cast<double>(completed); }
    double variance(std::size_t i) const;
    double std_error(std::size_t i) const;
};

/// Evaluates `eval(sample, out)` for samples 0..samples-1 and accumulates
/// per-output sums.  Samples are processed in fixed chunks; chunk partials
/// are combined by pairwise reduction in chunk order, so the result is
/// bitwise identical for any thread count.  A DivergenceError thrown by
/// `eval` aborts that sample (counted, excluded from sums).
McResult run_mc(std::size_t samples, std::size_t n_outputs, const McOptions& opts,
                const std::function<void(std::uint64_t, std::span<double>)>& eval);

// ---------------------------------------------------------------------------
// Error estimators

/// |E phi(X_T) - E phi(Y^N_N)| by Monte Carlo; X is proxied by
/// reference_solve.  Coupled: one path drives both levels.
ErrorRow weak_error_mc(const ModelSpec& model, const OperatorSpec& op, const NoisePlan& plan,
                       long N, std::size_t samples, bool couple_to_reference,
                       const McOptions& opts);

/// Deterministic weak-error rows from the additive-noise oracle.
/// Requires f = 0, b = const and phi = exp_neg_l2sq.
ErrorTable weak_error_exact(const ModelSpec& model, const OperatorSpec& op,
                            const std::vector<long>& n_list);

struct StrongMetric {
    enum class Kind { Vr, Lp } kind = Kind::Vr;
    double r = 0.0; // V_r weight (Vr) — negative r gives smoothing norms
};

/// Coupled pathwise strong error (E ||Y^N_N - X_T||^p)^{1/p} at t = T against
/// reference_solve, standard error by the delta method.
ErrorRow strong_error_mc(const ModelSpec& model, const OperatorSpec& op, const NoisePlan& plan,
                         long N, double p, const StrongMetric& metric, std::size_t samples,
                         const McOptions& opts);

/// ||v||_{V_r} or quadrature L^p norm per StrongMetric.
double metric_norm(const SpectralField& v, const StrongMetric& metric, double p);

std::string model_fingerprint(const ModelSpec& model, const OperatorSpec& op);

} // namespace sheq
