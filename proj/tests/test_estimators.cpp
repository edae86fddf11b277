#include <doctest.h>

#include <cmath>

#include "sheq/estimators.hpp"

using namespace sheq;

namespace {

ModelSpec nonlinear_model(const OperatorSpec& op) {
    ModelSpec m;
    m.f = ScalarFunction::sine(1.0, 1.0);
    m.b = ScalarFunction::cos_affine(1.0, 0.5);
    m.phi = Functional::exp_neg_l2sq();
    m.xi = SpectralField::basis(op, 1);
    m.T = op.horizon;
    return m;
}

ModelSpec additive_model(const OperatorSpec& op, double c) {
    ModelSpec m;
    m.f = ScalarFunction::zero();
    m.b = ScalarFunction::constant(c);
    m.phi = Functional::exp_neg_l2sq();
    m.xi = SpectralField::zero(op);
    m.T = op.horizon;
    return m;
}

} // namespace

TEST_CASE("rate fit recovers synthetic power laws exactly") {
    ErrorTable t;
    for (long N : {4L, 8L, 16L, 32L, 64L}) {
        ErrorRow r;
        r.N = N;
        r.error = std::pow(static_cast<double>(N), -0.5);
        t.rows.push_back(r);
    }
    RateFit fit = fit_rate(t);
    CHECK(fit.slope == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));

    for (auto& r : t.rows) r.error = 3.0 * std::pow(static_cast<double>(r.N), -1.0);
    fit = fit_rate(t);
    CHECK(fit.slope == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("rate fit requires three usable rows") {
    ErrorTable t;
    ErrorRow r;
    r.N = 2;
    r.error = 0.5;
    t.rows.push_back(r);
    r.N = 4;
    t.rows.push_back(r);
    CHECK_THROWS(fit_rate(t));
}

TEST_CASE("predicted exponent formula") {
    CHECK(predicted_exponent(0.0, 0.01) == doctest::Approx(0.99).epsilon(1e-15));
    CHECK(predicted_exponent(0.5, 0.01) == doctest::Approx(0.49).epsilon(1e-15));
    // approaching kappa = 4/7 with eps -> 0 drives the exponent to zero
    CHECK(std::abs(predicted_exponent(4.0 / 7.0 - 1e-10, 1e-10)) < 1e-8);
    CHECK_THROWS_AS(predicted_exponent(4.0 / 7.0, 0.01), std::out_of_range);
    CHECK_THROWS_AS(predicted_exponent(-0.1, 0.01), std::out_of_range);
    CHECK_THROWS_AS(predicted_exponent(0.1, 0.0), std::invalid_argument);
}

TEST_CASE("exact weak table is zero without noise and rejects unsupported models") {
    OperatorSpec op(16, 1.0);
    ModelSpec zero_noise = additive_model(op, 0.0);
    const ErrorTable t = weak_error_exact(zero_noise, op, {4, 8, 16});
    for (const auto& r : t.rows) {
        CHECK(r.error == 0.0);
        CHECK(r.std_error == 0.0);
    }
    ModelSpec bad = nonlinear_model(op);
    CHECK_THROWS_AS(weak_error_exact(bad, op, {4, 8}), std::invalid_argument);
}

TEST_CASE("small truncations drift to the O(1/N) per-mode bias regime") {
    // with lambda_M h << 1 every mode is resolved and the first-order
    // variance deficit dominates, so the exact weak error decays like 1/N
    OperatorSpec op(4, 1.0);
    ModelSpec model = additive_model(op, 1.0);
    const ErrorTable t = weak_error_exact(model, op, {1L << 10, 1L << 11, 1L << 12, 1L << 13});
    const RateFit fit = fit_rate(t);
    CHECK(fit.slope == doctest::Approx(-1.0).epsilon(0.02));
}

TEST_CASE("monte carlo reduction is bitwise thread-count independent") {
    OperatorSpec op(8, 1.0);
    ModelSpec model = nonlinear_model(op);
    NoisePlan plan(31, 8, 64, 1.0);
    auto eval = [&](std::uint64_t s, std::span<double> out) {
        SchemeConfig cfg{SchemeKind::ExpEuler, 16, 0.0, &model, &op, plan.with_sample(s)};
        out[0] = model.phi(run_scheme_final(cfg));
    };
    McOptions opts1;
    opts1.threads = 1;
    McOptions opts4;
    opts4.threads = 4;
    const McResult a = run_mc(500, 1, opts1, eval);
    const McResult b = run_mc(500, 1, opts4, eval);
    CHECK(a.sum[0] == b.sum[0]);
    CHECK(a.sum_sq[0] == b.sum_sq[0]);
    CHECK(a.completed == b.completed);
}

TEST_CASE("common random numbers reduce the weak-error standard error") {
    OperatorSpec op(8, 1.0);
    ModelSpec model = nonlinear_model(op);
    NoisePlan plan(7, 8, 64, 1.0);
    McOptions opts;
    const ErrorRow coupled = weak_error_mc(model, op, plan, 8, 400, true, opts);
    const ErrorRow uncoupled = weak_error_mc(model, op, plan, 8, 400, false, opts);
    CHECK(coupled.std_error < uncoupled.std_error);
}

TEST_CASE("coupled estimators vanish at the finest level") {
    OperatorSpec op(8, 1.0);
    ModelSpec model = nonlinear_model(op);
    NoisePlan plan(7, 8, 64, 1.0);
    McOptions opts;
    const ErrorRow weak = weak_error_mc(model, op, plan, 64, 50, true, opts);
    CHECK(weak.error == 0.0);
    CHECK(weak.std_error == 0.0);
    StrongMetric metric;
    const ErrorRow strong = strong_error_mc(model, op, plan, 64, 2.0, metric, 50, opts);
    CHECK(strong.error == 0.0);
}

TEST_CASE("negative-order norms weaken the strong error") {
    OperatorSpec op(8, 1.0);
    ModelSpec model = nonlinear_model(op);
    NoisePlan plan(7, 8, 64, 1.0);
    McOptions opts;
    StrongMetric flat;
    StrongMetric smooth;
    smooth.r = -0.4;
    const ErrorRow e0 = strong_error_mc(model, op, plan, 8, 2.0, flat, 300, opts);
    const ErrorRow em = strong_error_mc(model, op, plan, 8, 2.0, smooth, 300, opts);
    CHECK(em.error < e0.error);
    // ||v||_{V_-rho} <= (pi^2)^{-rho} ||v||_{V_0}
    CHECK(em.error <= std::pow(kPi * kPi, -0.4) * e0.error * (1.0 + 1e-12));
}

TEST_CASE("weak MC estimate agrees with the additive oracle") {
    const int M = 8;
    const long N = 8;
    OperatorSpec op(M, 1.0);
    ModelSpec model = additive_model(op, 1.0);
    NoisePlan plan(2026, M, 64, 1.0);
    plan.exact_ou = true;
    McOptions opts;
    opts.threads = 4;
    const ErrorRow row = weak_error_mc(model, op, plan, N, 40000, true, opts);
    OUSpec spec;
    spec.mode_count = M;
    spec.steps = N;
    const double oracle =
        std::abs(ou_weak_value(spec, OuLaw::Mild) - ou_weak_value(spec, OuLaw::Scheme));
    CHECK(std::abs(row.error - oracle) <= 3.0 * row.std_error);
}

TEST_CASE("excess aborted samples degrade the estimation") {
    McOptions opts;
    auto eval = [](std::uint64_t s, std::span<double> out) {
        if (s % 10 == 0) throw DivergenceError(static_cast<long>(s));
        out[0] = 1.0;
    };
    CHECK_THROWS_AS(run_mc(1000, 1, opts, eval), EstimationDegraded);
    opts.abort_tolerance = 0.2;
    const McResult res = run_mc(1000, 1, opts, eval);
    CHECK(res.aborted == 100);
    CHECK(res.completed == 900);
}
