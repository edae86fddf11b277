#include <doctest.h>

#include <cmath>
#include <random>

#include "sheq/model.hpp"

using namespace sheq;

namespace {

SpectralField random_field(const OperatorSpec& op, unsigned seed, double decay = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    SpectralField v = SpectralField::zero(op);
    for (int k = 1; k <= op.mode_count; ++k) v.coeffs[k - 1] = g(rng) / std::pow(k, decay);
    return v;
}

// refine the maximum of |f^{(m)}| around a coarse-grid argmax by ternary search
double refined_sup(const ScalarFunction& f, int order, double lo, double hi) {
    double best_x = lo, best = -1.0;
    const int n = 20000;
    for (int i = 0; i <= n; ++i) {
        const double x = lo + (hi - lo) * i / n;
        const double v = std::abs(f.eval(x, order));
        if (v > best) {
            best = v;
            best_x = x;
        }
    }
    double a = best_x - (hi - lo) / n, b = best_x + (hi - lo) / n;
    for (int it = 0; it < 200; ++it) {
        const double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
        if (std::abs(f.eval(m1, order)) < std::abs(f.eval(m2, order)))
            a = m1;
        else
            b = m2;
    }
    return std::abs(f.eval(0.5 * (a + b), order));
}

} // namespace

TEST_CASE("nemytskii of the zero function is zero") {
    OperatorSpec op(8, 1.0);
    SpectralField F = nemytskii_F(ScalarFunction::zero(), random_field(op, 1));
    for (double a : F.coeffs) CHECK(a == 0.0);
}

TEST_CASE("nemytskii of a constant projects the constant function") {
    // a_k = sqrt(2)(1 - cos k pi)/(k pi); the collocation projection converges
    // to it as the grid refines (the constant is not band-limited)
    const int M = 128;
    OperatorSpec op(M, 1.0);
    SpectralField F = nemytskii_F(ScalarFunction::constant(1.0), SpectralField::zero(op));
    for (int k = 1; k <= 8; ++k) {
        const double expected = std::sqrt(2.0) * (1.0 - std::cos(k * kPi)) / (k * kPi);
        if (k % 2 == 1)
            CHECK(F.coeffs[k - 1] == doctest::Approx(expected).epsilon(2e-4));
        else
            CHECK(std::abs(F.coeffs[k - 1]) < 1e-13);
    }
}

TEST_CASE("nemytskii of sine vanishes at zero") {
    OperatorSpec op(8, 1.0);
    SpectralField F = nemytskii_F(ScalarFunction::sine(1.0, 1.0), SpectralField::zero(op));
    for (double a : F.coeffs) CHECK(std::abs(a) < 1e-15);
}

TEST_CASE("nemytskii derivative basics") {
    OperatorSpec op(8, 1.0);
    SpectralField v = random_field(op, 2);
    SpectralField u = SpectralField::basis(op, 1);

    SpectralField d = nemytskii_dF(ScalarFunction::constant(3.0), 1, v, {&u});
    for (double a : d.coeffs) CHECK(a == doctest::Approx(0.0).epsilon(1e-15));

    // f'(0) = 1, so dF(0)[e_1] = e_1
    d = nemytskii_dF(ScalarFunction::sine(1.0, 1.0), 1, SpectralField::zero(op), {&u});
    CHECK(d.coeffs[0] == doctest::Approx(1.0).epsilon(1e-12));
    for (int k = 2; k <= 8; ++k) CHECK(std::abs(d.coeffs[k - 1]) < 1e-12);
}

TEST_CASE("nemytskii derivative matches central differences at O(delta^2)") {
    OperatorSpec op(8, 1.0);
    const ScalarFunction f = ScalarFunction::sine(1.0, 1.0);
    SpectralField v = random_field(op, 3);
    SpectralField u = random_field(op, 4);
    const SpectralField exact = nemytskii_dF(f, 1, v, {&u});

    auto fd_error = [&](double delta) {
        SpectralField plus = v, minus = v;
        for (int k = 0; k < 8; ++k) {
            plus.coeffs[k] += delta * u.coeffs[k];
            minus.coeffs[k] -= delta * u.coeffs[k];
        }
        SpectralField Fp = nemytskii_F(f, plus);
        SpectralField Fm = nemytskii_F(f, minus);
        double err2 = 0.0;
        for (int k = 0; k < 8; ++k) {
            const double fd = (Fp.coeffs[k] - Fm.coeffs[k]) / (2.0 * delta);
            err2 += (fd - exact.coeffs[k]) * (fd - exact.coeffs[k]);
        }
        return std::sqrt(err2);
    };
    const double e3 = fd_error(1e-3), e4 = fd_error(1e-4);
    CHECK(e3 < 1e-4);
    CHECK(e3 / e4 == doctest::Approx(100.0).epsilon(0.3));
}

TEST_CASE("higher derivatives are consistent order by order") {
    OperatorSpec op(6, 1.0);
    const ScalarFunction f = ScalarFunction::tanh_scaled(1.0);
    SpectralField v = random_field(op, 8, 1.5);
    SpectralField u = random_field(op, 9, 1.5);
    for (int m = 2; m <= 4; ++m) {
        std::vector<const SpectralField*> dirs_m(static_cast<std::size_t>(m), &u);
        std::vector<const SpectralField*> dirs_prev(static_cast<std::size_t>(m - 1), &u);
        const SpectralField exact = nemytskii_dF(f, m, v, dirs_m);
        auto fd_error = [&](double delta) {
            SpectralField plus = v, minus = v;
            for (int k = 0; k < 6; ++k) {
                plus.coeffs[k] += delta * u.coeffs[k];
                minus.coeffs[k] -= delta * u.coeffs[k];
            }
            SpectralField Fp = nemytskii_dF(f, m - 1, plus, dirs_prev);
            SpectralField Fm = nemytskii_dF(f, m - 1, minus, dirs_prev);
            double err2 = 0.0;
            for (int k = 0; k < 6; ++k) {
                const double fd = (Fp.coeffs[k] - Fm.coeffs[k]) / (2.0 * delta);
                err2 += (fd - exact.coeffs[k]) * (fd - exact.coeffs[k]);
            }
            return std::sqrt(err2);
        };
        const double e2 = fd_error(1e-2), e3 = fd_error(1e-3);
        CHECK(e2 / e3 == doctest::Approx(100.0).epsilon(0.35));
    }
}

TEST_CASE("multiplication operator basics") {
    OperatorSpec op(8, 1.0);
    SpectralField v = random_field(op, 5);
    SpectralField w = random_field(op, 6);

    SpectralField r = multiplication_B(ScalarFunction::constant(1.0), v, w);
    for (int k = 0; k < 8; ++k) CHECK(r.coeffs[k] == doctest::Approx(w.coeffs[k]).epsilon(1e-12));

    r = multiplication_B(ScalarFunction::zero(), v, w);
    for (double a : r.coeffs) CHECK(a == 0.0);

    // b(0) = 0 annihilates every direction
    r = multiplication_B(ScalarFunction::sine(1.0, 1.0), SpectralField::zero(op), w);
    for (double a : r.coeffs) CHECK(std::abs(a) < 1e-14);
}

TEST_CASE("multiplication operator is linear in the noise argument") {
    OperatorSpec op(8, 1.0);
    const ScalarFunction b = ScalarFunction::cos_affine(1.0, 0.5);
    SpectralField v = random_field(op, 7);
    SpectralField w1 = random_field(op, 8);
    SpectralField w2 = random_field(op, 9);
    const double alpha = 1.7;

    SpectralField combo = w1;
    for (int k = 0; k < 8; ++k) combo.coeffs[k] = alpha * w1.coeffs[k] + w2.coeffs[k];
    SpectralField lhs = multiplication_B(b, v, combo);
    SpectralField r1 = multiplication_B(b, v, w1);
    SpectralField r2 = multiplication_B(b, v, w2);
    for (int k = 0; k < 8; ++k)
        CHECK(lhs.coeffs[k] ==
              doctest::Approx(alpha * r1.coeffs[k] + r2.coeffs[k]).epsilon(1e-12));
}

TEST_CASE("Hilbert-Schmidt norm of the constant multiplication operator") {
    const double beta = 0.3;
    for (int M : {16, 32}) {
        OperatorSpec op(M, 1.0);
        double expected = 0.0;
        for (int k = 1; k <= M; ++k) expected += std::pow(kPi * kPi * k * k, -2.0 * beta);
        expected = std::sqrt(expected);
        const double got = hs_norm_B(ScalarFunction::constant(1.0), SpectralField::zero(op), -beta);
        CHECK(got == doctest::Approx(expected).epsilon(1e-10));
    }
    // monotone in M (adding nonnegative terms)
    OperatorSpec op16(16, 1.0), op32(32, 1.0);
    CHECK(hs_norm_B(ScalarFunction::constant(1.0), SpectralField::zero(op16), -beta) <=
          hs_norm_B(ScalarFunction::constant(1.0), SpectralField::zero(op32), -beta));
    CHECK(hs_norm_B(ScalarFunction::zero(), SpectralField::zero(op16), -beta) == 0.0);
}

TEST_CASE("catalog derivative bounds are attained") {
    struct Case {
        ScalarFunction f;
        double lo, hi;
    };
    const Case cases[] = {
        {ScalarFunction::sine(1.3, 2.0), -4.0, 4.0},
        {ScalarFunction::cos_affine(1.0, 0.5), -4.0, 4.0},
        {ScalarFunction::tanh_scaled(0.8), -20.0, 20.0},
    };
    for (const auto& c : cases) {
        for (int m = 0; m <= 4; ++m) {
            const double sup = refined_sup(c.f, m, c.lo, c.hi);
            const double bound = c.f.derivative_bound(m);
            CHECK(sup <= bound * (1.0 + 1e-12) + 1e-12);
            CHECK(bound - sup < 1e-10);
        }
    }
    // custom tables carry a triangle-inequality bound, not necessarily attained
    const ScalarFunction custom =
        ScalarFunction::custom({{0.5, 1.0, 0.0}, {0.25, 3.0, 1.0}});
    for (int m = 0; m <= 4; ++m)
        CHECK(refined_sup(custom, m, -10.0, 10.0) <= custom.derivative_bound(m) * (1.0 + 1e-12));
}

TEST_CASE("sampled Lipschitz estimates") {
    OperatorSpec op(12, 1.0);
    ModelSpec model;
    model.f = ScalarFunction::zero();
    model.b = ScalarFunction::constant(2.0);
    model.xi = SpectralField::zero(op);

    CHECK(lip_seminorm_estimate(OperatorKind::Drift, model, op, 0.0, 16) == 0.0);
    CHECK(lip_seminorm_estimate(OperatorKind::Diffusion, model, op, 0.0, 16) == 0.0);

    model.f = ScalarFunction::sine(1.0, 1.0);
    const double est = lip_seminorm_estimate(OperatorKind::Drift, model, op, 0.0, 48);
    CHECK(est > 0.1);
    CHECK(est <= 1.0 + 1e-9); // |f'| <= 1 and the r=0 embedding constant is 1
}

TEST_CASE("multiplier embedding constant") {
    OperatorSpec op(16, 1.0);
    const double c0 = multiplier_embedding_constant(op, 0.0);
    const double c1 = multiplier_embedding_constant(op, -0.26);
    const double c2 = multiplier_embedding_constant(op, -0.5);
    CHECK(c0 > 0.0);
    CHECK(c1 > 0.0);
    CHECK(c1 < c0 * (1.0 + 1e-12));
    CHECK(c2 < c1);
    CHECK_THROWS_AS(multiplier_embedding_constant(op, 0.5), std::invalid_argument);
}
