#include <doctest.h>

#include <cmath>

#include "sheq/ou_oracle.hpp"

using namespace sheq;

TEST_CASE("mild variance closed form") {
    // k=1, T=1, c=1: (1 - e^{-2 pi^2})/(2 pi^2)
    const double expected = (1.0 - std::exp(-2.0 * kPi * kPi)) / (2.0 * kPi * kPi);
    CHECK(ou_mild_variance(1, 1.0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(ou_mild_variance(1, 1.0) == doctest::Approx(0.050661).epsilon(1e-4));
    // stationary limit and degenerate horizon
    CHECK(ou_mild_variance(3, 1e3) ==
          doctest::Approx(1.0 / (2.0 * kPi * kPi * 9.0)).epsilon(1e-12));
    CHECK(ou_mild_variance(2, 0.0) == 0.0);
}

TEST_CASE("scheme variance: single step and consistency") {
    const double T = 1.0;
    const double lam = kPi * kPi;
    // N=1: c^2 h e^{-2 lam h}
    CHECK(ou_scheme_variance(1, T, 1, OuSchemeKind::ExpEuler) ==
          doctest::Approx(T * std::exp(-2.0 * lam * T)).epsilon(1e-12));
    // N -> infinity recovers the mild variance; the gap is O(lam T/N),
    // so 1e-8 relative needs N beyond 2^30 (closed form, cheap)
    const double mild = ou_mild_variance(1, T);
    CHECK(ou_scheme_variance(1, T, 1L << 20, OuSchemeKind::ExpEuler) ==
          doctest::Approx(mild).epsilon(2e-5));
    CHECK(ou_scheme_variance(1, T, 1L << 33, OuSchemeKind::ExpEuler) ==
          doctest::Approx(mild).epsilon(1e-8));
    CHECK(ou_scheme_variance(1, T, 1L << 20, OuSchemeKind::LinearImplicitEuler) ==
          doctest::Approx(mild).epsilon(2e-5));
}

TEST_CASE("high-mode deficit in the stiff regime") {
    const double T = 1.0;
    const long N = 4;
    const int k = 50;
    const double lam = kPi * kPi * k * k;
    const double h = T / static_cast<double>(N);
    const double s = ou_scheme_variance(k, T, N, OuSchemeKind::ExpEuler);
    CHECK(s == doctest::Approx(h * std::exp(-2.0 * lam * h)).epsilon(1e-10));
    CHECK(s < 0.01 * ou_mild_variance(k, T));
}

TEST_CASE("weak functional value") {
    OUSpec spec;
    spec.T = 1.0;
    spec.mode_count = 1;
    spec.amplitude = 1.0;
    const double v1 = ou_mild_variance(1, 1.0);
    CHECK(ou_weak_value(spec, OuLaw::Mild) ==
          doctest::Approx(1.0 / std::sqrt(1.0 + 2.0 * v1)).epsilon(1e-12));
    CHECK(ou_weak_value(spec, OuLaw::Mild) == doctest::Approx(0.95289).epsilon(1e-4));

    spec.amplitude = 0.0;
    CHECK(ou_weak_value(spec, OuLaw::Mild) == 1.0);

    // product over modes equals the product of single-mode factors
    OUSpec multi;
    multi.mode_count = 3;
    double prod = 1.0;
    for (int k = 1; k <= 3; ++k) prod *= 1.0 / std::sqrt(1.0 + 2.0 * ou_mild_variance(k, 1.0));
    CHECK(ou_weak_value(multi, OuLaw::Mild) == doctest::Approx(prod).epsilon(1e-14));
}

TEST_CASE("scheme weak value dominates the mild value") {
    OUSpec spec;
    spec.mode_count = 64;
    spec.kind = OuSchemeKind::ExpEuler;
    const double mild = ou_weak_value(spec, OuLaw::Mild);
    for (long N : {2L, 8L, 32L, 128L}) {
        spec.steps = N;
        CHECK(ou_weak_value(spec, OuLaw::Scheme) >= mild);
        // per-mode variance deficit: h e^{-2 lam h}/(1 - e^{-2 lam h}) <= 1/(2 lam)
        for (int k = 1; k <= 64; k += 7)
            CHECK(ou_scheme_variance(k, spec.T, N, OuSchemeKind::ExpEuler) <=
                  ou_mild_variance(k, spec.T) * (1.0 + 1e-12));
    }
}

TEST_CASE("coupled strong error") {
    OUSpec spec;
    spec.mode_count = 16;
    spec.steps = 8;
    spec.amplitude = 0.0;
    CHECK(ou_strong_error(spec) == 0.0);

    // per-step variance contribution shrinks like O(h^3 lam^2) for lam h -> 0
    auto one_step = [](double lam, double h) {
        const double eh = std::exp(-lam * h);
        return (1.0 - eh * eh) / (2.0 * lam) - 2.0 * eh * (1.0 - eh) / lam + h * eh * eh;
    };
    const double lam = kPi * kPi;
    CHECK(one_step(lam, 1e-4) / one_step(lam, 5e-5) == doctest::Approx(8.0).epsilon(0.05));
    CHECK(one_step(lam, 1e-4) == doctest::Approx(lam * lam * 1e-12 / 3.0).epsilon(0.02));
}
