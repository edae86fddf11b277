#pragma once

// Closed-form ground truth for the additive-noise case (f = 0, b = const,
// xi = 0): per-mode Gaussian laws of the mild solution and of each scheme,
// exact weak functional values, and the exact coupled strong error.
//
// Derivation notes (re-derived per mode with lambda = pi^2 k^2, h = T/N):
//   mild:      x_t = c int_0^t e^{-lambda(t-s)} dbeta,
//              Var = c^2 (1 - e^{-2 lambda t}) / (2 lambda).
//   expEuler:  y <- e^{-lambda h}(y + c dbeta),
//              Var recursion v <- e^{-2 lambda h}(v + c^2 h), geometric sum.
//   implicit:  y <- (y + c dbeta)/(1 + h lambda), v <- (v + c^2 h)/(1+h lambda)^2.
//   coupled:   d <- e^{-lambda h} d + c int_0^h (e^{-lambda(h-s)} - e^{-lambda h}) dbeta,
//              per-step integral in closed form (independent of the past).

#include <vector>

#include "sheq/spectral.hpp"

namespace sheq {

enum class OuSchemeKind { ExpEuler, LinearImplicitEuler };

struct OUSpec {
    double T = 1.0;
    int mode_count = 1;        // M
    double amplitude = 1.0;    // c with b == c
    OuSchemeKind kind = OuSchemeKind::ExpEuler;
    long steps = 1;            // N, when scheme statistics are requested
};

/// Variance of mode k of the mild solution at time T.
double ou_mild_variance(int k, double T, double amplitude = 1.0);

/// Variance of mode k of the scheme value Y_N.
double ou_scheme_variance(int k, double T, long N, OuSchemeKind kind, double amplitude = 1.0);

enum class OuLaw { Mild, Scheme };

/// E exp(-||X||_{L^2}^2) = prod_k (1 + 2 var_k)^{-1/2}, evaluated in log space.
/// Only the exp_neg_l2sq functional is supported.
double ou_weak_value(const OUSpec& spec, OuLaw which);

/// Exact coupled mean-square distance  E||Y_N - X_T||_{L^2}^2  for ExpEuler.
double ou_strong_error(const OUSpec& spec);

} // namespace sheq
