#pragma once

// Scalar special functions and discretization utilities: the generalized
// exponential series E_r, grid-floor, smoothing constants of the diagonal
// semigroup, and the stochastic-integral constant policy.

#include <map>
#include <stdexcept>
#include <string>

#include "sheq/spectral.hpp"

namespace sheq {

/// Largest grid point n*h <= t, n integer (negative multiples included).
/// Multiples of h within 4 ulps of t/h snap to themselves.
double floor_to_grid(double t, double h);

/// Series parameters for the growth envelope E_r.
struct GronwallEnvelope {
    double r = 1.0;            // index in (0,1]
    double tolerance = 1e-14;  // relative truncation tolerance
    int max_terms = 10000;

    /// E_r(x) = [ sum_n x^{2n} Gamma(r)^n / Gamma(nr+1) ]^{1/2}, x >= 0.
    double value(double x) const;
};

/// Thrown when the envelope series has not decayed within max_terms.
struct SeriesOverflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Convenience wrapper: E_r(x) with default series parameters.
double generalized_exponential(double r, double x);

/// max{1, sup_t t^r ||(eta-A)^r e^{tA}||, sup_t t^{-r} ||(eta-A)^{-r}(e^{tA}-Id)||}
/// on the truncation, r in [0,1].  Collapses to 1 for eta = 0.
double smoothing_constant(double r, const OperatorSpec& op);

enum class UpsilonPolicy { Ito, Bdg };

/// Constant bounding ||int X dW||_{L^p} by the square-integral of X.
/// Ito: exact value 1, valid only for p = 2.  Bdg: sqrt(p(p-1)/2), a
/// conservative admissible upper bound for p >= 2.
double bdg_constant(double p, UpsilonPolicy policy);

const char* to_string(UpsilonPolicy policy);

/// Evaluated constants with provenance notes, as itemized in bound reports.
struct ConstantSet {
    std::map<double, double> chi;      // r -> smoothing constant
    std::map<double, double> upsilon;  // p -> stochastic-integral constant
    std::map<std::string, std::string> provenance;
};

} // namespace sheq
