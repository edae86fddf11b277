#include "sheq/special_functions.hpp"

#include <cmath>
#include <limits>

namespace sheq {

double floor_to_grid(double t, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("floor_to_grid: h must be positive");
    const double q = t / h;
    const double nearest = std::round(q);
    // Exact multiples of h rarely divide to an exact integer in floating
    // point; snap within 4 ulps and return t unchanged so multiples map to
    // themselves and the operation is idempotent.
    const double mag = std::abs(q);
    const double ulp = std::nextafter(mag, std::numeric_limits<double>::infinity()) - mag;
    if (std::abs(q - nearest) <= 4.0 * ulp) return t;
    return std::floor(q) * h;
}

double GronwallEnvelope::value(double x) const {
    if (!(r > 0.0) || r > 1.0) throw std::invalid_argument("GronwallEnvelope: index must lie in (0,1]");
    if (x < 0.0) throw std::invalid_argument("GronwallEnvelope: argument must be nonnegative");
    if (x == 0.0) return 1.0;

    const double log_x2 = 2.0 * std::log(x);
    const double log_gamma_r = std::lgamma(r);

    // Direct summation while the terms fit in double; the term magnitudes
    // rise and then decay since Gamma(nr+1) eventually dominates x^{2n}.
    if (r == 1.0) {
        // Gamma(n+1) = n!, so the exact ratio recurrence applies.
        double sum = 1.0, term = 1.0;
        const double x2 = x * x;
        for (int n = 1; n <= max_terms; ++n) {
            term *= x2 / static_cast<double>(n);
            sum += term;
            if (term < tolerance * sum) return std::sqrt(sum);
        }
        throw SeriesOverflow("generalized exponential series did not converge (r=1, x=" + std::to_string(x) + ")");
    }

    double sum = 1.0;
    double prev_log_term = 0.0;
    bool log_mode = false;
    double log_sum = 0.0; // valid when log_mode
    for (int n = 1; n <= max_terms; ++n) {
        const double log_term = static_cast<double>(n) * (log_x2 + log_gamma_r) - std::lgamma(static_cast<double>(n) * r + 1.0);
        if (!log_mode) {
            if (log_term > 690.0) { // partial terms would exceed ~1e300
                log_mode = true;
                log_sum = std::log(sum);
            } else {
                const double term = std::exp(log_term);
                sum += term;
                if (log_term < prev_log_term && term < tolerance * sum) return std::sqrt(sum);
            }
        }
        if (log_mode) {
            const double m = std::max(log_sum, log_term);
            log_sum = m + std::log(std::exp(log_sum - m) + std::exp(log_term - m));
            if (log_term < prev_log_term && log_term < std::log(tolerance) + log_sum)
                return std::exp(0.5 * log_sum);
        }
        prev_log_term = log_term;
    }
    throw SeriesOverflow("generalized exponential series did not converge within max_terms (r=" +
                         std::to_string(r) + ", x=" + std::to_string(x) + ")");
}

double generalized_exponential(double r, double x) {
    GronwallEnvelope env;
    env.r = r;
    return env.value(x);
}

double smoothing_constant(double r, const OperatorSpec& op) {
    if (r < 0.0 || r > 1.0) throw std::invalid_argument("smoothing_constant: r must lie in [0,1]");
    const double T = op.horizon;
    double sup_regularize = 0.0; // sup_t t^r ||(eta-A)^r e^{tA}||
    double sup_holder = 0.0;     // sup_t t^{-r} ||(eta-A)^{-r}(e^{tA} - Id)||
    for (int k = 1; k <= op.mode_count; ++k) {
        const double lam = op.eigenvalue(k);
        const double mu = op.shifted_eigenvalue(k);
        double s1;
        if (r == 0.0) {
            s1 = 1.0; // e^{-lam t} -> 1 as t -> 0
        } else if (r / lam <= T) {
            // interior maximum of t^r e^{-lam t} at t = r/lam
            s1 = std::pow(mu / lam, r) * std::pow(r / std::exp(1.0), r);
        } else {
            s1 = std::pow(T, r) * std::pow(mu, r) * std::exp(-lam * T);
        }
        sup_regularize = std::max(sup_regularize, s1);

        // (1 - e^{-lam t}) / ((mu t)^r ... ) has no closed-form max; scan a log grid.
        double s2 = 0.0;
        const int n_grid = 256;
        for (int i = 0; i <= n_grid; ++i) {
            const double t = T * std::pow(1e-8, 1.0 - static_cast<double>(i) / n_grid);
            const double val = -std::expm1(-lam * t) / (std::pow(mu, r) * std::pow(t, r));
            s2 = std::max(s2, val);
        }
        sup_holder = std::max(sup_holder, s2);
    }
    return std::max({1.0, sup_regularize, sup_holder});
}

double bdg_constant(double p, UpsilonPolicy policy) {
    if (p < 2.0) throw std::invalid_argument("bdg_constant: p must be >= 2");
    switch (policy) {
        case UpsilonPolicy::Ito:
            if (p != 2.0)
                throw std::invalid_argument("bdg_constant: the Ito policy is valid only for p = 2");
            return 1.0;
        case UpsilonPolicy::Bdg:
            return std::sqrt(p * (p - 1.0) / 2.0);
    }
    throw std::logic_error("bdg_constant: unknown policy");
}

const char* to_string(UpsilonPolicy policy) {
    return policy == UpsilonPolicy::Ito ? "ito" : "bdg";
}

} // namespace sheq
