#pragma once

// Finite spectral-Galerkin representation of the Dirichlet Laplacian on (0,1).
//
// Everything lives in the span of the first M sine eigenfunctions
// e_k(x) = sqrt(2) sin(k pi x), with A e_k = -pi^2 k^2 e_k.  The semigroup
// and fractional powers act diagonally, pointwise nonlinearities are
// evaluated on a dealiased collocation grid and projected back.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sheq {

inline constexpr double kPi = 3.14159265358979323846;

/// Diagonalized operator eta - A on the M-mode truncation over horizon T.
struct OperatorSpec {
    int mode_count = 1;   // M >= 1
    double shift = 0.0;   // eta; eta + pi^2 k^2 > 0 required for fractional powers
    double horizon = 1.0; // T > 0

    OperatorSpec() = default;
    OperatorSpec(int M, double T, double eta = 0.0);

    /// pi^2 k^2 for 1 <= k <= M (1-based mode index).
    double eigenvalue(int k) const { return kPi * kPi * static_cast<double>(k) * static_cast<double>(k); }
    /// eta + pi^2 k^2, the diagonal entry of eta - A.
    double shifted_eigenvalue(int k) const { return shift + eigenvalue(k); }
};

/// Coefficient vector in the sine eigenbasis; value type for every process state.
struct SpectralField {
    std::vector<double> coeffs; // coeffs[k-1] multiplies e_k
    const OperatorSpec* op = nullptr;

    SpectralField() = default;
    SpectralField(const OperatorSpec& spec, std::vector<double> a);
    /// Zero field with M modes.
    static SpectralField zero(const OperatorSpec& spec);
    /// Unit coefficient on mode k (1-based), zeros elsewhere.
    static SpectralField basis(const OperatorSpec& spec, int k, double amplitude = 1.0);

    int modes() const { return static_cast<int>(coeffs.size()); }
    bool all_finite() const;
};

/// Collocation values at x_j = j/(J+1), j = 1..J.  Dirichlet endpoints are implicit zeros.
struct GridField {
    std::vector<double> values;
    int points() const { return static_cast<int>(values.size()); }
};

/// Dealiasing rule: smallest admissible grid for pointwise products of M-mode fields.
inline int dealias_points(int mode_count) { return 2 * mode_count + 1; }

/// values_j = sum_k a_k sqrt(2) sin(k pi j/(J+1)).  Requires J >= M.
GridField to_grid(const SpectralField& v, int J);

/// a_k = sqrt(2)/(J+1) sum_j values_j sin(k pi j/(J+1)), truncated to M modes.  Requires M <= J.
SpectralField from_grid(const GridField& g, const OperatorSpec& spec);

/// a_k -> exp(-pi^2 k^2 t) a_k.  Requires t >= 0.
SpectralField semigroup_apply(double t, const SpectralField& v);

/// a_k -> (eta + pi^2 k^2)^r a_k.  Negative r gives the smoothing norms V_{-r}.
SpectralField fractional_apply(double r, const SpectralField& v);

/// Graph norm of (eta-A)^r: (sum_k (eta + pi^2 k^2)^{2r} a_k^2)^{1/2}.
double norm_vr(const SpectralField& v, double r);

/// Equal-weight collocation quadrature of ||.||_{L^p(0,1)} on the dealiased grid.
/// Requires p >= 1; J defaults to the dealiasing rule.
double norm_lp(const SpectralField& v, double p, int J = 0);

/// In-place primitives used by the stepping loops (no allocation).  Small
/// (M, J) pairs run off a shared basis table; large ones fall back to a
/// Chebyshev sine recurrence with no table.
namespace detail {
void to_grid_inplace(std::span<const double> coeffs, std::span<double> values);
void from_grid_inplace(std::span<const double> values, std::span<double> coeffs);
double lp_from_values(std::span<const double> values, double p);
} // namespace detail

} // namespace sheq
