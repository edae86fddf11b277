#pragma once

// Time-stepping engines on the mode truncation: exponential Euler, its
// mollified variant, linear-implicit Euler, the semilinear-integrated
// companion process, the first-variation process, and reference solves.
//
// Every nonlinear evaluation is dealiased on the collocation grid and
// projected back to M modes, so all schemes share one state space and
// pathwise differences are well-defined.

#include <stdexcept>
#include <string>
#include <vector>

#include "sheq/model.hpp"
#include "sheq/noise.hpp"
#include "sheq/spectral.hpp"

namespace sheq {

enum class SchemeKind {
    ExpEuler,
    MollifiedExpEuler,
    LinearImplicitEuler,
    SemilinearIntegrated,
    Variation,
};

const char* to_string(SchemeKind kind);

struct SchemeConfig {
    SchemeKind kind = SchemeKind::ExpEuler;
    long N = 1;            // step count; must divide plan.fine_steps (pow-2 quotient)
    double kappa = 0.0;    // mollifier time, in [0, T]
    const ModelSpec* model = nullptr;
    const OperatorSpec* op = nullptr;
    NoisePlan plan;
    // optional per-sample materialization of the plan's fine increments
    // (bit-identical to on-demand generation); must match plan when set
    const NoiseCache* cache = nullptr;

    double step_size() const { return model->T / static_cast<double>(N); }
    void validate() const;
};

/// A trajectory aborted on a non-finite state, named by the offending step.
struct DivergenceError : std::runtime_error {
    long step;
    explicit DivergenceError(long n)
        : std::runtime_error("trajectory diverged at step " + std::to_string(n)), step(n) {}
};

struct Trajectory {
    std::vector<SpectralField> states; // states[n] at t_n = n T/N
    long steps() const { return static_cast<long>(states.size()) - 1; }
};

// Single steps (the contract surface; the runners below use the same kernels).
SpectralField exp_euler_step(const SpectralField& Yn, long n, const SchemeConfig& cfg);
SpectralField mollified_step(const SpectralField& Yn, long n, const SchemeConfig& cfg);
SpectralField linear_implicit_step(const SpectralField& Yn, long n, const SchemeConfig& cfg);
/// Linearization of the exponential Euler step along the base state Yn.
SpectralField variation_step(const SpectralField& Zn, const SpectralField& Yn, long n,
                             const SchemeConfig& cfg);

/// Full trajectory of an ExpEuler / MollifiedExpEuler / LinearImplicitEuler scheme.
Trajectory run_scheme(const SchemeConfig& cfg);
/// Final state only (no per-step storage).
SpectralField run_scheme_final(const SchemeConfig& cfg);

/// Semilinear-integrated companion of a driving ExpEuler trajectory at the
/// same N: exact drift convolution per step, stochastic convolution by a
/// left-point sum over the plan's fine substeps (or the exact per-mode
/// Gaussian law when plan.exact_ou is set and b is constant).
/// warn_coarse is set when the plan has no substructure (N == N_fine), where
/// the quadrature bias is maximal.
Trajectory run_semilinear_integrated(const SchemeConfig& cfg, const Trajectory& driving,
                                     bool* warn_coarse = nullptr);

/// First-variation trajectory Z with Z_0 = direction, linearized along the
/// ExpEuler base trajectory computed on the same plan.
Trajectory run_variation(const SchemeConfig& cfg, const SpectralField& direction);

/// Coupling reference for the mild solution: ExpEuler at N = plan.fine_steps;
/// for f = 0, b = const with plan.exact_ou the mild value at T is instead
/// sampled exactly from its conditional Gaussian law given the fine
/// increments (unbiased, exactly coupled).
SpectralField reference_solve(const ModelSpec& model, const OperatorSpec& op, const NoisePlan& plan,
                              const NoiseCache* cache = nullptr);

} // namespace sheq
