#pragma once

// Reproducible cylindrical Wiener increments on the mode truncation.
//
// Generation is stateless and counter-based: the unit normal attached to
// (seed, sample, stream, mode k, fine step i) is a pure function of its key,
// so any thread may draw any variate at any time and coupled refinement
// levels see identical noise.  Coarse increments are balanced pairwise sums
// of their fine increments over ascending indices; the pairwise trees of two
// levels with a power-of-two step ratio nest exactly, which makes
// aggregation across levels bit-for-bit reproducible.

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "sheq/spectral.hpp"

namespace sheq {

/// Philox 4x32-10 keyed counter block cipher (the usual constants).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

struct NoisePlan {
    std::uint64_t seed = 0;
    int mode_count = 1;       // M
    long fine_steps = 1;      // N_fine
    double horizon = 1.0;     // T
    bool exact_ou = false;    // sample additive-noise convolutions from their exact law
    std::uint64_t sample = 0; // Monte Carlo sample index, owns a disjoint key subspace

    NoisePlan() = default;
    NoisePlan(std::uint64_t seed_, int M, long N_fine, double T);

    NoisePlan with_sample(std::uint64_t s) const {
        NoisePlan p = *this;
        p.sample = s;
        return p;
    }

    double fine_dt() const { return horizon / static_cast<double>(fine_steps); }

    /// Unit normal for (mode k, fine step i, stream).  Stream 0 carries the
    /// Wiener increments; stream 1 is reserved for auxiliary conditional
    /// draws (exact Ornstein-Uhlenbeck sampling).
    double unit_normal(int k, long i, unsigned stream = 0) const;

    /// Fine increment  dbeta_k^{(i)} ~ N(0, T/N_fine).
    double fine_increment(int k, long i) const { return std::sqrt(fine_dt()) * unit_normal(k, i); }
};

/// True when N >= 1 divides N_fine with a power-of-two quotient (the
/// requirement for bit-exact coupling across levels).
bool valid_refinement(long N, long N_fine);

/// Coarse increment coefficients (dbeta_1,...,dbeta_M) over coarse step n at
/// level N.  Throws std::invalid_argument ("invalid refinement") unless
/// valid_refinement(N, plan.fine_steps).
std::vector<double> increment_coeffs(const NoisePlan& plan, long N, long n);

/// Allocation-free variant; out.size() must equal plan.mode_count.
void increment_into(const NoisePlan& plan, long N, long n, std::span<double> out);

/// As increment_coeffs, wrapped as a SpectralField of op (op.mode_count must
/// equal plan.mode_count).
SpectralField increment(const NoisePlan& plan, const OperatorSpec& op, long N, long n);

/// Grid realization of the coarse increment: to_grid(increment(...), J).
GridField white_noise_grid(const NoisePlan& plan, const OperatorSpec& op, long N, long n, int J);

/// Balanced pairwise sum over a power-of-two-length range, the canonical
/// summation order for increments and their aggregation.
double pairwise_sum(const double* x, std::size_t n);

/// Per-sample materialization of the fine increments: one generator pass,
/// then every refinement level aggregates from the same values with the
/// canonical pairwise tree, bit-identical to on-demand generation.  Bounded
/// (fits() gates on M * N_fine) so large truncations keep the O(M)-per-step
/// on-demand path.
class NoiseCache {
  public:
    static bool fits(int mode_count, long fine_steps) {
        return static_cast<std::size_t>(mode_count) * static_cast<std::size_t>(fine_steps) <=
               (std::size_t{1} << 21);
    }

    /// Regenerates for the plan's sample; cheap to call once per sample.
    void fill(const NoisePlan& plan);

    bool matches(const NoisePlan& plan) const;
    double fine_increment(int k, long i) const {
        return fine_[(k - 1) * static_cast<std::size_t>(n_fine_) + i];
    }
    /// Same contract (and bit pattern) as increment_into.
    void block_into(long N, long n, std::span<double> out) const;

  private:
    std::uint64_t seed_ = 0, sample_ = 0;
    int modes_ = 0;
    long n_fine_ = 0;
    std::vector<double> fine_;
};

} // namespace sheq
