#include "sheq/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace sheq {

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
        const std::array<std::uint32_t, 4> next = {
            static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
            static_cast<std::uint32_t>(p1),
            static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
            static_cast<std::uint32_t>(p0),
        };
        ctr = next;
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

NoisePlan::NoisePlan(std::uint64_t seed_, int M, long N_fine, double T)
    : seed(seed_), mode_count(M), fine_steps(N_fine), horizon(T) {
    if (M < 1) throw std::invalid_argument("NoisePlan: mode_count must be >= 1");
    if (N_fine < 1) throw std::invalid_argument("NoisePlan: fine_steps must be >= 1");
    if (!(T > 0.0)) throw std::invalid_argument("NoisePlan: horizon must be positive");
}

double NoisePlan::unit_normal(int k, long i, unsigned stream) const {
    // counter: (fine step, mode, sample lo, sample hi | stream); key: seed
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(i),
        static_cast<std::uint32_t>(k) ^ static_cast<std::uint32_t>((i >> 32) << 20),
        static_cast<std::uint32_t>(sample),
        static_cast<std::uint32_t>(sample >> 32) ^ (stream << 24),
    };
    const std::array<std::uint32_t, 2> key = {
        static_cast<std::uint32_t>(seed),
        static_cast<std::uint32_t>(seed >> 32),
    };
    const auto r = philox4x32(ctr, key);
    const std::uint64_t a = (static_cast<std::uint64_t>(r[0]) << 32) | r[1];
    const std::uint64_t b = (static_cast<std::uint64_t>(r[2]) << 32) | r[3];
    const double u1 = (static_cast<double>(a >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = (static_cast<double>(b >> 11) + 0.5) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

bool valid_refinement(long N, long N_fine) {
    if (N < 1 || N > N_fine || N_fine % N != 0) return false;
    const long q = N_fine / N;
    return (q & (q - 1)) == 0;
}

double pairwise_sum(const double* x, std::size_t n) {
    if (n == 1) return x[0];
    const std::size_t half = n / 2;
    return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

namespace {

double block_sum(const NoisePlan& plan, int k, long lo, long len) {
    if (len == 1) return plan.fine_increment(k, lo);
    const long half = len / 2;
    return block_sum(plan, k, lo, half) + block_sum(plan, k, lo + half, half);
}

} // namespace

void increment_into(const NoisePlan& plan, long N, long n, std::span<double> out) {
    if (!valid_refinement(N, plan.fine_steps))
        throw std::invalid_argument("invalid refinement: N must divide N_fine with a power-of-two quotient");
    if (n < 0 || n >= N) throw std::invalid_argument("increment: step index out of range");
    if (static_cast<int>(out.size()) != plan.mode_count)
        throw std::invalid_argument("increment: output size must equal mode count");
    const long m = plan.fine_steps / N;
    for (int k = 1; k <= plan.mode_count; ++k) out[k - 1] = block_sum(plan, k, n * m, m);
}

std::vector<double> increment_coeffs(const NoisePlan& plan, long N, long n) {
    std::vector<double> out(plan.mode_count);
    increment_into(plan, N, n, out);
    return out;
}

SpectralField increment(const NoisePlan& plan, const OperatorSpec& op, long N, long n) {
    if (op.mode_count != plan.mode_count)
        throw std::invalid_argument("increment: operator and plan disagree on mode count");
    return SpectralField(op, increment_coeffs(plan, N, n));
}

GridField white_noise_grid(const NoisePlan& plan, const OperatorSpec& op, long N, long n, int J) {
    return to_grid(increment(plan, op, N, n), J);
}

void NoiseCache::fill(const NoisePlan& plan) {
    if (!fits(plan.mode_count, plan.fine_steps))
        throw std::invalid_argument("NoiseCache: plan too large to materialize");
    seed_ = plan.seed;
    sample_ = plan.sample;
    modes_ = plan.mode_count;
    n_fine_ = plan.fine_steps;
    fine_.resize(static_cast<std::size_t>(modes_) * n_fine_);
    for (int k = 1; k <= modes_; ++k)
        for (long i = 0; i < n_fine_; ++i)
            fine_[(k - 1) * static_cast<std::size_t>(n_fine_) + i] = plan.fine_increment(k, i);
}

bool NoiseCache::matches(const NoisePlan& plan) const {
    return seed_ == plan.seed && sample_ == plan.sample && modes_ == plan.mode_count &&
           n_fine_ == plan.fine_steps;
}

void NoiseCache::block_into(long N, long n, std::span<double> out) const {
    if (!valid_refinement(N, n_fine_))
        throw std::invalid_argument("invalid refinement: N must divide N_fine with a power-of-two quotient");
    const long m = n_fine_ / N;
    for (int k = 0; k < modes_; ++k)
        out[k] = pairwise_sum(&fine_[k * static_cast<std::size_t>(n_fine_) + n * m],
                              static_cast<std::size_t>(m));
}

} // namespace sheq
