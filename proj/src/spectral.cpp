#include "sheq/spectral.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace sheq {

OperatorSpec::OperatorSpec(int M, double T, double eta)
    : mode_count(M), shift(eta), horizon(T) {
    if (M < 1) throw std::invalid_argument("OperatorSpec: mode_count must be >= 1");
    if (!(T > 0.0)) throw std::invalid_argument("OperatorSpec: horizon must be positive");
    // eta + pi^2 k^2 > 0 for all k is needed for fractional powers; k=1 is the worst case.
    if (!(eta + kPi * kPi > 0.0))
        throw std::invalid_argument("OperatorSpec: shift leaves nonpositive spectrum of eta - A");
}

SpectralField::SpectralField(const OperatorSpec& spec, std::vector<double> a)
    : coeffs(std::move(a)), op(&spec) {
    if (static_cast<int>(coeffs.size()) != spec.mode_count)
        throw std::invalid_argument("SpectralField: coefficient count differs from mode_count");
}

SpectralField SpectralField::zero(const OperatorSpec& spec) {
    return SpectralField(spec, std::vector<double>(spec.mode_count, 0.0));
}

SpectralField SpectralField::basis(const OperatorSpec& spec, int k, double amplitude) {
    if (k < 1 || k > spec.mode_count)
        throw std::invalid_argument("SpectralField::basis: mode index out of range");
    auto v = zero(spec);
    v.coeffs[k - 1] = amplitude;
    return v;
}

bool SpectralField::all_finite() const {
    for (double a : coeffs)
        if (!std::isfinite(a)) return false;
    return true;
}

namespace detail {

namespace {

// Shared basis tables: row k holds sqrt(2) sin(k pi j/(J+1)), j = 1..J.
// Bounded so huge truncations (which never transform in hot loops) fall back
// to the tableless recurrence.
constexpr std::size_t kTableCap = std::size_t{1} << 22; // entries (32 MiB)

struct SineTable {
    int M, J;
    std::vector<double> rows; // M x J

    SineTable(int M_, int J_) : M(M_), J(J_), rows(static_cast<std::size_t>(M_) * J_) {
        const double root2 = std::sqrt(2.0);
        for (int k = 1; k <= M; ++k)
            for (int j = 1; j <= J; ++j)
                rows[(k - 1) * static_cast<std::size_t>(J) + (j - 1)] =
                    root2 * std::sin(kPi * k * j / static_cast<double>(J + 1));
    }
};

const SineTable* shared_table(int M, int J) {
    if (static_cast<std::size_t>(M) * static_cast<std::size_t>(J) > kTableCap) return nullptr;
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::unique_ptr<SineTable>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[{M, J}];
    if (!slot) slot = std::make_unique<SineTable>(M, J);
    return slot.get();
}

} // namespace

// Tableless path: Chebyshev recurrence sin((k+1)t) = 2cos(t) sin(kt) - sin((k-1)t),
// two flops per (k,j).

void to_grid_inplace(std::span<const double> coeffs, std::span<double> values) {
    const int M = static_cast<int>(coeffs.size());
    const int J = static_cast<int>(values.size());
    if (const SineTable* tbl = shared_table(M, J)) {
        for (int j = 0; j < J; ++j) values[j] = 0.0;
        for (int k = 0; k < M; ++k) {
            const double a = coeffs[k];
            if (a == 0.0) continue;
            const double* row = &tbl->rows[static_cast<std::size_t>(k) * J];
            for (int j = 0; j < J; ++j) values[j] += a * row[j];
        }
        return;
    }
    const double root2 = std::sqrt(2.0);
    for (int j = 1; j <= J; ++j) {
        const double theta = kPi * static_cast<double>(j) / static_cast<double>(J + 1);
        const double c = 2.0 * std::cos(theta);
        double s_prev = 0.0;
        double s = std::sin(theta);
        double acc = 0.0;
        for (int k = 0; k < M; ++k) {
            acc += coeffs[k] * s;
            const double s_next = c * s - s_prev;
            s_prev = s;
            s = s_next;
        }
        values[j - 1] = root2 * acc;
    }
}

void from_grid_inplace(std::span<const double> values, std::span<double> coeffs) {
    const int M = static_cast<int>(coeffs.size());
    const int J = static_cast<int>(values.size());
    const double scale = std::sqrt(2.0) / static_cast<double>(J + 1);
    if (const SineTable* tbl = shared_table(M, J)) {
        // rows carry sqrt(2), so sum(v . row) = sqrt(2) sum(v sin) and the
        // definition's sqrt(2)/(J+1) collapses to 1/(J+1)
        const double inv = 1.0 / static_cast<double>(J + 1);
        for (int k = 0; k < M; ++k) {
            const double* row = &tbl->rows[static_cast<std::size_t>(k) * J];
            double acc = 0.0;
            for (int j = 0; j < J; ++j) acc += values[j] * row[j];
            coeffs[k] = acc * inv;
        }
        return;
    }
    for (int k = 0; k < M; ++k) coeffs[k] = 0.0;
    for (int j = 1; j <= J; ++j) {
        const double theta = kPi * static_cast<double>(j) / static_cast<double>(J + 1);
        const double c = 2.0 * std::cos(theta);
        const double w = scale * values[j - 1];
        double s_prev = 0.0;
        double s = std::sin(theta);
        for (int k = 0; k < M; ++k) {
            coeffs[k] += w * s;
            const double s_next = c * s - s_prev;
            s_prev = s;
            s = s_next;
        }
    }
}

double lp_from_values(std::span<const double> values, double p) {
    const int J = static_cast<int>(values.size());
    double acc = 0.0;
    const long ip = std::lround(p);
    if (static_cast<double>(ip) == p && ip >= 1 && ip <= 16) {
        for (double v : values) {
            double term = std::abs(v);
            double pw = 1.0;
            for (long i = 0; i < ip; ++i) pw *= term;
            acc += pw;
        }
    } else {
        for (double v : values) acc += std::pow(std::abs(v), p);
    }
    return std::pow(acc / static_cast<double>(J + 1), 1.0 / p);
}

} // namespace detail

GridField to_grid(const SpectralField& v, int J) {
    if (J < v.modes()) throw std::invalid_argument("to_grid: J must be >= mode count");
    GridField g;
    g.values.resize(J);
    detail::to_grid_inplace(v.coeffs, g.values);
    return g;
}

SpectralField from_grid(const GridField& g, const OperatorSpec& spec) {
    if (spec.mode_count > g.points())
        throw std::invalid_argument("from_grid: mode count must be <= grid size");
    SpectralField v = SpectralField::zero(spec);
    detail::from_grid_inplace(g.values, v.coeffs);
    return v;
}

SpectralField semigroup_apply(double t, const SpectralField& v) {
    if (t < 0.0) throw std::invalid_argument("semigroup_apply: t must be nonnegative");
    SpectralField out = v;
    for (int k = 1; k <= v.modes(); ++k)
        out.coeffs[k - 1] *= std::exp(-v.op->eigenvalue(k) * t);
    return out;
}

SpectralField fractional_apply(double r, const SpectralField& v) {
    SpectralField out = v;
    for (int k = 1; k <= v.modes(); ++k) {
        const double mu = v.op->shifted_eigenvalue(k);
        if (!(mu > 0.0)) throw std::domain_error("fractional_apply: nonpositive eigenvalue of eta - A");
        out.coeffs[k - 1] *= std::pow(mu, r);
    }
    return out;
}

double norm_vr(const SpectralField& v, double r) {
    double acc = 0.0;
    for (int k = 1; k <= v.modes(); ++k) {
        const double w = std::pow(v.op->shifted_eigenvalue(k), 2.0 * r);
        acc += w * v.coeffs[k - 1] * v.coeffs[k - 1];
    }
    return std::sqrt(acc);
}

double norm_lp(const SpectralField& v, double p, int J) {
    if (p < 1.0) throw std::invalid_argument("norm_lp: p must be >= 1");
    if (J == 0) J = dealias_points(v.modes());
    if (J < v.modes()) throw std::invalid_argument("norm_lp: quadrature grid too small");
    GridField g = to_grid(v, J);
    return detail::lp_from_values(g.values, p);
}

} // namespace sheq
