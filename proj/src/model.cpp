#include "sheq/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace sheq {

// ---------------------------------------------------------------------------
// ScalarFunction catalog

ScalarFunction ScalarFunction::zero() { return ScalarFunction{}; }

ScalarFunction ScalarFunction::constant(double c) {
    ScalarFunction f;
    f.kind_ = Kind::Constant;
    f.a_ = c;
    f.name_ = "constant(" + std::to_string(c) + ")";
    return f;
}

ScalarFunction ScalarFunction::sine(double a, double w) {
    ScalarFunction f;
    f.kind_ = Kind::Sine;
    f.a_ = a;
    f.b_ = w;
    f.name_ = "sine(" + std::to_string(a) + "," + std::to_string(w) + ")";
    return f;
}

ScalarFunction ScalarFunction::cos_affine(double c0, double c1) {
    ScalarFunction f;
    f.kind_ = Kind::CosAffine;
    f.a_ = c0;
    f.b_ = c1;
    f.name_ = "cos_affine(" + std::to_string(c0) + "," + std::to_string(c1) + ")";
    return f;
}

ScalarFunction ScalarFunction::tanh_scaled(double a) {
    ScalarFunction f;
    f.kind_ = Kind::TanhScaled;
    f.a_ = a;
    f.name_ = "tanh_scaled(" + std::to_string(a) + ")";
    return f;
}

ScalarFunction ScalarFunction::custom(std::vector<Harmonic> table) {
    ScalarFunction f;
    f.kind_ = Kind::Custom;
    f.table_ = std::move(table);
    f.name_ = "custom(" + std::to_string(f.table_.size()) + " harmonics)";
    return f;
}

double ScalarFunction::eval(double x, int order) const {
    if (order < 0 || order > 4) throw std::invalid_argument("ScalarFunction: derivative order must be in 0..4");
    switch (kind_) {
        case Kind::Zero:
            return 0.0;
        case Kind::Constant:
            return order == 0 ? a_ : 0.0;
        case Kind::Sine:
            // d^m/dx^m a sin(wx) = a w^m sin(wx + m pi/2)
            return a_ * std::pow(b_, order) * std::sin(b_ * x + 0.5 * kPi * order);
        case Kind::CosAffine:
            if (order == 0) return a_ + b_ * std::cos(x);
            return b_ * std::cos(x + 0.5 * kPi * order);
        case Kind::TanhScaled: {
            const double u = std::tanh(x);
            const double s = 1.0 - u * u;
            switch (order) {
                case 0: return a_ * u;
                case 1: return a_ * s;
                case 2: return -2.0 * a_ * u * s;
                case 3: return -2.0 * a_ * s * (1.0 - 3.0 * u * u);
                case 4: return 8.0 * a_ * u * s * (2.0 - 3.0 * u * u);
            }
            return 0.0;
        }
        case Kind::Custom: {
            double acc = 0.0;
            for (const auto& h : table_)
                acc += h.amplitude * std::pow(h.frequency, order) *
                       std::sin(h.frequency * x + h.phase + 0.5 * kPi * order);
            return acc;
        }
    }
    return 0.0;
}

double ScalarFunction::derivative_bound(int order) const {
    if (order < 0 || order > 5) throw std::invalid_argument("ScalarFunction: bound order must be in 0..5");
    switch (kind_) {
        case Kind::Zero:
            return 0.0;
        case Kind::Constant:
            return order == 0 ? std::abs(a_) : 0.0;
        case Kind::Sine:
            return std::abs(a_) * std::pow(std::abs(b_), order);
        case Kind::CosAffine:
            return order == 0 ? std::abs(a_) + std::abs(b_) : std::abs(b_);
        case Kind::TanhScaled: {
            const double a = std::abs(a_);
            switch (order) {
                case 0:
                case 1:
                    return a;
                case 2:
                    // max of 2|u|(1-u^2) at u = 1/sqrt(3)
                    return a * 4.0 / (3.0 * std::sqrt(3.0));
                case 3:
                    // max of 2|(1-u^2)(1-3u^2)| at u = 0
                    return 2.0 * a;
                case 4:
                case 5: {
                    // max of 8|u(1-u^2)(2-3u^2)|; critical point u^2 = (15-sqrt(105))/30
                    const double u2 = (15.0 - std::sqrt(105.0)) / 30.0;
                    const double u = std::sqrt(u2);
                    const double m4 = 8.0 * u * (1.0 - u2) * (2.0 - 3.0 * u2);
                    if (order == 4) return a * m4;
                    // Lipschitz bound for f^{(4)}: crude sup of the 5th derivative,
                    // bounded by 16|a| (coefficient sum of the polynomial in u).
                    return 16.0 * a;
                }
            }
            return 0.0;
        }
        case Kind::Custom: {
            // triangle-inequality bound, not necessarily attained
            double acc = 0.0;
            for (const auto& h : table_) acc += std::abs(h.amplitude) * std::pow(std::abs(h.frequency), order);
            return acc;
        }
    }
    return 0.0;
}

bool ScalarFunction::is_zero() const {
    if (kind_ == Kind::Zero) return true;
    if (kind_ == Kind::Constant) return a_ == 0.0;
    return false;
}

bool ScalarFunction::is_constant() const {
    return kind_ == Kind::Zero || kind_ == Kind::Constant ||
           (kind_ == Kind::CosAffine && b_ == 0.0);
}

// ---------------------------------------------------------------------------
// Functionals

Functional Functional::exp_neg_l2sq() { return Functional{}; }

Functional Functional::cos_inner(SpectralField w) {
    Functional phi;
    phi.kind_ = Kind::CosInner;
    phi.weight_ = w.coeffs;
    phi.name_ = "cos_inner";
    return phi;
}

double Functional::operator()(const SpectralField& v) const {
    switch (kind_) {
        case Kind::ExpNegL2Sq: {
            double s = 0.0;
            for (double a : v.coeffs) s += a * a;
            return std::exp(-s);
        }
        case Kind::CosInner: {
            double s = 0.0;
            const std::size_t n = std::min(weight_.size(), v.coeffs.size());
            for (std::size_t i = 0; i < n; ++i) s += weight_[i] * v.coeffs[i];
            return std::cos(s);
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Operators

SpectralField nemytskii_F(const ScalarFunction& f, const SpectralField& v) {
    const OperatorSpec& op = *v.op;
    if (f.is_zero()) return SpectralField::zero(op);
    const int J = dealias_points(op.mode_count);
    GridField g = to_grid(v, J);
    for (double& x : g.values) x = f.eval(x);
    return from_grid(g, op);
}

SpectralField nemytskii_dF(const ScalarFunction& f, int order, const SpectralField& v,
                           const std::vector<const SpectralField*>& directions) {
    if (order < 1 || order > 4) throw std::invalid_argument("nemytskii_dF: order must be in 1..4");
    if (static_cast<int>(directions.size()) != order)
        throw std::invalid_argument("nemytskii_dF: need exactly `order` directions");
    const OperatorSpec& op = *v.op;
    const int J = dealias_points(op.mode_count);
    GridField g = to_grid(v, J);
    for (double& x : g.values) x = f.eval(x, order);
    for (const SpectralField* u : directions) {
        GridField ug = to_grid(*u, J);
        for (int j = 0; j < J; ++j) g.values[j] *= ug.values[j];
    }
    return from_grid(g, op);
}

SpectralField multiplication_B(const ScalarFunction& b, const SpectralField& v,
                               const SpectralField& w) {
    const OperatorSpec& op = *v.op;
    const int J = dealias_points(op.mode_count);
    GridField g = to_grid(v, J);
    GridField wg = to_grid(w, J);
    for (int j = 0; j < J; ++j) g.values[j] = b.eval(g.values[j]) * wg.values[j];
    return from_grid(g, op);
}

namespace {

// (sum_k ||(eta-A)^r Pi_M[g . e_k]||_{V_0}^2)^{1/2} for a symbol g given on the
// dealiased grid.
double hs_norm_symbol(const std::vector<double>& symbol, const OperatorSpec& op, double r) {
    const int M = op.mode_count;
    const int J = static_cast<int>(symbol.size());
    std::vector<double> weights(M);
    for (int k = 1; k <= M; ++k) weights[k - 1] = std::pow(op.shifted_eigenvalue(k), 2.0 * r);
    std::vector<double> prod(J), coeffs(M);
    const double root2 = std::sqrt(2.0);
    double acc = 0.0;
    for (int k = 1; k <= M; ++k) {
        for (int j = 1; j <= J; ++j)
            prod[j - 1] = symbol[j - 1] * root2 * std::sin(kPi * k * j / static_cast<double>(J + 1));
        detail::from_grid_inplace(prod, coeffs);
        for (int m = 0; m < M; ++m) acc += weights[m] * coeffs[m] * coeffs[m];
    }
    return std::sqrt(acc);
}

} // namespace

double hs_norm_B(const ScalarFunction& b, const SpectralField& v, double r) {
    if (r > 0.0) throw std::invalid_argument("hs_norm_B: r must be <= 0");
    const OperatorSpec& op = *v.op;
    const int J = dealias_points(op.mode_count);
    GridField g = to_grid(v, J);
    for (double& x : g.values) x = b.eval(x);
    return hs_norm_symbol(g.values, op, r);
}

double lip_seminorm_estimate(OperatorKind which, const ModelSpec& model,
                             const OperatorSpec& op, double r, int samples,
                             unsigned long long seed) {
    if (samples < 2) throw std::invalid_argument("lip_seminorm_estimate: need at least 2 samples");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int M = op.mode_count;
    const int J = dealias_points(M);

    auto random_field = [&]() {
        SpectralField v = SpectralField::zero(op);
        for (int k = 1; k <= M; ++k) v.coeffs[k - 1] = gauss(rng) / static_cast<double>(k);
        return v;
    };

    double best = 0.0;
    for (int s = 0; s < samples; ++s) {
        SpectralField v = random_field();
        SpectralField w = random_field();
        // include near-coincident pairs, where the ratio tends to peak
        if (s % 3 == 1) {
            w = v;
            const int k = 1 + (s / 3) % M;
            w.coeffs[k - 1] += 1e-3;
        }
        double dist = 0.0;
        for (int k = 0; k < M; ++k) {
            const double d = v.coeffs[k] - w.coeffs[k];
            dist += d * d;
        }
        dist = std::sqrt(dist);
        if (dist == 0.0) continue;

        double num = 0.0;
        if (which == OperatorKind::Drift) {
            SpectralField dF = nemytskii_F(model.f, v);
            SpectralField dFw = nemytskii_F(model.f, w);
            for (int k = 0; k < M; ++k) dF.coeffs[k] -= dFw.coeffs[k];
            num = norm_vr(dF, r);
        } else {
            GridField gv = to_grid(v, J), gw = to_grid(w, J);
            std::vector<double> symbol(J);
            for (int j = 0; j < J; ++j)
                symbol[j] = model.b.eval(gv.values[j]) - model.b.eval(gw.values[j]);
            num = hs_norm_symbol(symbol, op, r);
        }
        best = std::max(best, num / dist);
    }
    return best;
}

double multiplier_embedding_constant(const OperatorSpec& op, double s) {
    if (s > 0.0) throw std::invalid_argument("multiplier_embedding_constant: s must be <= 0");
    const int M = op.mode_count;
    const int J = dealias_points(M);
    std::vector<double> w2(M);
    for (int k = 1; k <= M; ++k) w2[k - 1] = std::pow(op.shifted_eigenvalue(k), 2.0 * s);

    // basis rows on the grid
    std::vector<double> basis(static_cast<std::size_t>(M) * J);
    const double root2 = std::sqrt(2.0);
    for (int k = 1; k <= M; ++k)
        for (int j = 1; j <= J; ++j)
            basis[(k - 1) * static_cast<std::size_t>(J) + (j - 1)] =
                root2 * std::sin(kPi * k * j / static_cast<double>(J + 1));

    // power iteration on G^T G, G(u)_k = D^s Pi_M[u e_k]
    std::vector<double> u(M, 0.0), next(M), ugrid(J), prod(J), c(M), cg(J), back(M);
    u[0] = 1.0;
    double sigma2 = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
        detail::to_grid_inplace(u, ugrid);
        std::fill(next.begin(), next.end(), 0.0);
        for (int k = 0; k < M; ++k) {
            const double* row = &basis[static_cast<std::size_t>(k) * J];
            for (int j = 0; j < J; ++j) prod[j] = ugrid[j] * row[j];
            detail::from_grid_inplace(prod, c);
            for (int m = 0; m < M; ++m) c[m] *= w2[m];
            detail::to_grid_inplace(c, cg);
            for (int j = 0; j < J; ++j) cg[j] *= row[j];
            detail::from_grid_inplace(cg, back);
            for (int m = 0; m < M; ++m) next[m] += back[m];
        }
        double dot = 0.0, nrm = 0.0;
        for (int m = 0; m < M; ++m) {
            dot += next[m] * u[m];
            nrm += next[m] * next[m];
        }
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) return 0.0;
        const double prev = sigma2;
        sigma2 = dot;
        for (int m = 0; m < M; ++m) u[m] = next[m] / nrm;
        if (iter > 10 && std::abs(sigma2 - prev) < 1e-12 * std::abs(sigma2)) break;
    }
    return std::sqrt(std::max(sigma2, 0.0));
}

} // namespace sheq
