#pragma once

// Problem definition: scalar nonlinearities with closed-form derivatives up
// to order four, test functionals, the Nemytskii drift operator, the
// multiplication diffusion operator, and seminorm bookkeeping.

#include <memory>
#include <string>
#include <vector>

#include "sheq/spectral.hpp"

namespace sheq {

/// One harmonic a*sin(w*x + phase) of a custom table entry.
struct Harmonic {
    double amplitude = 0.0;
    double frequency = 1.0;
    double phase = 0.0;
};

/// Scalar function from the admissible catalog: derivatives of orders 1..4
/// globally bounded and globally Lipschitz, with closed forms.
class ScalarFunction {
  public:
    static ScalarFunction zero();
    static ScalarFunction constant(double c);
    /// x -> a sin(w x)
    static ScalarFunction sine(double a, double w);
    /// x -> c0 + c1 cos(x)
    static ScalarFunction cos_affine(double c0, double c1);
    /// x -> a tanh(x)
    static ScalarFunction tanh_scaled(double a);
    /// x -> sum_i a_i sin(w_i x + phi_i)
    static ScalarFunction custom(std::vector<Harmonic> table);

    /// m-th derivative at x, m in {0,...,4}.
    double eval(double x, int order = 0) const;
    /// Stored global bound sup_x |f^{(m)}|, m in {0,...,4}.
    double derivative_bound(int order) const;
    /// Global Lipschitz constant of f^{(m)} (= bound of order m+1 for the catalog).
    double lipschitz_bound(int order) const { return derivative_bound(order + 1); }

    bool is_zero() const;
    bool is_constant() const;
    const std::string& name() const { return name_; }

  private:
    enum class Kind { Zero, Constant, Sine, CosAffine, TanhScaled, Custom };
    Kind kind_ = Kind::Zero;
    double a_ = 0.0, b_ = 0.0;
    std::vector<Harmonic> table_;
    std::string name_ = "zero";
};

/// Test functional on field space.
class Functional {
  public:
    /// phi(v) = exp(-||v||_{L^2}^2); bounded by 1 with bounded derivatives.
    static Functional exp_neg_l2sq();
    /// phi(v) = cos(<w, v>_{L^2}).
    static Functional cos_inner(SpectralField w);

    double operator()(const SpectralField& v) const;
    const std::string& name() const { return name_; }
    bool is_exp_neg_l2sq() const { return kind_ == Kind::ExpNegL2Sq; }

  private:
    enum class Kind { ExpNegL2Sq, CosInner };
    Kind kind_ = Kind::ExpNegL2Sq;
    std::vector<double> weight_;
    std::string name_ = "exp_neg_l2sq";
};

/// One SPDE problem instance.
struct ModelSpec {
    ScalarFunction f;       // drift nonlinearity
    ScalarFunction b;       // diffusion nonlinearity
    Functional phi;         // test functional
    SpectralField xi;       // initial value
    double T = 1.0;         // horizon
    double p = 2.0;         // moment/integrability index, >= 2
    double beta = 0.26;     // diffusion regularity, in (1/4, 1/2)

    /// Drift regularity exponent theta = 2 beta.
    double theta() const { return 2.0 * beta; }
    bool additive() const { return f.is_zero() && b.is_constant(); }
};

/// Nemytskii operator F(v)(x) = f(v(x)), dealiased and projected to M modes.
SpectralField nemytskii_F(const ScalarFunction& f, const SpectralField& v);

/// m-th derivative F^{(m)}(v)(u_1,...,u_m)(x) = f^{(m)}(v(x)) u_1(x)...u_m(x).
SpectralField nemytskii_dF(const ScalarFunction& f, int order, const SpectralField& v,
                           const std::vector<const SpectralField*>& directions);

/// Multiplication operator B(v)w (x) = b(v(x)) w(x), dealiased and projected.
SpectralField multiplication_B(const ScalarFunction& b, const SpectralField& v,
                               const SpectralField& w);

/// Hilbert-Schmidt norm of (eta-A)^r B(v) on the truncation:
/// (sum_k ||fractional_apply(r, B(v) e_k)||_{V_0}^2)^{1/2}, r <= 0.
double hs_norm_B(const ScalarFunction& b, const SpectralField& v, double r);

/// Sampled lower estimate of an operator Lipschitz seminorm:
/// max over pairs of ||F(v)-F(w)||_{V_r} / ||v-w||_{V_0} (Hilbert-Schmidt
/// version for B).  A lower estimate of the true seminorm.
enum class OperatorKind { Drift, Diffusion };
double lip_seminorm_estimate(OperatorKind which, const ModelSpec& model,
                             const OperatorSpec& op, double r, int samples,
                             unsigned long long seed = 0x5eedULL);

/// Largest singular value of the linear symbol -> multiplication-operator map
/// g |-> ((eta-A)^{s} Pi_M[g e_k])_k from V_0 into the Hilbert-Schmidt class,
/// maximized over the truncated span (power iteration).  s <= 0.
double multiplier_embedding_constant(const OperatorSpec& op, double s);

} // namespace sheq
