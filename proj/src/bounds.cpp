#include "sheq/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sheq {

namespace {

void finalize(BoundReport& rep, const Empirical& emp) {
    rep.lhs = emp.value;
    rep.lhs_upper_ci = emp.upper_ci;
    rep.samples = emp.samples;
    rep.margin = rep.rhs - rep.lhs_upper_ci;
    rep.pass = !rep.unbounded && rep.margin >= 0.0;
}

void push(BoundReport& rep, const std::string& name, double value, const std::string& prov) {
    rep.ingredients.push_back({name, value, prov});
}

} // namespace

double smoothing_constant_ext(double r, const OperatorSpec& op) {
    if (r >= 0.0) return smoothing_constant(r, op);
    if (r < -1.0) throw std::invalid_argument("smoothing_constant_ext: r must lie in [-1,1]");
    // For r < 0 both sups drop the t-weights: ||(eta-A)^r e^{tA}|| <= (eta+lam_1)^r
    // and ||e^{tA} - Id|| <= 1 on the diagonal truncation.
    const double s1 = std::pow(op.shifted_eigenvalue(1), r);
    return std::max({1.0, s1});
}

SeminormEstimates compute_seminorms(const BoundContext& ctx) {
    const ModelSpec& model = *ctx.model;
    const OperatorSpec& op = *ctx.op;
    const double th = ctx.vartheta;
    SeminormEstimates est;

    est.drift_embedding = std::pow(op.shifted_eigenvalue(1), -th);
    est.diffusion_embedding = multiplier_embedding_constant(op, -0.5 * th);

    const double f_prime = model.f.derivative_bound(1);
    const double b_prime = model.b.derivative_bound(1);
    est.f_seminorm_sampled =
        lip_seminorm_estimate(OperatorKind::Drift, model, op, -th, ctx.seminorm_samples);
    est.b_seminorm_sampled =
        lip_seminorm_estimate(OperatorKind::Diffusion, model, op, -0.5 * th, ctx.seminorm_samples);
    est.f_seminorm = std::max(f_prime * est.drift_embedding, est.f_seminorm_sampled);
    est.b_seminorm = std::max(b_prime * est.diffusion_embedding, est.b_seminorm_sampled);

    const SpectralField zero = SpectralField::zero(op);
    est.f_zero_norm = norm_vr(nemytskii_F(model.f, zero), -th);
    est.b_zero_norm = hs_norm_B(model.b, zero, -0.5 * th);
    return est;
}

namespace {

// shared envelope argument:
// sqrt(2) chi_th T^{1-th} |F|_Lip / sqrt(1-th) + Y_p chi_{th/2} sqrt(2 T^{1-th}) |B|_Lip
struct CommonTerms {
    double chi0, chi_th, chi_half;
    double upsilon;
    double envelope_arg;
    double envelope_value;
    bool overflow = false;
};

CommonTerms common_terms(const BoundContext& ctx, const SeminormEstimates& est) {
    const ModelSpec& model = *ctx.model;
    CommonTerms ct;
    ct.chi0 = smoothing_constant(0.0, *ctx.op);
    ct.chi_th = smoothing_constant(ctx.vartheta, *ctx.op);
    ct.chi_half = smoothing_constant(0.5 * ctx.vartheta, *ctx.op);
    ct.upsilon = bdg_constant(model.p, ctx.upsilon_policy);
    const double th = ctx.vartheta;
    const double t_pow = std::pow(model.T, 1.0 - th);
    ct.envelope_arg = std::sqrt(2.0) * ct.chi_th * t_pow * est.f_seminorm / std::sqrt(1.0 - th) +
                      ct.upsilon * ct.chi_half * std::sqrt(2.0 * t_pow) * est.b_seminorm;
    try {
        ct.envelope_value = generalized_exponential(1.0 - th, ct.envelope_arg);
    } catch (const SeriesOverflow&) {
        ct.overflow = true;
        ct.envelope_value = std::numeric_limits<double>::infinity();
    }
    return ct;
}

void push_common(BoundReport& rep, const BoundContext& ctx, const SeminormEstimates& est,
                 const CommonTerms& ct) {
    push(rep, "chi_0", ct.chi0, "closed-form");
    push(rep, "chi_vartheta", ct.chi_th, "closed-form");
    push(rep, "chi_vartheta/2", ct.chi_half, "closed-form");
    push(rep, std::string("upsilon_p(") + to_string(ctx.upsilon_policy) + ")", ct.upsilon, "policy");
    push(rep, "|F|_Lip0", est.f_seminorm,
         est.f_seminorm > est.f_seminorm_sampled ? "product-bound (truncation embedding)"
                                                 : "sampled-estimate");
    push(rep, "|F|_Lip0 sampled lower estimate", est.f_seminorm_sampled, "sampled-estimate");
    push(rep, "|B|_Lip0", est.b_seminorm,
         est.b_seminorm > est.b_seminorm_sampled ? "product-bound (truncation-maximized)"
                                                 : "sampled-estimate");
    push(rep, "|B|_Lip0 sampled lower estimate", est.b_seminorm_sampled, "sampled-estimate");
    push(rep, "envelope argument", ct.envelope_arg, "closed-form");
    push(rep, "E_{1-vartheta}(arg)", ct.envelope_value, "series");
}

} // namespace

BoundReport eval_apriori_bound(const BoundContext& ctx, const Empirical& sup_moment) {
    const ModelSpec& model = *ctx.model;
    const double th = ctx.vartheta;
    const SeminormEstimates est = compute_seminorms(ctx);
    const CommonTerms ct = common_terms(ctx, est);

    BoundReport rep;
    rep.inequality = "apriori_moment";
    const double xi_norm = norm_lp(model.xi, model.p);
    const double t_pow = std::pow(model.T, 1.0 - th);
    const double bracket = std::max(1.0, ct.chi0) * xi_norm +
                           ct.chi_th * t_pow * est.f_zero_norm / (1.0 - th) +
                           ct.chi_half * ct.upsilon * std::sqrt(t_pow) * est.b_zero_norm / std::sqrt(1.0 - th);
    rep.rhs = std::sqrt(2.0) * bracket * ct.envelope_value;
    rep.unbounded = ct.overflow;
    if (rep.unbounded) rep.note = "envelope series overflowed at argument " + std::to_string(ct.envelope_arg);
    push_common(rep, ctx, est, ct);
    push(rep, "||xi||_Lp", xi_norm, "closed-form");
    push(rep, "||F(0)||_{V_-vartheta}", est.f_zero_norm, "closed-form");
    push(rep, "||B(0)||_HS", est.b_zero_norm, "closed-form");
    finalize(rep, sup_moment);
    return rep;
}

BoundReport eval_perturbation_bound(const BoundContext& ctx, const SpectralField& xi1,
                                    const SpectralField& xi2, const Empirical& sup_diff) {
    const ModelSpec& model = *ctx.model;
    const SeminormEstimates est = compute_seminorms(ctx);
    const CommonTerms ct = common_terms(ctx, est);

    BoundReport rep;
    rep.inequality = "initial_perturbation";
    SpectralField diff = xi1;
    for (int k = 0; k < diff.modes(); ++k) diff.coeffs[k] -= xi2.coeffs[k];
    const double diff_norm = norm_lp(diff, model.p);
    const double sup_semigroup = 1.0; // sup_t ||e^{tA}||_{L(V)} on the truncation
    rep.rhs = std::sqrt(2.0) * sup_semigroup * diff_norm * ct.envelope_value;
    rep.unbounded = ct.overflow;
    push_common(rep, ctx, est, ct);
    push(rep, "sup_t ||S_t||", sup_semigroup, "closed-form");
    push(rep, "||xi1-xi2||_Lp", diff_norm, "closed-form");
    finalize(rep, sup_diff);
    return rep;
}

BoundReport eval_mollify_bound(const BoundContext& ctx, double kappa, double rho,
                               const Empirical& sup_gap) {
    const ModelSpec& model = *ctx.model;
    const double th = ctx.vartheta;
    if (rho < 0.0 || rho >= 0.5 * (1.0 - th))
        throw std::invalid_argument("eval_mollify_bound: rho must lie in [0, (1-vartheta)/2)");
    if (kappa < 0.0 || kappa > model.T)
        throw std::invalid_argument("eval_mollify_bound: kappa must lie in [0, T]");

    const SeminormEstimates est = compute_seminorms(ctx);
    const CommonTerms ct = common_terms(ctx, est);
    const double chi_rho = smoothing_constant(rho, *ctx.op);
    const double chi_rho_th = smoothing_constant_ext(rho + th, *ctx.op);
    const double chi_rho_half = smoothing_constant_ext(rho + 0.5 * th, *ctx.op);

    BoundReport rep;
    rep.inequality = "mollification_gap";
    const double xi_norm = norm_lp(model.xi, model.p);
    const double t_pow = std::pow(model.T, 1.0 - th);
    const double bracket =
        std::max(1.0, xi_norm) +
        chi_rho * ct.chi_th * chi_rho_th * t_pow * est.f_full_norm() / (1.0 - th - rho) +
        ct.upsilon * chi_rho * ct.chi_half * chi_rho_half * std::sqrt(t_pow) * est.b_full_norm() /
            std::sqrt(1.0 - th - 2.0 * rho);
    rep.rhs = (2.0 * std::pow(kappa, rho) / std::pow(model.T, rho)) * bracket * bracket *
              ct.envelope_value * ct.envelope_value;
    if (kappa == 0.0) rep.rhs = 0.0;
    rep.unbounded = ct.overflow;
    push_common(rep, ctx, est, ct);
    push(rep, "chi_rho", chi_rho, "closed-form");
    push(rep, "chi_rho+vartheta", chi_rho_th, "closed-form");
    push(rep, "chi_rho+vartheta/2", chi_rho_half, "closed-form");
    push(rep, "||F||_Lip0 (full norm)", est.f_full_norm(), "composite");
    push(rep, "||B||_Lip0 (full norm)", est.b_full_norm(), "composite");
    push(rep, "kappa", kappa, "config");
    push(rep, "rho", rho, "config");
    finalize(rep, sup_gap);
    return rep;
}

double eval_kp_bound(const BoundContext& ctx) {
    const ModelSpec& model = *ctx.model;
    const double th = ctx.vartheta;
    const SeminormEstimates est = compute_seminorms(ctx);
    const CommonTerms ct = common_terms(ctx, est);
    const double xi_norm = norm_lp(model.xi, model.p);
    const double t_pow = std::pow(model.T, 1.0 - th);
    const double bracket = ct.chi0 * std::max(1.0, xi_norm) +
                           ct.chi_th * est.f_full_norm() * t_pow / (1.0 - th) +
                           ct.upsilon * ct.chi_half * std::sqrt(t_pow) * est.b_full_norm() / std::sqrt(1.0 - th);
    const double p = model.p;
    return std::pow(bracket, 2.0 * p) * std::pow(2.0, 0.5 * p + 1.0) *
           std::pow(ct.envelope_value, p);
}

BoundReport eval_semilinear_bound(const BoundContext& ctx, double rho, double rate_exponent,
                                  long N, const Empirical& dist) {
    const ModelSpec& model = *ctx.model;
    const double th = ctx.vartheta;
    if (rho < 0.0 || rho >= 1.0)
        throw std::invalid_argument("eval_semilinear_bound: rho must lie in [0,1)");
    const double vr_limit = 1.0 - std::max(0.5 * (1.0 + th) - rho, 0.0);
    if (rate_exponent < 0.0 || rate_exponent >= vr_limit)
        throw std::invalid_argument("eval_semilinear_bound: rate exponent out of admissible range");

    const SeminormEstimates est = compute_seminorms(ctx);
    const CommonTerms ct = common_terms(ctx, est);
    const double kp = eval_kp_bound(ctx);
    const double h = model.T / static_cast<double>(N);
    const double vr = rate_exponent;
    const double chi_vr = smoothing_constant(vr, *ctx.op);
    const double chi_f = smoothing_constant_ext(vr + th - rho, *ctx.op);
    const double chi_b = smoothing_constant_ext(vr + 0.5 * th - rho, *ctx.op);
    const double ef = std::max(th + vr - rho, 0.0);
    const double eb = std::max(th + 2.0 * vr - 2.0 * rho, 0.0);

    BoundReport rep;
    rep.inequality = "semilinear_integrated_distance";
    const double drift_term =
        chi_f * std::pow(model.T, 1.0 - ef) * est.f_full_norm() / (1.0 - ef);
    const double noise_term = ct.upsilon * chi_b * std::sqrt(std::pow(model.T, 1.0 - eb)) *
                              est.b_full_norm() / std::sqrt(1.0 - eb);
    rep.rhs = std::pow(kp, 1.0 / model.p) * chi_vr * std::pow(h, vr) * (drift_term + noise_term);
    rep.unbounded = ct.overflow;
    push_common(rep, ctx, est, ct);
    push(rep, "K_p bound", kp, "closed-form chain");
    push(rep, "rate exponent", vr, "config");
    push(rep, "rho", rho, "config");
    push(rep, "h", h, "config");
    finalize(rep, dist);
    return rep;
}

} // namespace sheq
