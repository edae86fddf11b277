#include "sheq/schemes.hpp"

#include <cmath>

namespace sheq {

const char* to_string(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::ExpEuler: return "exp_euler";
        case SchemeKind::MollifiedExpEuler: return "mollified_exp_euler";
        case SchemeKind::LinearImplicitEuler: return "linear_implicit_euler";
        case SchemeKind::SemilinearIntegrated: return "semilinear_integrated";
        case SchemeKind::Variation: return "variation";
    }
    return "?";
}

void SchemeConfig::validate() const {
    if (!model || !op) throw std::invalid_argument("SchemeConfig: model and operator required");
    if (N < 1) throw std::invalid_argument("SchemeConfig: N must be >= 1");
    if (!valid_refinement(N, plan.fine_steps))
        throw std::invalid_argument("SchemeConfig: N must divide N_fine with a power-of-two quotient");
    if (kind == SchemeKind::MollifiedExpEuler && (kappa < 0.0 || kappa > model->T))
        throw std::invalid_argument("SchemeConfig: kappa must lie in [0, T]");
    if (op->mode_count != plan.mode_count)
        throw std::invalid_argument("SchemeConfig: operator and plan disagree on mode count");
    if (model->xi.modes() != op->mode_count)
        throw std::invalid_argument("SchemeConfig: initial value has wrong mode count");
    if (cache && !cache->matches(plan))
        throw std::invalid_argument("SchemeConfig: noise cache does not match the plan");
}

namespace {

// Precomputed diagonal factors and scratch buffers for one (config) stepping
// loop; reused across steps and samples.
struct StepKernel {
    const SchemeConfig& cfg;
    int M;
    int J;
    double h;
    bool f_zero;
    bool b_const;
    double b_value = 0.0; // when b_const
    std::vector<double> propagate;   // e^{-lam h} or 1/(1 + h lam)
    std::vector<double> mollify;     // e^{-lam kappa} (empty when kappa == 0)
    std::vector<double> grid_y, grid_z, grid_w, drift, noise, dw;

    explicit StepKernel(const SchemeConfig& c)
        : cfg(c),
          M(c.op->mode_count),
          J(dealias_points(c.op->mode_count)),
          h(c.step_size()),
          f_zero(c.model->f.is_zero()),
          b_const(c.model->b.is_constant()),
          propagate(static_cast<std::size_t>(c.op->mode_count)),
          grid_y(static_cast<std::size_t>(dealias_points(c.op->mode_count))),
          grid_z(grid_y.size()),
          grid_w(grid_y.size()),
          drift(propagate.size()),
          noise(propagate.size()),
          dw(propagate.size()) {
        if (b_const) b_value = c.model->b.eval(0.0);
        const bool implicit = c.kind == SchemeKind::LinearImplicitEuler;
        for (int k = 1; k <= M; ++k) {
            const double lam = c.op->eigenvalue(k);
            propagate[k - 1] = implicit ? 1.0 / (1.0 + h * lam) : std::exp(-lam * h);
        }
        if (c.kind == SchemeKind::MollifiedExpEuler && c.kappa > 0.0) {
            mollify.resize(M);
            for (int k = 1; k <= M; ++k) mollify[k - 1] = std::exp(-c.op->eigenvalue(k) * c.kappa);
        }
    }

    void pull_increment(long n) {
        if (cfg.cache)
            cfg.cache->block_into(cfg.N, n, dw);
        else
            increment_into(cfg.plan, cfg.N, n, dw);
    }

    // y <- propagate . (y + h F(y) + Pi_M[b(y) dW_n]), with optional e^{kappa A}
    // in front of F and B.  Drift and noise share one projection when the
    // diffusion needs the grid anyway.
    void step(std::vector<double>& y, long n) {
        const ModelSpec& model = *cfg.model;
        if (!f_zero || !b_const) detail::to_grid_inplace(y, grid_y);
        pull_increment(n);

        if (!b_const) {
            detail::to_grid_inplace(dw, grid_w);
            if (f_zero) {
                for (int j = 0; j < J; ++j) grid_w[j] *= model.b.eval(grid_y[j]);
            } else {
                for (int j = 0; j < J; ++j)
                    grid_w[j] = h * model.f.eval(grid_y[j]) + model.b.eval(grid_y[j]) * grid_w[j];
            }
            detail::from_grid_inplace(grid_w, noise);
        } else {
            if (!f_zero) {
                for (int j = 0; j < J; ++j) grid_w[j] = h * model.f.eval(grid_y[j]);
                detail::from_grid_inplace(grid_w, drift);
            }
            for (int k = 0; k < M; ++k) {
                noise[k] = b_value * dw[k];
                if (!f_zero) noise[k] += drift[k];
            }
        }

        if (!mollify.empty())
            for (int k = 0; k < M; ++k) noise[k] *= mollify[k];

        bool finite = true;
        for (int k = 0; k < M; ++k) {
            const double v = (y[k] + noise[k]) * propagate[k];
            y[k] = v;
            finite = finite && std::isfinite(v);
        }
        if (!finite) throw DivergenceError(n + 1);
    }

    // Variation step along base state y: z <- propagate . (z + h f'(y) z + Pi_M[b'(y) z dW_n]).
    void variation(std::vector<double>& z, const std::vector<double>& y, long n) {
        const ModelSpec& model = *cfg.model;
        detail::to_grid_inplace(y, grid_y);
        detail::to_grid_inplace(z, grid_z);
        pull_increment(n);
        detail::to_grid_inplace(dw, grid_w);
        for (int j = 0; j < J; ++j)
            grid_w[j] = (h * model.f.eval(grid_y[j], 1) + model.b.eval(grid_y[j], 1) * grid_w[j]) *
                        grid_z[j];
        detail::from_grid_inplace(grid_w, noise);

        bool finite = true;
        for (int k = 0; k < M; ++k) {
            const double v = (z[k] + noise[k]) * propagate[k];
            z[k] = v;
            finite = finite && std::isfinite(v);
        }
        if (!finite) throw DivergenceError(n + 1);
    }
};

SpectralField one_step(const SpectralField& Yn, long n, const SchemeConfig& cfg) {
    cfg.validate();
    if (n < 0 || n >= cfg.N) throw std::invalid_argument("step index out of range");
    StepKernel kernel(cfg);
    std::vector<double> y = Yn.coeffs;
    kernel.step(y, n);
    return SpectralField(*cfg.op, std::move(y));
}

} // namespace

SpectralField exp_euler_step(const SpectralField& Yn, long n, const SchemeConfig& cfg) {
    SchemeConfig c = cfg;
    c.kind = SchemeKind::ExpEuler;
    c.kappa = 0.0;
    return one_step(Yn, n, c);
}

SpectralField mollified_step(const SpectralField& Yn, long n, const SchemeConfig& cfg) {
    SchemeConfig c = cfg;
    c.kind = SchemeKind::MollifiedExpEuler;
    return one_step(Yn, n, c);
}

SpectralField linear_implicit_step(const SpectralField& Yn, long n, const SchemeConfig& cfg) {
    SchemeConfig c = cfg;
    c.kind = SchemeKind::LinearImplicitEuler;
    c.kappa = 0.0;
    return one_step(Yn, n, c);
}

SpectralField variation_step(const SpectralField& Zn, const SpectralField& Yn, long n,
                             const SchemeConfig& cfg) {
    cfg.validate();
    if (n < 0 || n >= cfg.N) throw std::invalid_argument("step index out of range");
    StepKernel kernel(cfg);
    std::vector<double> z = Zn.coeffs;
    kernel.variation(z, Yn.coeffs, n);
    return SpectralField(*cfg.op, std::move(z));
}

Trajectory run_scheme(const SchemeConfig& cfg) {
    cfg.validate();
    StepKernel kernel(cfg);
    Trajectory out;
    out.states.reserve(cfg.N + 1);
    out.states.push_back(cfg.model->xi);
    std::vector<double> y = cfg.model->xi.coeffs;
    for (long n = 0; n < cfg.N; ++n) {
        kernel.step(y, n);
        out.states.emplace_back(*cfg.op, y);
    }
    return out;
}

SpectralField run_scheme_final(const SchemeConfig& cfg) {
    cfg.validate();
    StepKernel kernel(cfg);
    std::vector<double> y = cfg.model->xi.coeffs;
    for (long n = 0; n < cfg.N; ++n) kernel.step(y, n);
    return SpectralField(*cfg.op, std::move(y));
}

Trajectory run_semilinear_integrated(const SchemeConfig& cfg, const Trajectory& driving,
                                     bool* warn_coarse) {
    cfg.validate();
    if (driving.steps() != cfg.N)
        throw std::invalid_argument("run_semilinear_integrated: driving trajectory has wrong step count");
    const ModelSpec& model = *cfg.model;
    const OperatorSpec& op = *cfg.op;
    const int M = op.mode_count;
    const int J = dealias_points(M);
    const double h = cfg.step_size();
    const long m = cfg.plan.fine_steps / cfg.N;
    const double hf = cfg.plan.fine_dt();
    if (warn_coarse) *warn_coarse = (m == 1) && !(cfg.plan.exact_ou && model.b.is_constant());

    std::vector<double> decay(M), drift_conv(M);
    for (int k = 1; k <= M; ++k) {
        const double lam = op.eigenvalue(k);
        decay[k - 1] = std::exp(-lam * h);
        drift_conv[k - 1] = -std::expm1(-lam * h) / lam; // int_0^h e^{-lam(h-s)} ds
    }

    const bool exact = cfg.plan.exact_ou && model.b.is_constant();
    const double b_value = model.b.is_constant() ? model.b.eval(0.0) : 0.0;

    // fine-substep weights e^{-lam (h - i hf)} for the left-point sum, or the
    // conditional-law coefficients for exact sampling
    std::vector<double> wtab(static_cast<std::size_t>(m) * M), rtab;
    if (exact) rtab.resize(wtab.size());
    for (long i = 0; i < m; ++i) {
        for (int k = 1; k <= M; ++k) {
            const double lam = op.eigenvalue(k);
            if (!exact) {
                wtab[i * M + (k - 1)] = std::exp(-lam * (h - static_cast<double>(i) * hf));
            } else {
                // I_i = int over the i-th fine interval of e^{-lam(t_{n+1}-s)} dbeta:
                // E[I_i | dbeta_i] = (cov/hf) dbeta_i, residual variance var - cov^2/hf
                const double tail = h - static_cast<double>(i + 1) * hf; // t_{n+1} - s_{i+1}
                const double var = std::exp(-2.0 * lam * tail) * (-std::expm1(-2.0 * lam * hf)) / (2.0 * lam);
                const double cov = std::exp(-lam * tail) * (-std::expm1(-lam * hf)) / lam;
                wtab[i * M + (k - 1)] = cov / hf;
                rtab[i * M + (k - 1)] = std::sqrt(std::max(0.0, var - cov * cov / hf));
            }
        }
    }

    Trajectory out;
    out.states.reserve(cfg.N + 1);
    out.states.push_back(model.xi);
    std::vector<double> ybar = model.xi.coeffs;
    std::vector<double> grid_y(J), grid_w(J), tmp(M), conv(M), fine(M);
    const auto fine_inc = [&](int k, long gi) {
        return cfg.cache ? cfg.cache->fine_increment(k, gi) : cfg.plan.fine_increment(k, gi);
    };
    for (long n = 0; n < cfg.N; ++n) {
        const std::vector<double>& yn = driving.states[n].coeffs;

        std::fill(conv.begin(), conv.end(), 0.0);
        if (!model.b.is_constant()) detail::to_grid_inplace(yn, grid_y);
        for (long i = 0; i < m; ++i) {
            const long gi = n * m + i;
            if (exact) {
                for (int k = 1; k <= M; ++k) {
                    const double db = fine_inc(k, gi);
                    const double z = cfg.plan.unit_normal(k, gi, 1);
                    conv[k - 1] += b_value * (wtab[i * M + (k - 1)] * db + rtab[i * M + (k - 1)] * z);
                }
            } else if (model.b.is_constant()) {
                for (int k = 1; k <= M; ++k)
                    conv[k - 1] += wtab[i * M + (k - 1)] * b_value * fine_inc(k, gi);
            } else {
                for (int k = 1; k <= M; ++k) fine[k - 1] = fine_inc(k, gi);
                detail::to_grid_inplace(fine, grid_w);
                for (int j = 0; j < J; ++j) grid_w[j] *= model.b.eval(grid_y[j]);
                detail::from_grid_inplace(grid_w, tmp);
                for (int k = 0; k < M; ++k) conv[k] += wtab[i * M + k] * tmp[k];
            }
        }

        if (!model.f.is_zero()) {
            detail::to_grid_inplace(yn, grid_y);
            for (int j = 0; j < J; ++j) grid_w[j] = model.f.eval(grid_y[j]);
            detail::from_grid_inplace(grid_w, tmp);
        } else {
            std::fill(tmp.begin(), tmp.end(), 0.0);
        }

        bool finite = true;
        for (int k = 0; k < M; ++k) {
            ybar[k] = decay[k] * ybar[k] + drift_conv[k] * tmp[k] + conv[k];
            finite = finite && std::isfinite(ybar[k]);
        }
        if (!finite) throw DivergenceError(n + 1);
        out.states.emplace_back(op, ybar);
    }
    return out;
}

Trajectory run_variation(const SchemeConfig& cfg, const SpectralField& direction) {
    cfg.validate();
    if (direction.modes() != cfg.op->mode_count)
        throw std::invalid_argument("run_variation: direction has wrong mode count");
    SchemeConfig base = cfg;
    base.kind = SchemeKind::ExpEuler;
    base.kappa = 0.0;
    StepKernel kernel(base);
    StepKernel vkernel(base);
    Trajectory out;
    out.states.reserve(cfg.N + 1);
    out.states.push_back(direction);
    std::vector<double> y = cfg.model->xi.coeffs;
    std::vector<double> z = direction.coeffs;
    for (long n = 0; n < cfg.N; ++n) {
        vkernel.variation(z, y, n); // linearize along the pre-step base state
        kernel.step(y, n);
        out.states.emplace_back(*cfg.op, z);
    }
    return out;
}

SpectralField reference_solve(const ModelSpec& model, const OperatorSpec& op, const NoisePlan& plan,
                              const NoiseCache* cache) {
    if (plan.exact_ou && model.additive()) {
        const int M = op.mode_count;
        const double T = model.T;
        const double hf = plan.fine_dt();
        const double c = model.b.eval(0.0);
        std::vector<double> x(M);
        for (int k = 1; k <= M; ++k) {
            const double lam = op.eigenvalue(k);
            double acc = std::exp(-lam * T) * model.xi.coeffs[k - 1];
            for (long i = 0; i < plan.fine_steps; ++i) {
                const double tail = T - static_cast<double>(i + 1) * hf;
                const double var = std::exp(-2.0 * lam * tail) * (-std::expm1(-2.0 * lam * hf)) / (2.0 * lam);
                const double cov = std::exp(-lam * tail) * (-std::expm1(-lam * hf)) / lam;
                const double resid = std::sqrt(std::max(0.0, var - cov * cov / hf));
                const double db = cache ? cache->fine_increment(k, i) : plan.fine_increment(k, i);
                acc += c * ((cov / hf) * db + resid * plan.unit_normal(k, i, 1));
            }
            x[k - 1] = acc;
        }
        return SpectralField(op, std::move(x));
    }
    SchemeConfig cfg;
    cfg.kind = SchemeKind::ExpEuler;
    cfg.N = plan.fine_steps;
    cfg.model = &model;
    cfg.op = &op;
    cfg.plan = plan;
    cfg.cache = cache;
    return run_scheme_final(cfg);
}

} // namespace sheq
