#include "sheq/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace sheq {

RateFit fit_rate(const ErrorTable& table, int skip_smallest) {
    std::vector<std::pair<double, double>> pts; // (log N, log err)
    std::vector<long> ns;
    int skipped = 0;
    for (const auto& row : table.rows) {
        if (!(row.error > 0.0)) continue;
        if (skipped < skip_smallest) {
            ++skipped;
            continue;
        }
        pts.emplace_back(std::log(static_cast<double>(row.N)), std::log(row.error));
        ns.push_back(row.N);
    }
    if (pts.size() < 3)
        throw std::runtime_error("fit_rate: insufficient data (need >= 3 rows with positive error)");

    const double n = static_cast<double>(pts.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double det = n * sxx - sx * sx;
    RateFit fit;
    fit.slope = (n * sxy - sx * sy) / det;
    fit.intercept = (sy * sxx - sx * sxy) / det;
    double ss_res = 0, ss_tot = 0;
    const double ybar = sy / n;
    for (auto [x, y] : pts) {
        const double e = y - (fit.slope * x + fit.intercept);
        ss_res += e * e;
        ss_tot += (y - ybar) * (y - ybar);
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    if (pts.size() > 2) {
        const double sigma2 = ss_res / (n - 2.0);
        const double sxx_centered = sxx - sx * sx / n;
        fit.slope_ci_halfwidth = 2.0 * std::sqrt(sigma2 / sxx_centered);
    }
    fit.fit_n_min = ns.front();
    fit.fit_n_max = ns.back();
    fit.rows_used = static_cast<int>(pts.size());
    return fit;
}

double predicted_exponent(double kappa, double eps) {
    if (kappa < 0.0 || kappa >= 4.0 / 7.0)
        throw std::out_of_range("predicted_exponent: kappa must lie in [0, 4/7)");
    if (!(eps > 0.0)) throw std::invalid_argument("predicted_exponent: eps must be positive");
    return 1.0 - kappa - 6.0 * std::max(kappa - 0.5, 0.0) - eps;
}

double McResult::variance(std::size_t i) const {
    if (completed < 2) return 0.0;
    const double n = static_cast<double>(completed);
    return std::max(0.0, (sum_sq[i] - sum[i] * sum[i] / n) / (n - 1.0));
}

double McResult::std_error(std::size_t i) const {
    if (completed < 2) return 0.0;
    return std::sqrt(variance(i) / static_cast<double>(completed));
}

namespace {

struct ChunkPartial {
    std::vector<double> sum, sum_sq;
    long completed = 0;
    long aborted = 0;
};

void reduce_pairwise(std::vector<ChunkPartial>& parts, std::size_t lo, std::size_t n,
                     ChunkPartial& out) {
    if (n == 1) {
        out = std::move(parts[lo]);
        return;
    }
    const std::size_t half = n / 2;
    ChunkPartial left, right;
    reduce_pairwise(parts, lo, half, left);
    reduce_pairwise(parts, lo + half, n - half, right);
    out = std::move(left);
    for (std::size_t i = 0; i < out.sum.size(); ++i) {
        out.sum[i] += right.sum[i];
        out.sum_sq[i] += right.sum_sq[i];
    }
    out.completed += right.completed;
    out.aborted += right.aborted;
}

} // namespace

McResult run_mc(std::size_t samples, std::size_t n_outputs, const McOptions& opts,
                const std::function<void(std::uint64_t, std::span<double>)>& eval) {
    if (samples == 0) throw std::invalid_argument("run_mc: need at least one sample");
    const std::size_t chunk = std::max<std::size_t>(1, opts.chunk);
    const std::size_t n_chunks = (samples + chunk - 1) / chunk;
    std::vector<ChunkPartial> parts(n_chunks);

    std::atomic<std::size_t> next_chunk{0};
    auto worker = [&]() {
        std::vector<double> out(n_outputs);
        for (;;) {
            const std::size_t c = next_chunk.fetch_add(1);
            if (c >= n_chunks) break;
            ChunkPartial part;
            part.sum.assign(n_outputs, 0.0);
            part.sum_sq.assign(n_outputs, 0.0);
            const std::size_t lo = c * chunk;
            const std::size_t hi = std::min(samples, lo + chunk);
            for (std::size_t s = lo; s < hi; ++s) {
                bool ok = true;
                try {
                    eval(static_cast<std::uint64_t>(s), out);
                } catch (const DivergenceError&) {
                    ok = false;
                }
                if (ok) {
                    for (std::size_t i = 0; i < n_outputs; ++i) {
                        ok = ok && std::isfinite(out[i]);
                    }
                }
                if (!ok) {
                    ++part.aborted;
                    continue;
                }
                for (std::size_t i = 0; i < n_outputs; ++i) {
                    part.sum[i] += out[i];
                    part.sum_sq[i] += out[i] * out[i];
                }
                ++part.completed;
            }
            parts[c] = std::move(part);
        }
    };

    const int n_threads = std::max(1, opts.threads);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    ChunkPartial total;
    reduce_pairwise(parts, 0, n_chunks, total);
    McResult res;
    res.sum = std::move(total.sum);
    res.sum_sq = std::move(total.sum_sq);
    res.completed = total.completed;
    res.aborted = total.aborted;
    if (res.completed == 0) throw EstimationDegraded("all samples aborted");
    const double frac = static_cast<double>(res.aborted) / static_cast<double>(samples);
    if (frac > opts.abort_tolerance) {
        std::ostringstream msg;
        msg << "estimation degraded: " << res.aborted << "/" << samples << " samples aborted";
        throw EstimationDegraded(msg.str());
    }
    return res;
}

double metric_norm(const SpectralField& v, const StrongMetric& metric, double p) {
    if (metric.kind == StrongMetric::Kind::Vr) return norm_vr(v, metric.r);
    return norm_lp(v, p);
}

std::string model_fingerprint(const ModelSpec& model, const OperatorSpec& op) {
    std::ostringstream os;
    os << "f=" << model.f.name() << ";b=" << model.b.name() << ";phi=" << model.phi.name()
       << ";T=" << model.T << ";p=" << model.p << ";beta=" << model.beta << ";M=" << op.mode_count;
    return os.str();
}

ErrorRow weak_error_mc(const ModelSpec& model, const OperatorSpec& op, const NoisePlan& plan,
                       long N, std::size_t samples, bool couple_to_reference,
                       const McOptions& opts) {
    if (samples < 2) throw std::invalid_argument("weak_error_mc: need at least 2 samples");
    ErrorRow row;
    row.N = N;
    row.samples = static_cast<long>(samples);
    if (couple_to_reference) {
        auto eval = [&](std::uint64_t s, std::span<double> out) {
            const NoisePlan sp = plan.with_sample(s);
            SchemeConfig cfg{SchemeKind::ExpEuler, N, 0.0, &model, &op, sp};
            const SpectralField ref = reference_solve(model, op, sp);
            const SpectralField y = run_scheme_final(cfg);
            out[0] = model.phi(ref) - model.phi(y);
        };
        const McResult res = run_mc(samples, 1, opts, eval);
        row.error = std::abs(res.mean(0));
        row.std_error = res.std_error(0);
        row.samples = res.completed;
        row.aborted = res.aborted;
    } else {
        // independent paths on disjoint key subspaces
        auto eval = [&](std::uint64_t s, std::span<double> out) {
            const SpectralField ref = reference_solve(model, op, plan.with_sample(2 * s));
            SchemeConfig cfg{SchemeKind::ExpEuler, N, 0.0, &model, &op, plan.with_sample(2 * s + 1)};
            const SpectralField y = run_scheme_final(cfg);
            out[0] = model.phi(ref);
            out[1] = model.phi(y);
        };
        const McResult res = run_mc(samples, 2, opts, eval);
        row.error = std::abs(res.mean(0) - res.mean(1));
        row.std_error = std::sqrt(res.std_error(0) * res.std_error(0) + res.std_error(1) * res.std_error(1));
        row.samples = res.completed;
        row.aborted = res.aborted;
    }
    return row;
}

ErrorTable weak_error_exact(const ModelSpec& model, const OperatorSpec& op,
                            const std::vector<long>& n_list) {
    if (!model.additive() || !model.phi.is_exp_neg_l2sq())
        throw std::invalid_argument(
            "weak_error_exact: unsupported oracle (requires f = 0, b = const, phi = exp_neg_l2sq)");
    bool xi_zero = true;
    for (double a : model.xi.coeffs) xi_zero = xi_zero && a == 0.0;
    if (!xi_zero)
        throw std::invalid_argument("weak_error_exact: unsupported oracle (requires xi = 0)");

    OUSpec spec;
    spec.T = model.T;
    spec.mode_count = op.mode_count;
    spec.amplitude = model.b.eval(0.0);
    spec.kind = OuSchemeKind::ExpEuler;

    ErrorTable table;
    table.metric = "weak(" + model.phi.name() + ")";
    table.model_fingerprint = model_fingerprint(model, op);
    table.mode_count = op.mode_count;
    table.fine_steps = 0;
    const double mild = ou_weak_value(spec, OuLaw::Mild);
    for (long N : n_list) {
        OUSpec s = spec;
        s.steps = N;
        ErrorRow row;
        row.N = N;
        row.error = std::abs(mild - ou_weak_value(s, OuLaw::Scheme));
        row.std_error = 0.0;
        row.samples = 0;
        table.rows.push_back(row);
    }
    std::sort(table.rows.begin(), table.rows.end(),
              [](const ErrorRow& a, const ErrorRow& b) { return a.N < b.N; });
    return table;
}

ErrorRow strong_error_mc(const ModelSpec& model, const OperatorSpec& op, const NoisePlan& plan,
                         long N, double p, const StrongMetric& metric, std::size_t samples,
                         const McOptions& opts) {
    if (samples < 2) throw std::invalid_argument("strong_error_mc: need at least 2 samples");
    auto eval = [&](std::uint64_t s, std::span<double> out) {
        const NoisePlan sp = plan.with_sample(s);
        SchemeConfig cfg{SchemeKind::ExpEuler, N, 0.0, &model, &op, sp};
        SpectralField diff = reference_solve(model, op, sp);
        const SpectralField y = run_scheme_final(cfg);
        for (int k = 0; k < diff.modes(); ++k) diff.coeffs[k] -= y.coeffs[k];
        out[0] = std::pow(metric_norm(diff, metric, p), p);
    };
    const McResult res = run_mc(samples, 1, opts, eval);
    ErrorRow row;
    row.N = N;
    const double mean_pow = res.mean(0);
    row.error = std::pow(mean_pow, 1.0 / p);
    // delta method: d/dm m^{1/p} = m^{1/p - 1} / p
    row.std_error = mean_pow > 0.0
                        ? res.std_error(0) * std::pow(mean_pow, 1.0 / p - 1.0) / p
                        : 0.0;
    row.samples = res.completed;
    row.aborted = res.aborted;
    return row;
}

} // namespace sheq
