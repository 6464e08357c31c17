#include "hyperdet/kalman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hyperdet/error.hpp"
#include "hyperdet/rng.hpp"
#include "hyperdet/stats.hpp"

namespace hyperdet {

void ImputationConfig::validate() const {
    if (max_gap < 0) throw ConfigError("ImputationConfig: max_gap must be >= 0");
    if (!(mse_threshold > 0.0)) throw ConfigError("ImputationConfig: mse_threshold must be > 0");
    if (!(process_noise >= 0.0)) throw ConfigError("ImputationConfig: process_noise must be >= 0");
    if (!(observation_noise > 0.0)) throw ConfigError("ImputationConfig: observation_noise must be > 0");
}

namespace {

struct FilterPass {
    std::vector<double> filt_mean, filt_var, pred_mean, pred_var;
    double loglik = 0.0;   // prediction-error decomposition, diffuse first obs excluded
    double sum_sq_scaled = 0.0;  // sum of v^2 / F for the concentrated likelihood
    double sum_log_f = 0.0;
    int n_lik = 0;
    int first_obs = -1;
};

// One forward pass of the local-level filter. Missing observations skip the
// measurement update. The state before the first observation is diffuse; the
// first observation initializes it exactly.
FilterPass run_filter(std::span<const std::optional<double>> values, double q, double r) {
    const std::size_t n = values.size();
    FilterPass fp;
    fp.filt_mean.assign(n, 0.0);
    fp.filt_var.assign(n, 0.0);
    fp.pred_mean.assign(n, 0.0);
    fp.pred_var.assign(n, 0.0);

    double m = 0.0, p = 0.0;
    bool initialized = false;
    for (std::size_t t = 0; t < n; ++t) {
        if (!initialized) {
            if (values[t]) {
                m = *values[t];
                p = r;  // diffuse prior collapsed onto the first observation
                fp.first_obs = static_cast<int>(t);
                initialized = true;
            }
            fp.pred_mean[t] = m;
            fp.pred_var[t] = p;
            fp.filt_mean[t] = m;
            fp.filt_var[t] = p;
            continue;
        }
        const double m_pred = m;
        const double p_pred = p + q;
        fp.pred_mean[t] = m_pred;
        fp.pred_var[t] = p_pred;
        if (values[t]) {
            const double f = p_pred + r;
            const double v = *values[t] - m_pred;
            const double k = p_pred / f;
            m = m_pred + k * v;
            p = p_pred - k * p_pred;
            fp.loglik += -0.5 * (std::log(2.0 * M_PI) + std::log(f) + v * v / f);
            fp.sum_sq_scaled += v * v / f;
            fp.sum_log_f += std::log(f);
            ++fp.n_lik;
        } else {
            m = m_pred;
            p = p_pred;
        }
        fp.filt_mean[t] = m;
        fp.filt_var[t] = p;
    }
    return fp;
}

std::vector<double> rts_smooth(std::span<const std::optional<double>> values,
                               const FilterPass& fp) {
    const std::size_t n = values.size();
    std::vector<double> smooth(fp.filt_mean);
    if (fp.first_obs < 0 || n == 0) return smooth;
    for (std::size_t i = n - 1; i-- > static_cast<std::size_t>(fp.first_obs);) {
        const double p_pred_next = fp.pred_var[i + 1];
        if (p_pred_next <= 0.0) continue;  // exact observation, nothing to pull back
        const double gain = fp.filt_var[i] / p_pred_next;
        smooth[i] = fp.filt_mean[i] + gain * (smooth[i + 1] - fp.pred_mean[i + 1]);
    }
    // Before the first observation the random walk carries no drift: the
    // smoothed mean is constant backwards.
    for (int t = 0; t < fp.first_obs; ++t) smooth[t] = smooth[fp.first_obs];
    return smooth;
}

// Concentrated log-likelihood at signal ratio psi = q / r; also returns the
// closed-form observation-variance estimate.
double concentrated_loglik(std::span<const std::optional<double>> values, double psi,
                           double* r_hat_out) {
    const FilterPass fp = run_filter(values, psi, 1.0);
    if (fp.n_lik < 1 || fp.sum_sq_scaled <= 0.0) {
        if (r_hat_out) *r_hat_out = 0.0;
        return -std::numeric_limits<double>::infinity();
    }
    const double r_hat = fp.sum_sq_scaled / fp.n_lik;
    if (r_hat_out) *r_hat_out = r_hat;
    return -0.5 * fp.n_lik * (std::log(r_hat) + 1.0) - 0.5 * fp.sum_log_f;
}

}  // namespace

LocalLevelParams fit_local_level(std::span<const std::optional<double>> values,
                                 const ImputationConfig& cfg) {
    std::vector<double> observed;
    for (const auto& v : values) {
        if (v) observed.push_back(*v);
    }
    const double var = sample_variance(observed);
    LocalLevelParams fallback;
    fallback.process_noise = cfg.process_noise;
    fallback.observation_noise = var > 1e-12 ? var : cfg.observation_noise;
    if (observed.size() < 8 || var <= 1e-12) return fallback;

    // Golden-section search over log(psi). The concentrated likelihood of the
    // local-level model is smooth and unimodal in practice on this range.
    double lo = -16.0, hi = 8.0;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = hi - gr * (hi - lo);
    double b = lo + gr * (hi - lo);
    double fa = concentrated_loglik(values, std::exp(a), nullptr);
    double fb = concentrated_loglik(values, std::exp(b), nullptr);
    for (int iter = 0; iter < 60; ++iter) {
        if (fa < fb) {
            lo = a;
            a = b;
            fa = fb;
            b = lo + gr * (hi - lo);
            fb = concentrated_loglik(values, std::exp(b), nullptr);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - gr * (hi - lo);
            fa = concentrated_loglik(values, std::exp(a), nullptr);
        }
    }
    const double psi = std::exp(0.5 * (lo + hi));
    double r_hat = 0.0;
    const double ll = concentrated_loglik(values, psi, &r_hat);
    if (!std::isfinite(ll) || r_hat <= 1e-12) return fallback;
    return {psi * r_hat, r_hat};
}

std::vector<double> smooth_local_level(std::span<const std::optional<double>> values,
                                       const LocalLevelParams& params) {
    const FilterPass fp = run_filter(values, params.process_noise, params.observation_noise);
    return rts_smooth(values, fp);
}

std::vector<std::optional<double>> impute_series(std::span<const std::optional<double>> values,
                                                 const ImputationConfig& cfg) {
    cfg.validate();
    if (values.empty()) throw DataError("impute_series: empty series");
    std::vector<std::optional<double>> out(values.begin(), values.end());
    const bool any_observed = std::any_of(out.begin(), out.end(),
                                          [](const auto& v) { return v.has_value(); });
    if (!any_observed || cfg.max_gap == 0) return out;

    const LocalLevelParams params = fit_local_level(values, cfg);
    const std::vector<double> smooth = smooth_local_level(values, params);

    std::size_t i = 0;
    const std::size_t n = out.size();
    while (i < n) {
        if (out[i].has_value()) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && !out[j].has_value()) ++j;
        if (j - i <= static_cast<std::size_t>(cfg.max_gap)) {
            for (std::size_t k = i; k < j; ++k) out[k] = smooth[k];
        }
        i = j;
    }
    return out;
}

GapCalibration calibrate_max_gap(std::span<const double> complete_series,
                                 std::span<const int> candidate_gaps, int trials,
                                 std::uint64_t seed, const ImputationConfig& cfg) {
    cfg.validate();
    if (candidate_gaps.empty()) throw ConfigError("calibrate_max_gap: no candidate gaps");
    if (trials < 1) throw ConfigError("calibrate_max_gap: trials must be >= 1");
    const std::size_t n = complete_series.size();
    int max_candidate = 0;
    for (const int k : candidate_gaps) {
        if (k < 1) throw ConfigError("calibrate_max_gap: candidate gap must be >= 1");
        if (static_cast<std::size_t>(k) >= n) {
            throw DataError("calibrate_max_gap: candidate gap " + std::to_string(k) +
                            " is not shorter than the series (" + std::to_string(n) + ")");
        }
        max_candidate = std::max(max_candidate, k);
    }
    if (n < 10 * static_cast<std::size_t>(max_candidate)) {
        throw DataError("calibrate_max_gap: series must be at least 10x the largest candidate gap");
    }

    const Rng root(seed);
    GapCalibration result;
    for (std::size_t ci = 0; ci < candidate_gaps.size(); ++ci) {
        const int k = candidate_gaps[ci];
        Rng rng = root.derive("calibrate-gap", static_cast<std::uint64_t>(k));
        ImputationConfig trial_cfg = cfg;
        trial_cfg.max_gap = k;
        double sum_sq = 0.0;
        for (int t = 0; t < trials; ++t) {
            const std::size_t start = rng.uniform_int(n - static_cast<std::size_t>(k) + 1);
            std::vector<std::optional<double>> masked(n);
            for (std::size_t i = 0; i < n; ++i) masked[i] = complete_series[i];
            for (std::size_t i = start; i < start + static_cast<std::size_t>(k); ++i) {
                masked[i] = std::nullopt;
            }
            const auto imputed = impute_series(masked, trial_cfg);
            for (std::size_t i = start; i < start + static_cast<std::size_t>(k); ++i) {
                const double est = imputed[i].value();
                const double err = est - complete_series[i];
                sum_sq += err * err;
            }
        }
        result.table.push_back({k, sum_sq / (static_cast<double>(trials) * k)});
    }
    for (const auto& row : result.table) {
        if (row.mse < cfg.mse_threshold) {
            result.chosen_max_gap = std::max(result.chosen_max_gap, row.gap);
        }
    }
    return result;
}

}  // namespace hyperdet
