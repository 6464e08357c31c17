#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace hyperdet {

// Gap-imputation settings. process_noise / observation_noise are the
// fallback variances used when maximum-likelihood fitting on the observed
// segments is impossible (too few observations or zero variance); when the
// series supports it, both variances are fitted per channel.
struct ImputationConfig {
    int max_gap = 5;               // longest missing run that gets filled, in samples
    double mse_threshold = 15.0;   // calibration cutoff for choosing max_gap
    double process_noise = 1.0;    // fallback state-innovation variance, >= 0
    double observation_noise = 1.0;  // fallback measurement variance, > 0

    void validate() const;  // throws ConfigError on a violated invariant
};

// Local-level state-space model: state follows a random walk with variance q,
// observation adds noise with variance r. Exposed for calibration and tests.
struct LocalLevelParams {
    double process_noise = 1.0;
    double observation_noise = 1.0;
};

// Fits (q, r) by maximum likelihood on the observed entries, using the
// concentrated likelihood (golden-section search over the signal ratio q/r).
// Falls back to cfg values / sample variance when the data cannot support a fit.
LocalLevelParams fit_local_level(std::span<const std::optional<double>> values,
                                 const ImputationConfig& cfg);

// Kalman-smoother (RTS) state means over the full index range, missing entries
// handled by skipping the measurement update.
std::vector<double> smooth_local_level(std::span<const std::optional<double>> values,
                                       const LocalLevelParams& params);

// Replaces every maximal missing run of length <= cfg.max_gap with smoothed
// estimates. Longer runs stay missing; observed values are returned bit-unchanged.
// An all-missing input is returned unchanged (nothing to condition on).
std::vector<std::optional<double>> impute_series(std::span<const std::optional<double>> values,
                                                 const ImputationConfig& cfg);

struct GapCalibrationRow {
    int gap = 0;
    double mse = 0.0;
};

struct GapCalibration {
    std::vector<GapCalibrationRow> table;
    int chosen_max_gap = 0;  // largest candidate whose MSE < threshold, 0 if none
};

// For each candidate gap length k: repeatedly drop a random run of k values
// from a fresh copy of the complete series, impute it, and accumulate squared
// error against the dropped truth. MSE is averaged over all dropped cells.
GapCalibration calibrate_max_gap(std::span<const double> complete_series,
                                 std::span<const int> candidate_gaps, int trials,
                                 std::uint64_t seed, const ImputationConfig& cfg);

}  // namespace hyperdet
