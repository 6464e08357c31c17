#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hyperdet/windowing.hpp"

namespace hyperdet {

// Canonical feature order. File columns, model weight vectors, and SHAP
// outputs all follow this order.
inline constexpr std::array<std::string_view, 9> kFeatureNames = {
    "hrmean", "hrmax", "hrmin", "hrsd", "hrrange",
    "linaccmean", "linaccmax", "linaccmin", "linaccrange",
};
inline constexpr std::size_t kNumFeatures = kFeatureNames.size();

// Returns the index of `name` in kFeatureNames, or nullopt.
std::optional<std::size_t> feature_index(std::string_view name);

// Euclidean norm of the three acceleration components at one instant.
inline double acc_magnitude(double ax, double ay, double az) {
    return std::sqrt(ax * ax + ay * ay + az * az);
}

// The nine time-domain features of one window plus label and provenance.
struct FeatureVector {
    double hrmean = 0, hrmax = 0, hrmin = 0, hrsd = 0, hrrange = 0;
    double linaccmean = 0, linaccmax = 0, linaccmin = 0, linaccrange = 0;
    int label = 0;
    std::string participant_id;
    std::int64_t window_start = 0;

    std::array<double, kNumFeatures> values() const {
        return {hrmean, hrmax, hrmin, hrsd, hrrange,
                linaccmean, linaccmax, linaccmin, linaccrange};
    }
};

using Dataset = std::vector<FeatureVector>;

struct FeatureResult {
    std::optional<FeatureVector> vec;
    std::string reject_reason;  // set when vec is empty
};

// Statistics run over the present (post-imputation) values only. hrsd uses
// the sample (n-1) denominator. Acceleration statistics are computed over the
// per-second magnitudes. A window with fewer than 2 present hr values or
// fewer than 2 present magnitudes is rejected with a named reason.
FeatureResult extract_features(const Window& w);

// Feature file, header exactly:
// participant_id,window_start,hrmean,hrmax,hrmin,hrsd,hrrange,linaccmean,linaccmax,linaccmin,linaccrange,label
// Reals carry 17 significant digits so a round trip reproduces the doubles exactly.
void write_features(const Dataset& rows, const std::filesystem::path& path);
Dataset read_features(const std::filesystem::path& path);

// Distinct participant ids in first-occurrence-of-sorted order.
std::vector<std::string> participants(const Dataset& data);
// (negatives, positives)
std::pair<std::size_t, std::size_t> class_counts(const Dataset& data);

}  // namespace hyperdet
