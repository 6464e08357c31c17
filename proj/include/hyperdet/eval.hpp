#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hyperdet/features.hpp"
#include "hyperdet/model.hpp"
#include "hyperdet/sampling.hpp"

namespace hyperdet {

// Counts for "predict positive when score >= threshold".
struct ConfusionMatrix {
    std::int64_t tp = 0;
    std::int64_t fn = 0;
    std::int64_t fp = 0;
    std::int64_t tn = 0;
    double tpr = 0.0;
    double fpr = 0.0;
    double threshold = 0.0;
};

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0;
};

// Empirical ROC with tied scores grouped into single steps; auc is the
// trapezoidal integral, equivalently P(score+ > score-) + P(tie)/2.
struct RocCurve {
    std::vector<RocPoint> points;
    double auc = 0.0;
};

// Requires both classes present.
RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels);

// Threshold-selection regime for one confusion matrix:
//  - TprFloor: the largest threshold with TPR >= value (minimum FPR under the floor)
//  - FprCap:   the smallest threshold with FPR <= value (maximum TPR under the cap)
struct OperatingRegime {
    enum class Kind { TprFloor, FprCap };
    Kind kind = Kind::TprFloor;
    double value = 1.0;

    std::string label() const;
};

ConfusionMatrix matrix_at_threshold(std::span<const double> scores, std::span<const int> labels,
                                    double threshold);
ConfusionMatrix matrix_at_operating_point(std::span<const double> scores,
                                          std::span<const int> labels,
                                          const OperatingRegime& regime);

// (tp + tn) / total.
double accuracy(const ConfusionMatrix& m);

// Dietterich's 5x2cv paired t-test. differences[i][j] is the fold-j accuracy
// difference (A - B) in replication i.
struct CvComparison {
    double t_statistic = 0.0;
    double p_value = 1.0;
    int degrees_of_freedom = 5;
    std::array<std::array<double, 2>, 5> differences{};
    // Zero variance with a nonzero numerator: t is a +/-infinity sentinel.
    bool degenerate = false;
};

CvComparison cv5x2_from_differences(const std::array<std::array<double, 2>, 5>& differences);

// Five replications of participant-level 2-fold cross validation. Each training
// fold is upsampled with `resample` (fresh derived seed per fold); accuracies
// are evaluated on the untouched opposite fold at probability threshold 0.5.
// Returns [replication][fold][model] accuracies.
using CvAccuracyGrid = std::array<std::array<std::vector<double>, 2>, 5>;
CvAccuracyGrid cv5x2_accuracies(std::span<const ModelSpec> specs, const Dataset& data,
                                const ResampleSpec& resample, std::uint64_t seed,
                                int threads = 0);

CvComparison cv5x2_ttest(const ModelSpec& model_a, const ModelSpec& model_b, const Dataset& data,
                         const ResampleSpec& resample, std::uint64_t seed, int threads = 0);

// ---------------------------------------------------------------------------
// Report rendering
// ---------------------------------------------------------------------------

struct ModelEvaluation {
    std::string kind;
    RocCurve roc;
    std::vector<OperatingRegime> regimes;
    std::vector<ConfusionMatrix> matrices;  // parallel to regimes
    ConfusionMatrix at_half;                // fixed threshold 0.5
};

struct ComparisonRow {
    std::string model_a;
    std::string model_b;
    CvComparison result;
};

// Builds a ModelEvaluation for one model's scores on a labeled set.
ModelEvaluation evaluate_scores(std::string kind, std::span<const double> scores,
                                std::span<const int> labels,
                                std::span<const OperatingRegime> regimes);

// Deterministic plain-text report: one section per model (AUC, the regime
// matrices, accuracy at the balanced point and at 0.5) plus the pairwise
// comparison table when `comparisons` is non-empty.
std::string render_evaluation_report(std::span<const ModelEvaluation> models,
                                     std::span<const ComparisonRow> comparisons);

// ROC curve file: `fpr,tpr,threshold` rows at 17 significant digits.
std::string render_roc_csv(const RocCurve& roc);

}  // namespace hyperdet
