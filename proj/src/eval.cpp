#include "hyperdet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "hyperdet/error.hpp"
#include "hyperdet/rng.hpp"
#include "hyperdet/stats.hpp"
#include "hyperdet/text.hpp"

namespace hyperdet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ScoreSweep {
    // Distinct scores in descending order with cumulative positive/negative
    // counts at threshold == score (prediction rule: score >= threshold).
    std::vector<double> thresholds;
    std::vector<std::int64_t> tp;
    std::vector<std::int64_t> fp;
    std::int64_t positives = 0;
    std::int64_t negatives = 0;
};

ScoreSweep sweep_scores(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw DataError("scores and labels differ in length");
    if (scores.empty()) throw DataError("cannot evaluate an empty score set");
    for (const double s : scores) {
        if (std::isnan(s)) throw DataError("scores contain NaN");
    }

    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    ScoreSweep sweep;
    for (const int y : labels) y ? ++sweep.positives : ++sweep.negatives;
    if (sweep.positives == 0 || sweep.negatives == 0) {
        throw DataError("evaluation requires both classes in the labels");
    }

    std::int64_t tp = 0, fp = 0;
    std::size_t at = 0;
    while (at < idx.size()) {
        const double s = scores[idx[at]];
        while (at < idx.size() && scores[idx[at]] == s) {
            labels[idx[at]] ? ++tp : ++fp;
            ++at;
        }
        sweep.thresholds.push_back(s);
        sweep.tp.push_back(tp);
        sweep.fp.push_back(fp);
    }
    return sweep;
}

ConfusionMatrix matrix_from_counts(std::int64_t tp, std::int64_t fp, std::int64_t positives,
                                   std::int64_t negatives, double threshold) {
    ConfusionMatrix m;
    m.tp = tp;
    m.fp = fp;
    m.fn = positives - tp;
    m.tn = negatives - fp;
    m.tpr = static_cast<double>(tp) / static_cast<double>(positives);
    m.fpr = static_cast<double>(fp) / static_cast<double>(negatives);
    m.threshold = threshold;
    return m;
}

}  // namespace

RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels) {
    const ScoreSweep sweep = sweep_scores(scores, labels);
    RocCurve roc;
    roc.points.push_back({0.0, 0.0, kInf});
    for (std::size_t k = 0; k < sweep.thresholds.size(); ++k) {
        roc.points.push_back({static_cast<double>(sweep.fp[k]) / static_cast<double>(sweep.negatives),
                              static_cast<double>(sweep.tp[k]) / static_cast<double>(sweep.positives),
                              sweep.thresholds[k]});
    }
    double auc = 0.0;
    for (std::size_t k = 1; k < roc.points.size(); ++k) {
        const RocPoint& a = roc.points[k - 1];
        const RocPoint& b = roc.points[k];
        auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
    }
    roc.auc = auc;
    return roc;
}

std::string OperatingRegime::label() const {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s %.2f", kind == Kind::TprFloor ? "tpr_floor" : "fpr_cap",
                  value);
    return buf;
}

ConfusionMatrix matrix_at_threshold(std::span<const double> scores, std::span<const int> labels,
                                    double threshold) {
    std::int64_t tp = 0, fp = 0, positives = 0, negatives = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i]) {
            ++positives;
            tp += scores[i] >= threshold;
        } else {
            ++negatives;
            fp += scores[i] >= threshold;
        }
    }
    if (positives == 0 || negatives == 0) {
        throw DataError("evaluation requires both classes in the labels");
    }
    return matrix_from_counts(tp, fp, positives, negatives, threshold);
}

ConfusionMatrix matrix_at_operating_point(std::span<const double> scores,
                                          std::span<const int> labels,
                                          const OperatingRegime& regime) {
    const ScoreSweep sweep = sweep_scores(scores, labels);
    const std::size_t n = sweep.thresholds.size();

    if (regime.kind == OperatingRegime::Kind::TprFloor) {
        // TPR grows as the threshold walks down the distinct scores; stop at
        // the first (largest) threshold meeting the floor.
        for (std::size_t k = 0; k < n; ++k) {
            const double tpr =
                static_cast<double>(sweep.tp[k]) / static_cast<double>(sweep.positives);
            if (tpr >= regime.value) {
                return matrix_from_counts(sweep.tp[k], sweep.fp[k], sweep.positives,
                                          sweep.negatives, sweep.thresholds[k]);
            }
        }
        // Only reachable for floor = 0 with every score below it: predict nothing.
        return matrix_from_counts(0, 0, sweep.positives, sweep.negatives, kInf);
    }

    // FprCap: feasible thresholds are a prefix of the descending sweep; take the
    // smallest (last) one, maximizing TPR. The empty prediction set (threshold
    // above every score) keeps FPR = 0, so a cap is always feasible.
    std::size_t chosen = n;  // sentinel: predict nothing
    for (std::size_t k = 0; k < n; ++k) {
        const double fpr = static_cast<double>(sweep.fp[k]) / static_cast<double>(sweep.negatives);
        if (fpr <= regime.value) {
            chosen = k;
        } else {
            break;
        }
    }
    if (chosen == n) return matrix_from_counts(0, 0, sweep.positives, sweep.negatives, kInf);
    return matrix_from_counts(sweep.tp[chosen], sweep.fp[chosen], sweep.positives, sweep.negatives,
                              sweep.thresholds[chosen]);
}

double accuracy(const ConfusionMatrix& m) {
    const std::int64_t total = m.tp + m.fn + m.fp + m.tn;
    if (total <= 0) throw DataError("accuracy of an empty confusion matrix");
    return static_cast<double>(m.tp + m.tn) / static_cast<double>(total);
}

CvComparison cv5x2_from_differences(const std::array<std::array<double, 2>, 5>& differences) {
    CvComparison out;
    out.differences = differences;
    double variance_sum = 0.0;
    for (const auto& replication : differences) {
        const double mean_i = (replication[0] + replication[1]) / 2.0;
        const double d0 = replication[0] - mean_i;
        const double d1 = replication[1] - mean_i;
        variance_sum += d0 * d0 + d1 * d1;
    }
    const double denom = std::sqrt(variance_sum / 5.0);
    if (denom == 0.0) {
        if (differences[0][0] == 0.0) {
            out.t_statistic = 0.0;
            out.p_value = 1.0;
        } else {
            out.t_statistic = differences[0][0] > 0.0 ? kInf : -kInf;
            out.p_value = 0.0;
            out.degenerate = true;
        }
        return out;
    }
    out.t_statistic = differences[0][0] / denom;
    out.p_value = student_t_two_sided_p(out.t_statistic, out.degrees_of_freedom);
    return out;
}

CvAccuracyGrid cv5x2_accuracies(std::span<const ModelSpec> specs, const Dataset& data,
                                const ResampleSpec& resample, std::uint64_t seed, int threads) {
    const Rng root(seed);
    CvAccuracyGrid grid;
    for (std::size_t rep = 0; rep < 5; ++rep) {
        const SplitResult halves =
            split_by_participant(data, 0.5, root.derive("cv5x2-split", rep).seed());
        const std::array<const Dataset*, 2> folds = {&halves.train, &halves.test};
        for (std::size_t fold = 0; fold < 2; ++fold) {
            ResampleSpec fold_resample = resample;
            fold_resample.seed = root.derive("cv5x2-upsample", rep * 2 + fold).seed();
            const Dataset train_rows = upsample_minority(*folds[fold], fold_resample);
            const Dataset& test_rows = *folds[1 - fold];

            std::vector<int> labels(test_rows.size());
            for (std::size_t i = 0; i < test_rows.size(); ++i) labels[i] = test_rows[i].label;

            grid[rep][fold].reserve(specs.size());
            for (std::size_t m = 0; m < specs.size(); ++m) {
                const auto model =
                    train(specs[m], train_rows,
                          root.derive("cv5x2-train", (rep * 2 + fold) * specs.size() + m).seed(),
                          threads);
                const std::vector<double> scores = predict_proba_all(*model, test_rows, threads);
                grid[rep][fold].push_back(accuracy(matrix_at_threshold(scores, labels, 0.5)));
            }
        }
    }
    return grid;
}

CvComparison cv5x2_ttest(const ModelSpec& model_a, const ModelSpec& model_b, const Dataset& data,
                         const ResampleSpec& resample, std::uint64_t seed, int threads) {
    const std::array<ModelSpec, 2> specs = {model_a, model_b};
    const CvAccuracyGrid grid = cv5x2_accuracies(specs, data, resample, seed, threads);
    std::array<std::array<double, 2>, 5> differences{};
    for (std::size_t rep = 0; rep < 5; ++rep) {
        for (std::size_t fold = 0; fold < 2; ++fold) {
            differences[rep][fold] = grid[rep][fold][0] - grid[rep][fold][1];
        }
    }
    return cv5x2_from_differences(differences);
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace {

std::string fixed6(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

void render_matrix(std::ostringstream& out, const std::string& title, const ConfusionMatrix& m) {
    out << "  " << title << " (threshold " << fixed6(m.threshold) << ")\n"
        << "    TP " << m.tp << "  FN " << m.fn << "  FP " << m.fp << "  TN " << m.tn << "  TPR "
        << fixed6(m.tpr) << "  FPR " << fixed6(m.fpr) << "  accuracy " << fixed6(accuracy(m))
        << "\n";
}

}  // namespace

ModelEvaluation evaluate_scores(std::string kind, std::span<const double> scores,
                                std::span<const int> labels,
                                std::span<const OperatingRegime> regimes) {
    ModelEvaluation eval;
    eval.kind = std::move(kind);
    eval.roc = roc_auc(scores, labels);
    eval.regimes.assign(regimes.begin(), regimes.end());
    for (const OperatingRegime& regime : regimes) {
        eval.matrices.push_back(matrix_at_operating_point(scores, labels, regime));
    }
    eval.at_half = matrix_at_threshold(scores, labels, 0.5);
    return eval;
}

std::string render_evaluation_report(std::span<const ModelEvaluation> models,
                                     std::span<const ComparisonRow> comparisons) {
    std::ostringstream out;
    out << "=== Evaluation report ===\n";
    for (const ModelEvaluation& m : models) {
        out << "\nmodel: " << m.kind << "\n"
            << "  AUC " << fixed6(m.roc.auc) << "\n";
        for (std::size_t k = 0; k < m.matrices.size(); ++k) {
            render_matrix(out, m.regimes[k].label(), m.matrices[k]);
        }
        render_matrix(out, "threshold 0.50", m.at_half);
    }
    if (!comparisons.empty()) {
        out << "\npairwise 5x2cv comparisons (accuracy differences, df=5)\n";
        for (const ComparisonRow& row : comparisons) {
            out << "  " << row.model_a << " vs " << row.model_b << ": t "
                << fixed6(row.result.t_statistic) << "  p " << fixed6(row.result.p_value);
            if (row.result.degenerate) out << "  (degenerate: zero variance)";
            out << "\n";
        }
    }
    return out.str();
}

std::string render_roc_csv(const RocCurve& roc) {
    std::string out = "fpr,tpr,threshold\n";
    for (const RocPoint& p : roc.points) {
        out += format_real(p.fpr);
        out += ',';
        out += format_real(p.tpr);
        out += ',';
        out += format_real(p.threshold);
        out += '\n';
    }
    return out;
}

}  // namespace hyperdet
