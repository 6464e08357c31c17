#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hyperdet/model.hpp"
#include "hyperdet/tree.hpp"

namespace hyperdet {

// Additive attributions for one instance, in margin (log-odds) units:
// base_value + sum(values) equals the model margin within 1e-8.
struct ShapExplanation {
    std::vector<double> values;  // one per feature
    double base_value = 0.0;
    std::size_t instance = 0;    // row index into the explained matrix
};

// Exact path-dependent TreeSHAP for a single tree on its raw leaf-value scale.
// Conditional expectations use the tree's recorded cover counts. Adds the
// attributions into `phi` (size = feature count).
void tree_shap_single(const Tree& tree, std::span<const double> x, std::span<double> phi);

// Attributions for every row of `x` under a tree-ensemble model.
// GradientBoost margins are sums over trees, so per-tree attributions add
// directly (base = base margin + per-tree expectations). RandomForest
// attributions are computed on the leaf-fraction scale and rescaled through
// the clamped logit so additivity holds exactly in margin space. Non-tree
// models are rejected.
std::vector<ShapExplanation> explain_instances(const TrainedModel& model, const MatrixView& x,
                                               int threads = 0);

// ---------------------------------------------------------------------------
// Figure data
// ---------------------------------------------------------------------------

struct SummaryFeature {
    std::string name;
    double mean_abs_shap = 0.0;
    std::vector<std::pair<double, double>> points;  // (feature value, shap value) per instance
};

// Features ordered by descending mean |shap|, ties broken by name.
struct SummaryData {
    std::vector<SummaryFeature> features;
};

SummaryData summarize(std::span<const ShapExplanation> explanations, const MatrixView& x,
                      std::span<const std::string> feature_names);

struct DependenceData {
    std::string feature;
    std::vector<std::pair<double, double>> points;  // (value, shap) per instance, input order
};

DependenceData dependence(std::span<const ShapExplanation> explanations, const MatrixView& x,
                          std::span<const std::string> feature_names, std::string_view feature);

// `feature,mean_abs_shap,rank` in summary order.
std::string render_shap_summary_csv(const SummaryData& summary);
// Long form `feature,instance,feature_value,shap_value`, features in canonical
// order, instances in input order.
std::string render_shap_values_csv(std::span<const ShapExplanation> explanations,
                                   const MatrixView& x,
                                   std::span<const std::string> feature_names);

}  // namespace hyperdet
