#include "hyperdet/shap.hpp"

#include <algorithm>
#include <cmath>

#include "hyperdet/error.hpp"
#include "hyperdet/parallel.hpp"
#include "hyperdet/stats.hpp"
#include "hyperdet/text.hpp"

namespace hyperdet {

namespace {

// One element of the unique-feature path maintained by the TreeSHAP recursion.
// pweight of element i is the permutation weight of paths with i-1 "one"
// (feature-present) choices among the ancestors.
struct PathElement {
    int feature = -1;
    double zero_fraction = 0.0;  // cover fraction flowing down when the feature is absent
    double one_fraction = 0.0;   // 1 when the instance follows this branch, else 0
    double pweight = 0.0;
};

void extend_path(PathElement* path, int depth, double zero_fraction, double one_fraction,
                 int feature) {
    path[depth] = {feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0};
    for (int i = depth - 1; i >= 0; --i) {
        path[i + 1].pweight +=
            one_fraction * path[i].pweight * (i + 1) / static_cast<double>(depth + 1);
        path[i].pweight = zero_fraction * path[i].pweight * (depth - i) /
                          static_cast<double>(depth + 1);
    }
}

void unwind_path(PathElement* path, int depth, int index) {
    const double one_fraction = path[index].one_fraction;
    const double zero_fraction = path[index].zero_fraction;
    double next_one_portion = path[depth].pweight;

    for (int i = depth - 1; i >= 0; --i) {
        if (one_fraction != 0.0) {
            const double tmp = path[i].pweight;
            path[i].pweight =
                next_one_portion * (depth + 1) / static_cast<double>((i + 1) * one_fraction);
            next_one_portion = tmp - path[i].pweight * zero_fraction * (depth - i) /
                                         static_cast<double>(depth + 1);
        } else {
            path[i].pweight =
                path[i].pweight * (depth + 1) / (zero_fraction * static_cast<double>(depth - i));
        }
    }
    for (int i = index; i < depth; ++i) {
        path[i].feature = path[i + 1].feature;
        path[i].zero_fraction = path[i + 1].zero_fraction;
        path[i].one_fraction = path[i + 1].one_fraction;
    }
}

double unwound_path_sum(const PathElement* path, int depth, int index) {
    const double one_fraction = path[index].one_fraction;
    const double zero_fraction = path[index].zero_fraction;
    double next_one_portion = path[depth].pweight;
    double total = 0.0;

    for (int i = depth - 1; i >= 0; --i) {
        if (one_fraction != 0.0) {
            const double tmp =
                next_one_portion * (depth + 1) / static_cast<double>((i + 1) * one_fraction);
            total += tmp;
            next_one_portion = path[i].pweight - tmp * zero_fraction * (depth - i) /
                                                     static_cast<double>(depth + 1);
        } else if (zero_fraction != 0.0) {
            total +=
                path[i].pweight / zero_fraction * (depth + 1) / static_cast<double>(depth - i);
        }
    }
    return total;
}

// The polynomial-time recursion of path-dependent TreeSHAP: walks every path,
// maintaining an extension of the unique features split on so far, and deposits
// each leaf's contribution into phi weighted by the permutation sums.
void shap_recurse(const Tree& tree, std::span<const double> x, std::span<double> phi,
                  std::int32_t node_index, int depth, PathElement* parent_path,
                  double parent_zero_fraction, double parent_one_fraction, int parent_feature) {
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(node_index)];
    PathElement* path = parent_path + depth + 1;
    std::copy(parent_path, parent_path + depth + 1, path);
    extend_path(path, depth, parent_zero_fraction, parent_one_fraction, parent_feature);

    if (node.is_leaf()) {
        for (int i = 1; i <= depth; ++i) {
            const double w = unwound_path_sum(path, depth, i);
            phi[static_cast<std::size_t>(path[i].feature)] +=
                w * (path[i].one_fraction - path[i].zero_fraction) * node.value;
        }
        return;
    }

    const bool goes_left = x[static_cast<std::size_t>(node.feature)] < node.threshold;
    const std::int32_t hot = goes_left ? node.left : node.right;
    const std::int32_t cold = goes_left ? node.right : node.left;
    const double hot_zero_fraction =
        tree.nodes[static_cast<std::size_t>(hot)].cover / node.cover;
    const double cold_zero_fraction =
        tree.nodes[static_cast<std::size_t>(cold)].cover / node.cover;

    // If this feature already sits on the path, undo that extension so it can
    // be redone with the combined fractions.
    double incoming_zero_fraction = 1.0;
    double incoming_one_fraction = 1.0;
    int path_index = 0;
    while (path_index <= depth && path[path_index].feature != node.feature) ++path_index;
    if (path_index != depth + 1) {
        incoming_zero_fraction = path[path_index].zero_fraction;
        incoming_one_fraction = path[path_index].one_fraction;
        unwind_path(path, depth, path_index);
        --depth;
    }

    shap_recurse(tree, x, phi, hot, depth + 1, path,
                 hot_zero_fraction * incoming_zero_fraction, incoming_one_fraction, node.feature);
    shap_recurse(tree, x, phi, cold, depth + 1, path,
                 cold_zero_fraction * incoming_zero_fraction, 0.0, node.feature);
}

}  // namespace

void tree_shap_single(const Tree& tree, std::span<const double> x, std::span<double> phi) {
    const int max_depth = tree.max_depth() + 2;
    std::vector<PathElement> path_storage(
        static_cast<std::size_t>(max_depth * (max_depth + 1)) / 2);
    shap_recurse(tree, x, phi, 0, 0, path_storage.data(), 1.0, 1.0, -1);
}

namespace {

ShapExplanation explain_boost(const BoostModel& model, std::span<const double> x,
                              std::size_t instance, std::size_t n_features) {
    ShapExplanation e;
    e.instance = instance;
    e.values.assign(n_features, 0.0);
    e.base_value = model.base_margin();
    for (const Tree& t : model.trees()) {
        tree_shap_single(t, x, e.values);
        e.base_value += t.expected_value();
    }
    return e;
}

ShapExplanation explain_forest(const ForestModel& model, std::span<const double> x,
                               std::size_t instance, std::size_t n_features) {
    const std::vector<Tree>& trees = model.trees();
    ShapExplanation e;
    e.instance = instance;
    e.values.assign(n_features, 0.0);

    double base_fraction = 0.0;
    for (const Tree& t : trees) {
        tree_shap_single(t, x, e.values);
        base_fraction += t.expected_value();
    }
    const double inv = 1.0 / static_cast<double>(trees.size());
    base_fraction *= inv;
    for (double& v : e.values) v *= inv;

    // Rescale the fraction-scale attributions into margin space. The clamped
    // logit is monotone, so the proportional factor is finite and additivity
    // base + sum(phi) = margin transfers exactly.
    const double fraction = model.fraction(x);
    const double margin = clamped_logit(fraction);
    const double base_margin = clamped_logit(base_fraction);
    e.base_value = base_margin;
    const double denom = fraction - base_fraction;
    if (denom == 0.0) {
        std::fill(e.values.begin(), e.values.end(), 0.0);
        return e;
    }
    const double scale = (margin - base_margin) / denom;
    for (double& v : e.values) v *= scale;
    return e;
}

}  // namespace

std::vector<ShapExplanation> explain_instances(const TrainedModel& model, const MatrixView& x,
                                               int threads) {
    const auto* forest = dynamic_cast<const ForestModel*>(&model);
    const auto* boost = dynamic_cast<const BoostModel*>(&model);
    if (forest == nullptr && boost == nullptr) {
        throw ConfigError("SHAP explanations support the tree-ensemble models only; got '" +
                          std::string(model.kind()) + "'");
    }
    if (x.cols != model.feature_names().size()) {
        throw DataError("explain_instances: feature count mismatch");
    }
    std::vector<ShapExplanation> out(x.rows);
    parallel_for(
        x.rows,
        [&](std::size_t i) {
            out[i] = forest != nullptr ? explain_forest(*forest, x.row(i), i, x.cols)
                                       : explain_boost(*boost, x.row(i), i, x.cols);
        },
        threads);
    return out;
}

SummaryData summarize(std::span<const ShapExplanation> explanations, const MatrixView& x,
                      std::span<const std::string> feature_names) {
    if (explanations.empty()) throw DataError("summarize: no explanations given");
    for (const ShapExplanation& e : explanations) {
        if (e.values.size() != feature_names.size()) {
            throw DataError("summarize: explanation dimension mismatch");
        }
    }
    SummaryData summary;
    summary.features.resize(feature_names.size());
    for (std::size_t f = 0; f < feature_names.size(); ++f) {
        SummaryFeature& entry = summary.features[f];
        entry.name = feature_names[f];
        entry.points.reserve(explanations.size());
        double abs_sum = 0.0;
        for (const ShapExplanation& e : explanations) {
            abs_sum += std::abs(e.values[f]);
            entry.points.emplace_back(x.at(e.instance, f), e.values[f]);
        }
        entry.mean_abs_shap = abs_sum / static_cast<double>(explanations.size());
    }
    std::sort(summary.features.begin(), summary.features.end(),
              [](const SummaryFeature& a, const SummaryFeature& b) {
                  if (a.mean_abs_shap != b.mean_abs_shap) return a.mean_abs_shap > b.mean_abs_shap;
                  return a.name < b.name;
              });
    return summary;
}

DependenceData dependence(std::span<const ShapExplanation> explanations, const MatrixView& x,
                          std::span<const std::string> feature_names, std::string_view feature) {
    const auto it = std::find(feature_names.begin(), feature_names.end(), feature);
    if (it == feature_names.end()) {
        throw DataError("dependence: unknown feature '" + std::string(feature) + "'");
    }
    const auto f = static_cast<std::size_t>(it - feature_names.begin());
    DependenceData dep;
    dep.feature = std::string(feature);
    dep.points.reserve(explanations.size());
    for (const ShapExplanation& e : explanations) {
        dep.points.emplace_back(x.at(e.instance, f), e.values[f]);
    }
    return dep;
}

std::string render_shap_summary_csv(const SummaryData& summary) {
    std::string out = "feature,mean_abs_shap,rank\n";
    for (std::size_t rank = 0; rank < summary.features.size(); ++rank) {
        const SummaryFeature& f = summary.features[rank];
        out += f.name;
        out += ',';
        out += format_real(f.mean_abs_shap);
        out += ',';
        out += format_int(static_cast<std::int64_t>(rank) + 1);
        out += '\n';
    }
    return out;
}

std::string render_shap_values_csv(std::span<const ShapExplanation> explanations,
                                   const MatrixView& x,
                                   std::span<const std::string> feature_names) {
    std::string out = "feature,instance,feature_value,shap_value\n";
    for (std::size_t f = 0; f < feature_names.size(); ++f) {
        for (const ShapExplanation& e : explanations) {
            out += feature_names[f];
            out += ',';
            out += format_int(static_cast<std::int64_t>(e.instance));
            out += ',';
            out += format_real(x.at(e.instance, f));
            out += ',';
            out += format_real(e.values[f]);
            out += '\n';
        }
    }
    return out;
}

}  // namespace hyperdet
