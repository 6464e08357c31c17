#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hyperdet {

class Rng;

// Row-major view of a feature matrix. The growers and models never own the
// values; callers keep them alive for the duration of the call.
struct MatrixView {
    const double* data = nullptr;
    std::size_t rows = 0;
    std::size_t cols = 0;

    double at(std::size_t row, std::size_t col) const { return data[row * cols + col]; }
    std::span<const double> row(std::size_t r) const { return {data + r * cols, cols}; }
};

// One node of a binary decision tree. Internal nodes route x[feature] < threshold
// to `left` and the rest to `right`; leaves have feature == -1 and carry `value`.
// `cover` counts the (weighted) training rows that reached the node. The SHAP
// conditional-expectation walk relies on cover(left) + cover(right) == cover(node).
struct TreeNode {
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;
    double cover = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;  // preorder; nodes[0] is the root

    double predict(std::span<const double> x) const;
    // Cover-weighted mean leaf value: the tree's expected output over its own
    // training sample.
    double expected_value() const;
    int max_depth() const;
    std::size_t leaf_count() const;
};

// Classification tree on {0,1} labels with per-row integer weights (bootstrap
// multiplicities; weight 0 excludes a row). Splits maximize the weighted Gini
// impurity decrease over `mtry` randomly drawn candidate features per node
// (mtry >= cols means all features and draws nothing from `rng`); only strictly
// positive gains split, ties broken by lowest feature index then lowest
// threshold. Leaves store the weighted positive-class fraction; cover is the
// weight sum.
Tree grow_gini_tree(const MatrixView& x, std::span<const int> labels,
                    std::span<const std::uint32_t> weights, int max_depth, int mtry, Rng& rng);

// Newton regression tree on per-row (gradient, hessian) pairs. Split gain is
// (G_L^2/(H_L+l2) + G_R^2/(H_R+l2) - G^2/(H+l2))/2, split only when > 0; the
// leaf value is -shrinkage * G/(H+l2) and cover is the plain row count.
Tree grow_newton_tree(const MatrixView& x, std::span<const double> grad,
                      std::span<const double> hess, int max_depth, double l2_penalty,
                      double shrinkage);

}  // namespace hyperdet
