#include "hyperdet/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hyperdet/rng.hpp"

namespace hyperdet {

double Tree::predict(std::span<const double> x) const {
    std::int32_t at = 0;
    while (!nodes[at].is_leaf()) {
        const TreeNode& n = nodes[at];
        at = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
    }
    return nodes[at].value;
}

double Tree::expected_value() const {
    double sum = 0.0;
    for (const TreeNode& n : nodes) {
        if (n.is_leaf()) sum += n.cover * n.value;
    }
    return sum / nodes[0].cover;
}

int Tree::max_depth() const {
    // Depth by walking parents is awkward in preorder storage; recurse instead.
    struct Walk {
        const std::vector<TreeNode>& nodes;
        int depth(std::int32_t at) const {
            const TreeNode& n = nodes[at];
            if (n.is_leaf()) return 0;
            return 1 + std::max(depth(n.left), depth(n.right));
        }
    };
    return Walk{nodes}.depth(0);
}

std::size_t Tree::leaf_count() const {
    std::size_t count = 0;
    for (const TreeNode& n : nodes) count += n.is_leaf();
    return count;
}

namespace {

// Split threshold strictly above `low` and at most `high`, so that the rows
// counted left by the prefix scan (value <= low) are exactly those routed left
// by x < threshold.
double split_threshold(double low, double high) {
    const double mid = low + (high - low) / 2.0;
    return mid > low ? mid : high;
}

// The growers share one presort-and-partition core: each node owns a segment
// [begin,end) of per-feature row orderings, scans every candidate feature in
// value order accumulating (a, b) statistics, and stably partitions all
// orderings by the winning split. Criterion policies supply the statistics and
// the gain/leaf semantics.
template <class Criterion>
class Grower {
public:
    Grower(const MatrixView& x, const Criterion& crit, int max_depth, int mtry, Rng* rng)
        : x_(x), crit_(crit), max_depth_(max_depth), mtry_(mtry), rng_(rng) {}

    Tree grow(std::span<const std::int32_t> rows) {
        order_.assign(x_.cols, {});
        for (std::size_t f = 0; f < x_.cols; ++f) {
            auto& ord = order_[f];
            ord.assign(rows.begin(), rows.end());
            std::sort(ord.begin(), ord.end(), [&](std::int32_t lhs, std::int32_t rhs) {
                const double lv = x_.at(lhs, f), rv = x_.at(rhs, f);
                return lv != rv ? lv < rv : lhs < rhs;
            });
        }
        scratch_.resize(rows.size());
        feature_pool_.resize(x_.cols);
        Tree tree;
        tree.nodes.reserve(64);
        build(tree, 0, rows.size(), 0);
        return tree;
    }

private:
    struct Best {
        double gain = 0.0;
        std::size_t feature = 0;
        double threshold = 0.0;
        bool found = false;
    };

    std::int32_t build(Tree& tree, std::size_t begin, std::size_t end, int depth) {
        double a_total = 0.0, b_total = 0.0;
        for (std::size_t k = begin; k < end; ++k) {
            const std::int32_t r = order_[0][k];
            a_total += crit_.a(r);
            b_total += crit_.b(r);
        }
        const std::size_t count = end - begin;
        const auto id = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.push_back({});
        tree.nodes[id].cover = crit_.cover(b_total, count);
        tree.nodes[id].value = crit_.leaf_value(a_total, b_total);

        if (depth >= max_depth_ || count < 2 || crit_.is_pure(a_total, b_total)) return id;
        const Best best = find_best_split(begin, end, a_total, b_total);
        if (!best.found) return id;

        const std::size_t left_size = partition(begin, end, best.feature, best.threshold);
        tree.nodes[id].feature = static_cast<std::int32_t>(best.feature);
        tree.nodes[id].threshold = best.threshold;
        const std::int32_t left = build(tree, begin, begin + left_size, depth + 1);
        const std::int32_t right = build(tree, begin + left_size, end, depth + 1);
        tree.nodes[id].left = left;
        tree.nodes[id].right = right;
        return id;
    }

    Best find_best_split(std::size_t begin, std::size_t end, double a_total, double b_total) {
        Best best;
        const double parent = crit_.child_score(a_total, b_total);
        for (const std::size_t f : candidate_features()) {
            const auto& ord = order_[f];
            double a_left = 0.0, b_left = 0.0;
            double prev = x_.at(ord[begin], f);
            for (std::size_t k = begin; k < end; ++k) {
                const std::int32_t r = ord[k];
                const double v = x_.at(r, f);
                if (v != prev) {
                    const double a_right = a_total - a_left, b_right = b_total - b_left;
                    if (crit_.child_ok(b_left) && crit_.child_ok(b_right)) {
                        const double gain = parent - crit_.child_score(a_left, b_left) -
                                            crit_.child_score(a_right, b_right);
                        // Strict > keeps the first (lowest feature, lowest
                        // threshold) candidate on ties.
                        if (gain > best.gain) {
                            best = {gain, f, split_threshold(prev, v), true};
                        }
                    }
                    prev = v;
                }
                a_left += crit_.a(r);
                b_left += crit_.b(r);
            }
        }
        return best;
    }

    // Candidate features in ascending index order; a partial Fisher-Yates draw
    // when mtry restricts the pool.
    std::span<const std::size_t> candidate_features() {
        std::iota(feature_pool_.begin(), feature_pool_.end(), std::size_t{0});
        if (mtry_ >= static_cast<int>(x_.cols)) return feature_pool_;
        for (int i = 0; i < mtry_; ++i) {
            const auto j = i + static_cast<std::size_t>(
                                   rng_->uniform_int(feature_pool_.size() - static_cast<std::size_t>(i)));
            std::swap(feature_pool_[static_cast<std::size_t>(i)], feature_pool_[j]);
        }
        std::sort(feature_pool_.begin(), feature_pool_.begin() + mtry_);
        return {feature_pool_.data(), static_cast<std::size_t>(mtry_)};
    }

    // Stable partition of every feature ordering by x[feature] < threshold;
    // returns the left-side size.
    std::size_t partition(std::size_t begin, std::size_t end, std::size_t feature,
                          double threshold) {
        std::size_t left_size = 0;
        for (auto& ord : order_) {
            std::size_t lo = begin, hi = 0;
            for (std::size_t k = begin; k < end; ++k) {
                const std::int32_t r = ord[k];
                if (x_.at(r, feature) < threshold) {
                    ord[lo++] = r;
                } else {
                    scratch_[hi++] = r;
                }
            }
            std::copy_n(scratch_.begin(), hi, ord.begin() + static_cast<std::ptrdiff_t>(lo));
            left_size = lo - begin;
        }
        return left_size;
    }

    const MatrixView& x_;
    const Criterion& crit_;
    const int max_depth_;
    const int mtry_;
    Rng* rng_;
    std::vector<std::vector<std::int32_t>> order_;
    std::vector<std::int32_t> scratch_;
    std::vector<std::size_t> feature_pool_;
};

// Weighted Gini: a = positive weight, b = total weight. child_score is the
// weighted impurity (up to the constant factor 2), so parent - children is the
// impurity decrease.
struct GiniCriterion {
    std::span<const int> labels;
    std::span<const std::uint32_t> weights;

    double a(std::int32_t r) const {
        return labels[static_cast<std::size_t>(r)] ? weights[static_cast<std::size_t>(r)] : 0.0;
    }
    double b(std::int32_t r) const { return weights[static_cast<std::size_t>(r)]; }
    double child_score(double a_sum, double b_sum) const { return a_sum * (b_sum - a_sum) / b_sum; }
    bool child_ok(double b_sum) const { return b_sum > 0.0; }
    double leaf_value(double a_sum, double b_sum) const { return a_sum / b_sum; }
    bool is_pure(double a_sum, double b_sum) const { return a_sum == 0.0 || a_sum == b_sum; }
    double cover(double b_sum, std::size_t) const { return b_sum; }
};

// Newton statistics: a = gradient sum, b = hessian sum. child_score is
// -G^2/(2(H+l2)), so parent - children is the standard second-order gain.
struct NewtonCriterion {
    std::span<const double> grad;
    std::span<const double> hess;
    double l2_penalty = 0.0;
    double shrinkage = 1.0;

    double a(std::int32_t r) const { return grad[static_cast<std::size_t>(r)]; }
    double b(std::int32_t r) const { return hess[static_cast<std::size_t>(r)]; }
    double child_score(double g_sum, double h_sum) const {
        return -0.5 * g_sum * g_sum / (h_sum + l2_penalty);
    }
    bool child_ok(double) const { return true; }
    double leaf_value(double g_sum, double h_sum) const {
        return -shrinkage * g_sum / (h_sum + l2_penalty);
    }
    bool is_pure(double, double) const { return false; }
    double cover(double, std::size_t count) const { return static_cast<double>(count); }
};

}  // namespace

Tree grow_gini_tree(const MatrixView& x, std::span<const int> labels,
                    std::span<const std::uint32_t> weights, int max_depth, int mtry, Rng& rng) {
    std::vector<std::int32_t> rows;
    rows.reserve(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r) {
        if (weights[r] > 0) rows.push_back(static_cast<std::int32_t>(r));
    }
    const GiniCriterion crit{labels, weights};
    return Grower(x, crit, max_depth, mtry, &rng).grow(rows);
}

Tree grow_newton_tree(const MatrixView& x, std::span<const double> grad,
                      std::span<const double> hess, int max_depth, double l2_penalty,
                      double shrinkage) {
    std::vector<std::int32_t> rows(x.rows);
    std::iota(rows.begin(), rows.end(), 0);
    const NewtonCriterion crit{grad, hess, l2_penalty, shrinkage};
    Rng unused(0);
    return Grower(x, crit, max_depth, static_cast<int>(x.cols), &unused).grow(rows);
}

}  // namespace hyperdet
