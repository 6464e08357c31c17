#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "hyperdet/rng.hpp"
#include "hyperdet/tree.hpp"

using namespace hyperdet;

namespace {

// Exhaustive reference grower, written independently of the production
// presort/partition machinery: every node rescans every feature and every
// distinct-value boundary from scratch. Gain is the weighted Gini split score
// pos*(total-pos)/total (parent minus children); splits need strictly positive
// gain and ties keep the lowest feature then the lowest threshold. With
// integer weights all sums are exact, so gains match the production grower
// bit for bit and the trees must be identical node for node.
struct BruteGini {
    const MatrixView& x;
    std::span<const int> labels;
    std::span<const std::uint32_t> weights;
    int max_depth;
    std::vector<TreeNode> nodes;

    static double boundary(double low, double high) {
        const double mid = low + (high - low) / 2.0;
        return mid > low ? mid : high;
    }
    static double score(double pos, double total) { return pos * (total - pos) / total; }

    std::int32_t build(const std::vector<std::int32_t>& rows, int depth) {
        double w_total = 0.0, w_pos = 0.0;
        for (const auto r : rows) {
            const auto ur = static_cast<std::size_t>(r);
            w_total += weights[ur];
            if (labels[ur]) w_pos += weights[ur];
        }
        const auto id = static_cast<std::int32_t>(nodes.size());
        nodes.push_back({});
        nodes[static_cast<std::size_t>(id)].cover = w_total;
        nodes[static_cast<std::size_t>(id)].value = w_pos / w_total;
        if (depth >= max_depth || rows.size() < 2 || w_pos == 0.0 || w_pos == w_total) return id;

        double best_gain = 0.0, best_threshold = 0.0;
        std::size_t best_feature = 0;
        bool found = false;
        for (std::size_t f = 0; f < x.cols; ++f) {
            std::vector<double> vals;
            for (const auto r : rows) vals.push_back(x.at(static_cast<std::size_t>(r), f));
            std::sort(vals.begin(), vals.end());
            vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
            for (std::size_t k = 1; k < vals.size(); ++k) {
                const double t = boundary(vals[k - 1], vals[k]);
                double lw = 0.0, lp = 0.0;
                for (const auto r : rows) {
                    const auto ur = static_cast<std::size_t>(r);
                    if (x.at(ur, f) < t) {
                        lw += weights[ur];
                        if (labels[ur]) lp += weights[ur];
                    }
                }
                const double rw = w_total - lw, rp = w_pos - lp;
                if (lw <= 0.0 || rw <= 0.0) continue;
                const double gain = score(w_pos, w_total) - score(lp, lw) - score(rp, rw);
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = f;
                    best_threshold = t;
                    found = true;
                }
            }
        }
        if (!found) return id;

        std::vector<std::int32_t> left_rows, right_rows;
        for (const auto r : rows) {
            (x.at(static_cast<std::size_t>(r), best_feature) < best_threshold ? left_rows
                                                                              : right_rows)
                .push_back(r);
        }
        nodes[static_cast<std::size_t>(id)].feature = static_cast<std::int32_t>(best_feature);
        nodes[static_cast<std::size_t>(id)].threshold = best_threshold;
        const std::int32_t left = build(left_rows, depth + 1);
        const std::int32_t right = build(right_rows, depth + 1);
        nodes[static_cast<std::size_t>(id)].left = left;
        nodes[static_cast<std::size_t>(id)].right = right;
        return id;
    }
};

Tree brute_gini_tree(const MatrixView& x, std::span<const int> labels,
                     std::span<const std::uint32_t> weights, int max_depth) {
    std::vector<std::int32_t> rows;
    for (std::size_t r = 0; r < x.rows; ++r) {
        if (weights[r] > 0) rows.push_back(static_cast<std::int32_t>(r));
    }
    BruteGini brute{x, labels, weights, max_depth, {}};
    brute.build(rows, 0);
    return Tree{std::move(brute.nodes)};
}

void check_identical(const Tree& a, const Tree& b) {
    REQUIRE(a.nodes.size() == b.nodes.size());
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        CHECK(a.nodes[i].feature == b.nodes[i].feature);
        CHECK(a.nodes[i].threshold == b.nodes[i].threshold);
        CHECK(a.nodes[i].left == b.nodes[i].left);
        CHECK(a.nodes[i].right == b.nodes[i].right);
        CHECK(a.nodes[i].value == b.nodes[i].value);
        CHECK(a.nodes[i].cover == b.nodes[i].cover);
    }
}

struct Flat {
    std::vector<double> values;
    std::vector<int> labels;
    MatrixView view(std::size_t cols = 9) const {
        return {values.data(), values.size() / cols, cols};
    }
};

Flat flatten(const Dataset& data) {
    Flat flat;
    for (const auto& row : data) {
        const auto v = row.values();
        flat.values.insert(flat.values.end(), v.begin(), v.end());
        flat.labels.push_back(row.label);
    }
    return flat;
}

}  // namespace

TEST_CASE("gini grower matches the exhaustive reference") {
    const Flat flat = flatten(testutil::pinned_dataset(20));
    const MatrixView x = flat.view();
    Rng rng(0);

    SUBCASE("unit weights, full depth") {
        const std::vector<std::uint32_t> w(20, 1);
        const Tree mine = grow_gini_tree(x, flat.labels, w, 28, 9, rng);
        check_identical(mine, brute_gini_tree(x, flat.labels, w, 28));
    }
    SUBCASE("bootstrap-style integer weights, depth 3") {
        std::vector<std::uint32_t> w;
        for (int i = 0; i < 20; ++i) w.push_back(static_cast<std::uint32_t>(1 + i % 3));
        const Tree mine = grow_gini_tree(x, flat.labels, w, 3, 9, rng);
        check_identical(mine, brute_gini_tree(x, flat.labels, w, 3));
    }
    SUBCASE("weight zero excludes rows entirely") {
        std::vector<std::uint32_t> w(20, 1);
        w[4] = 0;
        w[11] = 0;
        const Tree mine = grow_gini_tree(x, flat.labels, w, 28, 9, rng);
        check_identical(mine, brute_gini_tree(x, flat.labels, w, 28));
    }
}

TEST_CASE("gini hand example: one feature, clean split") {
    const std::vector<double> values = {1, 2, 3, 4};
    const MatrixView x{values.data(), 4, 1};
    const std::vector<int> labels = {0, 0, 1, 1};
    const std::vector<std::uint32_t> w(4, 1);
    Rng rng(0);
    const Tree t = grow_gini_tree(x, labels, w, 28, 1, rng);
    REQUIRE(t.nodes.size() == 3);
    CHECK(t.nodes[0].feature == 0);
    CHECK(t.nodes[0].threshold == 2.5);
    CHECK(t.nodes[0].value == 0.5);
    CHECK(t.nodes[0].cover == 4.0);
    CHECK(t.predict(std::vector<double>{2.0}) == 0.0);
    CHECK(t.predict(std::vector<double>{3.0}) == 1.0);
    CHECK(t.expected_value() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(t.max_depth() == 1);
    CHECK(t.leaf_count() == 2);
}

TEST_CASE("ties prefer the lowest feature then the lowest threshold") {
    SUBCASE("duplicate separating columns pick feature 0") {
        const std::vector<double> values = {1, 1, 2, 2, 3, 3, 4, 4};  // two identical columns
        const MatrixView x{values.data(), 4, 2};
        const std::vector<int> labels = {0, 0, 1, 1};
        const std::vector<std::uint32_t> w(4, 1);
        Rng rng(0);
        const Tree t = grow_gini_tree(x, labels, w, 5, 2, rng);
        CHECK(t.nodes[0].feature == 0);
    }
    SUBCASE("equal-gain thresholds pick the lower one") {
        // Labels 1,0,0,1 over values 1..4: boundaries 1.5 and 3.5 tie.
        const std::vector<double> values = {1, 2, 3, 4};
        const MatrixView x{values.data(), 4, 1};
        const std::vector<int> labels = {1, 0, 0, 1};
        const std::vector<std::uint32_t> w(4, 1);
        Rng rng(0);
        const Tree t = grow_gini_tree(x, labels, w, 1, 1, rng);
        CHECK(t.nodes[0].threshold == 1.5);
    }
}

TEST_CASE("adjacent doubles still produce a routing threshold") {
    const double lo = 1.0;
    const double hi = std::nextafter(lo, 2.0);
    const std::vector<double> values = {lo, hi};
    const MatrixView x{values.data(), 2, 1};
    const std::vector<int> labels = {0, 1};
    const std::vector<std::uint32_t> w(2, 1);
    Rng rng(0);
    const Tree t = grow_gini_tree(x, labels, w, 5, 1, rng);
    REQUIRE(t.nodes.size() == 3);
    CHECK(t.nodes[0].threshold > lo);
    CHECK(t.nodes[0].threshold <= hi);
    CHECK(t.predict(std::vector<double>{lo}) == 0.0);
    CHECK(t.predict(std::vector<double>{hi}) == 1.0);
}

TEST_CASE("depth limits and purity stop growth") {
    const Flat flat = flatten(testutil::pinned_dataset(16));
    const MatrixView x = flat.view();
    const std::vector<std::uint32_t> w(16, 1);
    Rng rng(0);

    const Tree stump = grow_gini_tree(x, flat.labels, w, 0, 9, rng);
    CHECK(stump.nodes.size() == 1);
    CHECK(stump.nodes[0].is_leaf());

    const Tree shallow = grow_gini_tree(x, flat.labels, w, 1, 9, rng);
    CHECK(shallow.max_depth() <= 1);

    const std::vector<int> pure(16, 1);
    const Tree pure_tree = grow_gini_tree(x, pure, w, 28, 9, rng);
    CHECK(pure_tree.nodes.size() == 1);
    CHECK(pure_tree.nodes[0].value == 1.0);
}

TEST_CASE("restricted mtry is deterministic per rng seed and stays in range") {
    const Flat flat = flatten(testutil::pinned_dataset(30));
    const MatrixView x = flat.view();
    const std::vector<std::uint32_t> w(30, 1);

    Rng r1(5), r2(5), r3(6);
    const Tree a = grow_gini_tree(x, flat.labels, w, 10, 3, r1);
    const Tree b = grow_gini_tree(x, flat.labels, w, 10, 3, r2);
    check_identical(a, b);
    for (const auto& n : a.nodes) {
        if (!n.is_leaf()) CHECK((n.feature >= 0 && n.feature < 9));
    }
    // A different stream is allowed to pick different candidates; with only 3
    // of 9 features per node it overwhelmingly does.
    const Tree c = grow_gini_tree(x, flat.labels, w, 10, 3, r3);
    bool differs = a.nodes.size() != c.nodes.size();
    for (std::size_t i = 0; !differs && i < a.nodes.size(); ++i) {
        differs = a.nodes[i].feature != c.nodes[i].feature ||
                  a.nodes[i].threshold != c.nodes[i].threshold;
    }
    CHECK(differs);
}

TEST_CASE("newton tree reproduces the two-point hand example") {
    // Base score 0.5 on labels {0,1}: gradients +-0.5, hessians 0.25.
    const std::vector<double> values = {0.0, 1.0};
    const MatrixView x{values.data(), 2, 1};
    const std::vector<double> grad = {0.5, -0.5};
    const std::vector<double> hess = {0.25, 0.25};

    SUBCASE("no regularization gives leaves -2 and +2") {
        const Tree t = grow_newton_tree(x, grad, hess, 1, 0.0, 1.0);
        REQUIRE(t.nodes.size() == 3);
        CHECK(t.nodes[0].feature == 0);
        CHECK(t.nodes[0].threshold == 0.5);
        CHECK(t.predict(std::vector<double>{0.0}) == doctest::Approx(-2.0).epsilon(1e-15));
        CHECK(t.predict(std::vector<double>{1.0}) == doctest::Approx(2.0).epsilon(1e-15));
        CHECK(t.nodes[0].cover == 2.0);
    }
    SUBCASE("l2 = 1 shrinks the leaves to +-0.4") {
        const Tree t = grow_newton_tree(x, grad, hess, 1, 1.0, 1.0);
        REQUIRE(t.nodes.size() == 3);
        CHECK(t.predict(std::vector<double>{0.0}) == doctest::Approx(-0.4).epsilon(1e-15));
        CHECK(t.predict(std::vector<double>{1.0}) == doctest::Approx(0.4).epsilon(1e-15));
    }
    SUBCASE("shrinkage scales the leaves") {
        const Tree t = grow_newton_tree(x, grad, hess, 1, 0.0, 0.3);
        CHECK(t.predict(std::vector<double>{1.0}) == doctest::Approx(0.6).epsilon(1e-15));
    }
    SUBCASE("depth zero collapses to the Newton step of the sums") {
        const Tree t = grow_newton_tree(x, grad, hess, 0, 0.0, 1.0);
        REQUIRE(t.nodes.size() == 1);
        CHECK(t.nodes[0].value == 0.0);  // gradients cancel
        CHECK(t.nodes[0].cover == 2.0);
    }
}

TEST_CASE("newton cover counts rows, and splits need positive gain") {
    // Identical gradients: no split can improve the objective.
    const std::vector<double> values = {0.0, 1.0, 2.0, 3.0};
    const MatrixView x{values.data(), 4, 1};
    const std::vector<double> grad = {0.3, 0.3, 0.3, 0.3};
    const std::vector<double> hess = {0.25, 0.25, 0.25, 0.25};
    const Tree t = grow_newton_tree(x, grad, hess, 6, 1.0, 1.0);
    REQUIRE(t.nodes.size() == 1);
    CHECK(t.nodes[0].cover == 4.0);
    CHECK(t.nodes[0].value == doctest::Approx(-1.2 / 2.0).epsilon(1e-15));
}

TEST_CASE("expected value is the cover-weighted leaf mean") {
    Tree t;
    t.nodes.push_back({0, 1.0, 1, 2, 0.0, 10.0});
    t.nodes.push_back({-1, 0.0, -1, -1, 2.0, 4.0});
    t.nodes.push_back({-1, 0.0, -1, -1, -1.0, 6.0});
    CHECK(t.expected_value() == doctest::Approx((2.0 * 4.0 - 1.0 * 6.0) / 10.0).epsilon(1e-15));
}
