#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "brute_shap.hpp"
#include "doctest.h"
#include "helpers.hpp"
#include "hyperdet/error.hpp"
#include "hyperdet/model.hpp"
#include "hyperdet/shap.hpp"
#include "hyperdet/stats.hpp"

using namespace hyperdet;

namespace {

std::vector<std::string> canonical_names() {
    return {kFeatureNames.begin(), kFeatureNames.end()};
}

// node: {feature, threshold, left, right, value, cover}
Tree stump(std::int32_t feature, double threshold, double left_value, double left_cover,
           double right_value, double right_cover) {
    Tree t;
    t.nodes.push_back({feature, threshold, 1, 2, 0.0, left_cover + right_cover});
    t.nodes.push_back({-1, 0.0, -1, -1, left_value, left_cover});
    t.nodes.push_back({-1, 0.0, -1, -1, right_value, right_cover});
    return t;
}

void check_matches_brute(const Tree& tree, std::span<const double> x, double tol = 1e-12) {
    std::vector<double> phi(9, 0.0);
    tree_shap_single(tree, x, phi);
    const std::vector<double> reference = testutil::brute_shap(tree, x, 9);
    for (std::size_t f = 0; f < 9; ++f) {
        CHECK(std::abs(phi[f] - reference[f]) <= tol);
    }
}

std::vector<double> probe(std::initializer_list<double> front) {
    std::vector<double> x(9, 0.0);
    std::copy(front.begin(), front.end(), x.begin());
    return x;
}

}  // namespace

TEST_CASE("stump attribution is the leaf minus the expectation") {
    const Tree t = stump(0, 0.5, 1.0, 3.0, 5.0, 7.0);
    const double expectation = (3.0 * 1.0 + 7.0 * 5.0) / 10.0;

    std::vector<double> phi(9, 0.0);
    tree_shap_single(t, probe({0.0}), phi);
    CHECK(phi[0] == doctest::Approx(1.0 - expectation).epsilon(1e-12));
    for (std::size_t f = 1; f < 9; ++f) CHECK(phi[f] == 0.0);

    std::fill(phi.begin(), phi.end(), 0.0);
    tree_shap_single(t, probe({1.0}), phi);
    CHECK(phi[0] == doctest::Approx(5.0 - expectation).epsilon(1e-12));
    CHECK(t.expected_value() == doctest::Approx(expectation).epsilon(1e-15));
}

TEST_CASE("two-feature depth-2 tree matches exhaustive Shapley enumeration") {
    Tree t;
    t.nodes.push_back({0, 0.5, 1, 2, 0.0, 10.0});
    t.nodes.push_back({1, 1.5, 3, 4, 0.0, 4.0});
    t.nodes.push_back({1, 2.5, 5, 6, 0.0, 6.0});
    t.nodes.push_back({-1, 0.0, -1, -1, 1.0, 1.0});
    t.nodes.push_back({-1, 0.0, -1, -1, 2.0, 3.0});
    t.nodes.push_back({-1, 0.0, -1, -1, -1.0, 2.0});
    t.nodes.push_back({-1, 0.0, -1, -1, 0.5, 4.0});

    for (const auto& x : {probe({0.0, 0.0}), probe({0.0, 3.0}), probe({1.0, 0.0}),
                          probe({1.0, 3.0}), probe({0.5, 1.5}), probe({0.25, 2.5})}) {
        check_matches_brute(t, x);
    }
}

TEST_CASE("a feature may repeat along one path") {
    SUBCASE("pure repeat") {
        Tree t;
        t.nodes.push_back({0, 0.5, 1, 2, 0.0, 12.0});
        t.nodes.push_back({0, 0.2, 3, 4, 0.0, 5.0});
        t.nodes.push_back({-1, 0.0, -1, -1, 4.0, 7.0});
        t.nodes.push_back({-1, 0.0, -1, -1, 0.0, 2.0});
        t.nodes.push_back({-1, 0.0, -1, -1, 1.0, 3.0});
        for (const auto& x : {probe({0.1}), probe({0.3}), probe({0.9})}) {
            check_matches_brute(t, x);
            // With one active feature the Shapley value is exactly
            // v({0}) - v(empty) = prediction - expectation.
            std::vector<double> phi(9, 0.0);
            tree_shap_single(t, x, phi);
            CHECK(phi[0] == doctest::Approx(t.predict(x) - t.expected_value()).epsilon(1e-12));
        }
    }
    SUBCASE("repeat below another feature") {
        Tree t;
        t.nodes.push_back({0, 0.5, 1, 2, 0.0, 20.0});
        t.nodes.push_back({1, 1.0, 3, 4, 0.0, 8.0});
        t.nodes.push_back({-1, 0.0, -1, -1, 3.0, 12.0});
        t.nodes.push_back({0, 0.2, 5, 6, 0.0, 5.0});
        t.nodes.push_back({-1, 0.0, -1, -1, 2.0, 3.0});
        t.nodes.push_back({-1, 0.0, -1, -1, 0.0, 2.0});
        t.nodes.push_back({-1, 0.0, -1, -1, 1.0, 3.0});
        for (const auto& x : {probe({0.1, 0.5}), probe({0.3, 0.5}), probe({0.3, 2.0}),
                              probe({0.9, 0.5}), probe({0.1, 2.0})}) {
            check_matches_brute(t, x);
        }
    }
}

TEST_CASE("three-feature tree with uneven covers matches enumeration") {
    Tree t;
    t.nodes.push_back({2, 0.0, 1, 2, 0.0, 100.0});
    t.nodes.push_back({0, -1.0, 3, 4, 0.0, 55.0});
    t.nodes.push_back({1, 2.0, 5, 6, 0.0, 45.0});
    t.nodes.push_back({-1, 0.0, -1, -1, -3.0, 25.0});
    t.nodes.push_back({1, 0.5, 7, 8, 0.0, 30.0});
    t.nodes.push_back({-1, 0.0, -1, -1, 1.25, 40.0});
    t.nodes.push_back({2, 3.0, 9, 10, 0.0, 5.0});
    t.nodes.push_back({-1, 0.0, -1, -1, 0.75, 12.0});
    t.nodes.push_back({-1, 0.0, -1, -1, -0.5, 18.0});
    t.nodes.push_back({-1, 0.0, -1, -1, 2.5, 2.0});
    t.nodes.push_back({-1, 0.0, -1, -1, -1.5, 3.0});

    for (const auto& x :
         {probe({-2.0, 0.0, -1.0}), probe({0.0, 1.0, 1.0}), probe({0.0, 3.0, 4.0}),
          probe({-2.0, 0.6, 2.9}), probe({5.0, -1.0, 0.5}), probe({-1.0, 0.5, 3.0})}) {
        check_matches_brute(t, x);
    }
}

TEST_CASE("boost explanations add per-tree attributions in margin space") {
    std::vector<Tree> trees;
    trees.push_back(stump(0, 0.5, -1.0, 4.0, 1.0, 6.0));
    trees.push_back(stump(1, 1.5, 0.5, 5.0, -0.5, 5.0));
    Tree deep;
    deep.nodes.push_back({0, 0.5, 1, 2, 0.0, 10.0});
    deep.nodes.push_back({2, 0.0, 3, 4, 0.0, 4.0});
    deep.nodes.push_back({-1, 0.0, -1, -1, 0.2, 6.0});
    deep.nodes.push_back({-1, 0.0, -1, -1, -0.4, 1.0});
    deep.nodes.push_back({-1, 0.0, -1, -1, 0.6, 3.0});
    trees.push_back(deep);

    const double base_margin = 0.3;
    const BoostModel model(GradientBoostSpec{}, base_margin, trees, canonical_names(), 0);

    std::vector<double> values;
    std::vector<std::vector<double>> probes = {probe({0.0, 0.0, -1.0}), probe({1.0, 2.0, 1.0}),
                                               probe({0.0, 2.0, 1.0}), probe({1.0, 0.0, -1.0})};
    for (const auto& x : probes) values.insert(values.end(), x.begin(), x.end());
    const MatrixView x{values.data(), probes.size(), 9};

    const auto explanations = explain_instances(model, x);
    REQUIRE(explanations.size() == probes.size());

    double expected_base = base_margin;
    for (const Tree& t : trees) expected_base += t.expected_value();

    for (std::size_t i = 0; i < probes.size(); ++i) {
        const auto& e = explanations[i];
        CHECK(e.instance == i);
        CHECK(e.base_value == doctest::Approx(expected_base).epsilon(1e-12));

        std::vector<double> reference(9, 0.0);
        for (const Tree& t : trees) {
            const auto part = testutil::brute_shap(t, probes[i], 9);
            for (std::size_t f = 0; f < 9; ++f) reference[f] += part[f];
        }
        for (std::size_t f = 0; f < 9; ++f) {
            CHECK(std::abs(e.values[f] - reference[f]) <= 1e-10);
        }
        const double total = e.base_value + std::accumulate(e.values.begin(), e.values.end(), 0.0);
        CHECK(total == doctest::Approx(model.margin(probes[i])).epsilon(1e-12));
        // Features 3..8 never split: exact null players.
        for (std::size_t f = 3; f < 9; ++f) CHECK(e.values[f] == 0.0);
    }
}

TEST_CASE("symmetric trees on different features give identical attributions") {
    std::vector<Tree> trees;
    trees.push_back(stump(0, 0.5, -1.0, 4.0, 2.0, 6.0));
    trees.push_back(stump(1, 0.5, -1.0, 4.0, 2.0, 6.0));
    const BoostModel model(GradientBoostSpec{}, 0.0, trees, canonical_names(), 0);
    const std::vector<double> x = probe({0.2, 0.2});
    const MatrixView view{x.data(), 1, 9};
    const auto e = explain_instances(model, view);
    CHECK(e[0].values[0] == e[0].values[1]);
    CHECK(e[0].values[0] != 0.0);
}

TEST_CASE("forest explanations rescale fraction attributions through the logit") {
    std::vector<Tree> trees;
    trees.push_back(stump(0, 0.5, 0.2, 4.0, 0.8, 6.0));  // expectation 0.56
    trees.push_back(stump(1, 1.5, 0.1, 5.0, 0.9, 5.0));  // expectation 0.50
    RandomForestSpec spec;
    spec.trees = 2;
    const ForestModel model(spec, trees, canonical_names(), 0);

    const std::vector<double> x = probe({0.0, 0.0});
    const MatrixView view{x.data(), 1, 9};
    const auto e = explain_instances(model, view).at(0);

    const double base_fraction = (0.56 + 0.50) / 2.0;
    const double fraction = (0.2 + 0.1) / 2.0;
    const double scale = (clamped_logit(fraction) - clamped_logit(base_fraction)) /
                         (fraction - base_fraction);
    CHECK(e.base_value == doctest::Approx(clamped_logit(base_fraction)).epsilon(1e-12));
    CHECK(e.values[0] == doctest::Approx((0.2 - 0.56) / 2.0 * scale).epsilon(1e-12));
    CHECK(e.values[1] == doctest::Approx((0.1 - 0.50) / 2.0 * scale).epsilon(1e-12));
    const double total = e.base_value + std::accumulate(e.values.begin(), e.values.end(), 0.0);
    CHECK(total == doctest::Approx(model.margin(x)).epsilon(1e-12));
}

TEST_CASE("forest instances at the base fraction get all-zero attributions") {
    std::vector<Tree> trees;
    trees.push_back(stump(0, 0.5, 0.2, 5.0, 0.8, 5.0));  // expectation 0.5
    trees.push_back(stump(1, 0.5, 0.2, 5.0, 0.8, 5.0));  // expectation 0.5
    RandomForestSpec spec;
    spec.trees = 2;
    const ForestModel model(spec, trees, canonical_names(), 0);

    // Left on the first tree, right on the second: fraction (0.2+0.8)/2 = 0.5.
    const std::vector<double> x = probe({0.0, 1.0});
    const MatrixView view{x.data(), 1, 9};
    const auto e = explain_instances(model, view).at(0);
    for (const double v : e.values) CHECK(v == 0.0);
    CHECK(e.base_value == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("trained ensembles satisfy local accuracy and match enumeration") {
    const Dataset data = testutil::pinned_dataset(40);
    std::vector<double> values;
    const Dataset probes_data = testutil::pinned_dataset(10, 4000);
    for (const auto& row : probes_data) {
        const auto v = row.values();
        values.insert(values.end(), v.begin(), v.end());
    }
    const MatrixView x{values.data(), probes_data.size(), 9};

    SUBCASE("gradient boosting") {
        GradientBoostSpec spec;
        spec.trees = 5;
        spec.max_depth = 3;
        const auto model = train(spec, data, 3);
        const auto* boost = dynamic_cast<const BoostModel*>(model.get());
        REQUIRE(boost != nullptr);
        const auto explanations = explain_instances(*model, x);
        for (std::size_t i = 0; i < x.rows; ++i) {
            const auto& e = explanations[i];
            const double total =
                e.base_value + std::accumulate(e.values.begin(), e.values.end(), 0.0);
            CHECK(std::abs(total - model->margin(x.row(i))) <= 1e-8);

            std::vector<double> reference(9, 0.0);
            for (const Tree& t : boost->trees()) {
                const auto part = testutil::brute_shap(t, x.row(i), 9);
                for (std::size_t f = 0; f < 9; ++f) reference[f] += part[f];
            }
            for (std::size_t f = 0; f < 9; ++f) {
                CHECK(std::abs(e.values[f] - reference[f]) <= 1e-8);
            }
        }
    }
    SUBCASE("random forest") {
        RandomForestSpec spec;
        spec.trees = 5;
        spec.max_depth = 5;
        spec.mtry = 4;
        const auto model = train(spec, data, 9);
        const auto* forest = dynamic_cast<const ForestModel*>(model.get());
        REQUIRE(forest != nullptr);
        const auto explanations = explain_instances(*model, x);
        for (std::size_t i = 0; i < x.rows; ++i) {
            const auto& e = explanations[i];
            const double total =
                e.base_value + std::accumulate(e.values.begin(), e.values.end(), 0.0);
            CHECK(std::abs(total - model->margin(x.row(i))) <= 1e-8);

            // Fraction-scale enumeration, rescaled exactly as documented.
            std::vector<double> phi_fraction(9, 0.0);
            double base_fraction = 0.0;
            for (const Tree& t : forest->trees()) {
                const auto part = testutil::brute_shap(t, x.row(i), 9);
                for (std::size_t f = 0; f < 9; ++f) phi_fraction[f] += part[f];
                base_fraction += t.expected_value();
            }
            const double inv = 1.0 / static_cast<double>(forest->trees().size());
            base_fraction *= inv;
            const double fraction = forest->fraction(x.row(i));
            const double denom = fraction - base_fraction;
            for (std::size_t f = 0; f < 9; ++f) {
                const double expected =
                    denom == 0.0 ? 0.0
                                 : phi_fraction[f] * inv *
                                       (clamped_logit(fraction) - clamped_logit(base_fraction)) /
                                       denom;
                CHECK(std::abs(e.values[f] - expected) <= 1e-8);
            }
        }
    }
}

TEST_CASE("zero learning rate yields all-zero attributions at the base margin") {
    const Dataset data = testutil::pinned_dataset(24);
    GradientBoostSpec spec;
    spec.trees = 4;
    spec.learning_rate = 0.0;
    const auto model = train(spec, data, 3);
    const auto* boost = dynamic_cast<const BoostModel*>(model.get());

    std::vector<double> values;
    for (const auto& row : testutil::pinned_dataset(5, 60)) {
        const auto v = row.values();
        values.insert(values.end(), v.begin(), v.end());
    }
    const MatrixView x{values.data(), 5, 9};
    for (const auto& e : explain_instances(*model, x)) {
        for (const double v : e.values) CHECK(v == 0.0);
        CHECK(e.base_value == doctest::Approx(boost->base_margin()).epsilon(1e-12));
    }
}

TEST_CASE("explanations are thread-invariant") {
    const Dataset data = testutil::pinned_dataset(30);
    GradientBoostSpec spec;
    spec.trees = 6;
    spec.max_depth = 4;
    const auto model = train(spec, data, 5);
    std::vector<double> values;
    for (const auto& row : testutil::pinned_dataset(20, 300)) {
        const auto v = row.values();
        values.insert(values.end(), v.begin(), v.end());
    }
    const MatrixView x{values.data(), 20, 9};
    const auto a = explain_instances(*model, x, 1);
    const auto b = explain_instances(*model, x, 4);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].base_value == b[i].base_value);
        CHECK(a[i].values == b[i].values);
    }
}

TEST_CASE("only tree ensembles can be explained") {
    const Dataset data = testutil::pinned_dataset(20);
    const auto logistic = train(LogisticRegressionSpec{}, data, 1);
    std::vector<double> values(9, 0.0);
    const MatrixView x{values.data(), 1, 9};
    CHECK_THROWS_AS(explain_instances(*logistic, x), ConfigError);

    GradientBoostSpec spec;
    spec.trees = 2;
    spec.max_depth = 2;
    const auto boost = train(spec, data, 1);
    const MatrixView narrow{values.data(), 3, 3};
    CHECK_THROWS_AS(explain_instances(*boost, narrow), DataError);
}

TEST_CASE("summary ordering, dependence extraction, and csv formats") {
    ShapExplanation e0;
    e0.instance = 0;
    e0.values = {1.0, -2.0, 1.0};
    e0.base_value = 0.1;
    ShapExplanation e1;
    e1.instance = 1;
    e1.values = {-1.0, 2.0, -1.0};
    e1.base_value = 0.1;
    const std::vector<ShapExplanation> explanations = {e0, e1};
    const std::vector<double> values = {10.0, 20.0, 30.0, 40.0, 50.0, 60.0};
    const MatrixView x{values.data(), 2, 3};
    const std::vector<std::string> names = {"hrmean", "hrmax", "hrmin"};

    const SummaryData summary = summarize(explanations, x, names);
    REQUIRE(summary.features.size() == 3);
    CHECK(summary.features[0].name == "hrmax");  // mean |shap| 2
    CHECK(summary.features[0].mean_abs_shap == doctest::Approx(2.0).epsilon(1e-15));
    // hrmean and hrmin tie at 1; name order breaks the tie.
    CHECK(summary.features[1].name == "hrmean");
    CHECK(summary.features[2].name == "hrmin");
    REQUIRE(summary.features[0].points.size() == 2);
    CHECK(summary.features[0].points[0] == std::pair(20.0, -2.0));
    CHECK(summary.features[0].points[1] == std::pair(50.0, 2.0));

    const DependenceData dep = dependence(explanations, x, names, "hrmax");
    CHECK(dep.feature == "hrmax");
    REQUIRE(dep.points.size() == 2);
    CHECK(dep.points[0] == std::pair(20.0, -2.0));
    CHECK_THROWS_AS(dependence(explanations, x, names, "bogus"), DataError);
    CHECK_THROWS_AS(summarize({}, x, names), DataError);

    const std::string summary_csv = render_shap_summary_csv(summary);
    CHECK(summary_csv ==
          "feature,mean_abs_shap,rank\nhrmax,2,1\nhrmean,1,2\nhrmin,1,3\n");

    const std::string values_csv = render_shap_values_csv(explanations, x, names);
    CHECK(values_csv.rfind("feature,instance,feature_value,shap_value\n", 0) == 0);
    CHECK(std::count(values_csv.begin(), values_csv.end(), '\n') == 7);  // header + 3*2 rows
    CHECK(values_csv.find("hrmean,0,10,1\n") != std::string::npos);
    CHECK(values_csv.find("hrmax,1,50,2\n") != std::string::npos);
}
