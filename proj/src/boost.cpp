#include <cmath>
#include <memory>
#include <vector>

#include "hyperdet/model.hpp"
#include "hyperdet/stats.hpp"

namespace hyperdet {

std::unique_ptr<TrainedModel> train_boost(const GradientBoostSpec& spec, const TrainingData& data,
                                          std::uint64_t seed) {
    spec.validate();
    const MatrixView x = data.matrix();
    const std::size_t n = x.rows;

    double positives = 0.0;
    for (const int y : data.labels) positives += y;
    const double base_rate = positives / static_cast<double>(n);
    const double base_margin = std::log(base_rate / (1.0 - base_rate));

    std::vector<double> margins(n, base_margin);
    std::vector<double> grad(n), hess(n);
    std::vector<Tree> trees;
    trees.reserve(static_cast<std::size_t>(spec.trees));

    for (int round = 0; round < spec.trees; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            const double p = sigmoid(margins[i]);
            grad[i] = p - data.labels[i];
            hess[i] = p * (1.0 - p);
        }
        Tree tree = grow_newton_tree(x, grad, hess, spec.max_depth, spec.l2_leaf_penalty,
                                     spec.learning_rate);
        for (std::size_t i = 0; i < n; ++i) margins[i] += tree.predict(x.row(i));
        trees.push_back(std::move(tree));
    }

    return std::make_unique<BoostModel>(
        spec, base_margin, std::move(trees),
        std::vector<std::string>(kFeatureNames.begin(), kFeatureNames.end()), seed);
}

}  // namespace hyperdet
