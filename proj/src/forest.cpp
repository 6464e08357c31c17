#include <memory>
#include <vector>

#include "hyperdet/model.hpp"
#include "hyperdet/parallel.hpp"
#include "hyperdet/rng.hpp"

namespace hyperdet {

namespace {

std::vector<std::string> names_copy() {
    return {kFeatureNames.begin(), kFeatureNames.end()};
}

}  // namespace

std::unique_ptr<TrainedModel> train_forest(const RandomForestSpec& spec, const TrainingData& data,
                                           std::uint64_t seed, int threads) {
    spec.validate();
    const MatrixView x = data.matrix();
    const int mtry = std::min(spec.mtry, static_cast<int>(x.cols));
    const Rng root(seed);

    std::vector<Tree> trees(static_cast<std::size_t>(spec.trees));
    parallel_for(
        trees.size(),
        [&](std::size_t t) {
            Rng rng = root.derive("forest-tree", t);
            std::vector<std::uint32_t> weights(x.rows, 1);
            if (spec.bootstrap) {
                weights.assign(x.rows, 0);
                for (std::size_t draw = 0; draw < x.rows; ++draw) {
                    ++weights[rng.uniform_int(x.rows)];
                }
            }
            trees[t] = grow_gini_tree(x, data.labels, weights, spec.max_depth, mtry, rng);
        },
        threads);

    return std::make_unique<ForestModel>(spec, std::move(trees), names_copy(), seed);
}

}  // namespace hyperdet
