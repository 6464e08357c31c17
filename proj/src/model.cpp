#include "hyperdet/model.hpp"

#include <cmath>
#include <iostream>
#include <utility>

#include "json.hpp"

#include "hyperdet/error.hpp"
#include "hyperdet/parallel.hpp"
#include "hyperdet/stats.hpp"
#include "hyperdet/text.hpp"

namespace hyperdet {

namespace {

std::vector<std::string> canonical_feature_names() {
    return {kFeatureNames.begin(), kFeatureNames.end()};
}

}  // namespace

// ---------------------------------------------------------------------------
// Spec validation
// ---------------------------------------------------------------------------

void RandomForestSpec::validate() const {
    if (trees < 1) throw ConfigError("RandomForestSpec: trees must be positive");
    if (max_depth < 1) throw ConfigError("RandomForestSpec: max_depth must be positive");
    if (mtry < 1) throw ConfigError("RandomForestSpec: mtry must be positive");
}

void GradientBoostSpec::validate() const {
    if (trees < 1) throw ConfigError("GradientBoostSpec: trees must be positive");
    if (max_depth < 1) throw ConfigError("GradientBoostSpec: max_depth must be positive");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw ConfigError("GradientBoostSpec: learning_rate must be finite and >= 0");
    }
    if (!(l2_leaf_penalty >= 0.0) || !std::isfinite(l2_leaf_penalty)) {
        throw ConfigError("GradientBoostSpec: l2_leaf_penalty must be finite and >= 0");
    }
}

void LogisticRegressionSpec::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw ConfigError("LogisticRegressionSpec: lambda must be finite and >= 0");
    }
}

void RbfSvmSpec::validate() const {
    if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("RbfSvmSpec: c must be positive");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw ConfigError("RbfSvmSpec: sigma must be positive");
    }
}

std::string_view model_kind(const ModelSpec& spec) {
    return std::visit(
        [](const auto& s) -> std::string_view {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, RandomForestSpec>) return "random_forest";
            if constexpr (std::is_same_v<T, GradientBoostSpec>) return "gradient_boost";
            if constexpr (std::is_same_v<T, LogisticRegressionSpec>) return "logistic_regression";
            if constexpr (std::is_same_v<T, RbfSvmSpec>) return "rbf_svm";
        },
        spec);
}

void validate_spec(const ModelSpec& spec) {
    std::visit([](const auto& s) { s.validate(); }, spec);
}

// ---------------------------------------------------------------------------
// Standardizer
// ---------------------------------------------------------------------------

Standardizer Standardizer::fit(const MatrixView& x) {
    Standardizer s;
    s.mean.assign(x.cols, 0.0);
    s.sd.assign(x.cols, 1.0);
    if (x.rows == 0) return s;
    for (std::size_t c = 0; c < x.cols; ++c) {
        double sum = 0.0;
        for (std::size_t r = 0; r < x.rows; ++r) sum += x.at(r, c);
        s.mean[c] = sum / static_cast<double>(x.rows);
    }
    for (std::size_t c = 0; c < x.cols; ++c) {
        double ss = 0.0;
        for (std::size_t r = 0; r < x.rows; ++r) {
            const double d = x.at(r, c) - s.mean[c];
            ss += d * d;
        }
        const double var = x.rows > 1 ? ss / static_cast<double>(x.rows - 1) : 0.0;
        if (var > 0.0) {
            s.sd[c] = std::sqrt(var);
        } else {
            std::cerr << "warning: feature " << c << " is constant; standardizing with sd 1\n";
        }
    }
    return s;
}

void Standardizer::transform(std::span<double> row) const {
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = (row[c] - mean[c]) / sd[c];
}

// ---------------------------------------------------------------------------
// Model scoring
// ---------------------------------------------------------------------------

ForestModel::ForestModel(RandomForestSpec spec, std::vector<Tree> trees,
                         std::vector<std::string> feature_names, std::uint64_t seed)
    : TrainedModel(std::move(feature_names), seed), spec_(spec), trees_(std::move(trees)) {}

double ForestModel::fraction(std::span<const double> features) const {
    double sum = 0.0;
    for (const Tree& t : trees_) sum += t.predict(features);
    return sum / static_cast<double>(trees_.size());
}

double ForestModel::margin(std::span<const double> features) const {
    return clamped_logit(fraction(features));
}

double ForestModel::predict_proba(std::span<const double> features) const {
    return fraction(features);
}

BoostModel::BoostModel(GradientBoostSpec spec, double base_margin, std::vector<Tree> trees,
                       std::vector<std::string> feature_names, std::uint64_t seed)
    : TrainedModel(std::move(feature_names), seed),
      spec_(spec),
      base_margin_(base_margin),
      trees_(std::move(trees)) {}

double BoostModel::margin(std::span<const double> features) const {
    double m = base_margin_;
    for (const Tree& t : trees_) m += t.predict(features);
    return m;
}

double BoostModel::predict_proba(std::span<const double> features) const {
    return sigmoid(margin(features));
}

LogisticModel::LogisticModel(LogisticRegressionSpec spec, Standardizer standardizer,
                             std::vector<double> weights, double intercept,
                             std::vector<std::string> feature_names, std::uint64_t seed)
    : TrainedModel(std::move(feature_names), seed),
      spec_(spec),
      standardizer_(std::move(standardizer)),
      weights_(std::move(weights)),
      intercept_(intercept) {}

double LogisticModel::margin(std::span<const double> features) const {
    double z = intercept_;
    for (std::size_t c = 0; c < weights_.size(); ++c) {
        z += weights_[c] * (features[c] - standardizer_.mean[c]) / standardizer_.sd[c];
    }
    return z;
}

double LogisticModel::predict_proba(std::span<const double> features) const {
    return sigmoid(margin(features));
}

SvmModel::SvmModel(RbfSvmSpec spec, Standardizer standardizer, std::vector<double> support_vectors,
                   std::vector<double> dual_coef, double rho, double platt_a, double platt_b,
                   std::vector<std::string> feature_names, std::uint64_t seed)
    : TrainedModel(std::move(feature_names), seed),
      spec_(spec),
      standardizer_(std::move(standardizer)),
      support_vectors_(std::move(support_vectors)),
      dual_coef_(std::move(dual_coef)),
      rho_(rho),
      platt_a_(platt_a),
      platt_b_(platt_b) {}

std::size_t SvmModel::support_vector_count() const { return dual_coef_.size(); }

double SvmModel::margin(std::span<const double> features) const {
    const std::size_t cols = feature_names_.size();
    double z[kNumFeatures];
    for (std::size_t c = 0; c < cols; ++c) {
        z[c] = (features[c] - standardizer_.mean[c]) / standardizer_.sd[c];
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < dual_coef_.size(); ++i) {
        const double* sv = support_vectors_.data() + i * cols;
        double d2 = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            const double d = z[c] - sv[c];
            d2 += d * d;
        }
        const double t = spec_.sigma * d2;
        // exp(-t) below 1e-19 cannot move the decision value; skip the exp.
        if (t < 45.0) sum += dual_coef_[i] * std::exp(-t);
    }
    return sum - rho_;
}

double SvmModel::predict_proba(std::span<const double> features) const {
    return sigmoid(-(platt_a_ * margin(features) + platt_b_));
}

// ---------------------------------------------------------------------------
// Training entry points
// ---------------------------------------------------------------------------

TrainingData TrainingData::from_dataset(const Dataset& data) {
    TrainingData td;
    td.rows = data.size();
    td.values.reserve(data.size() * kNumFeatures);
    td.labels.reserve(data.size());
    for (const FeatureVector& v : data) {
        const auto row = v.values();
        for (const double x : row) {
            if (!std::isfinite(x)) {
                throw DataError("training data contains a non-finite feature value");
            }
        }
        td.values.insert(td.values.end(), row.begin(), row.end());
        td.labels.push_back(v.label);
    }
    return td;
}

std::unique_ptr<TrainedModel> train(const ModelSpec& spec, const Dataset& data,
                                    std::uint64_t seed, int threads) {
    validate_spec(spec);
    const TrainingData td = TrainingData::from_dataset(data);
    const auto [neg, pos] = class_counts(data);
    if (neg == 0 || pos == 0) {
        throw DataError("training data must contain both classes (got " + std::to_string(neg) +
                        " negative, " + std::to_string(pos) + " positive)");
    }
    return std::visit(
        [&](const auto& s) -> std::unique_ptr<TrainedModel> {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, RandomForestSpec>) {
                return train_forest(s, td, seed, threads);
            } else if constexpr (std::is_same_v<T, GradientBoostSpec>) {
                return train_boost(s, td, seed);
            } else if constexpr (std::is_same_v<T, LogisticRegressionSpec>) {
                return train_logistic(s, td, seed);
            } else {
                return train_svm(s, td, seed);
            }
        },
        spec);
}

std::vector<double> predict_proba_all(const TrainedModel& model, const Dataset& data,
                                      int threads) {
    if (model.feature_names() != canonical_feature_names()) {
        throw DataError("model feature order does not match the canonical feature set");
    }
    std::vector<double> out(data.size());
    parallel_for(
        data.size(),
        [&](std::size_t i) {
            const auto row = data[i].values();
            out[i] = model.predict_proba(row);
        },
        threads);
    return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json trees_to_json(const std::vector<Tree>& trees) {
    json arr = json::array();
    for (const Tree& t : trees) {
        json node = {{"feature", json::array()},   {"threshold", json::array()},
                     {"left", json::array()},      {"right", json::array()},
                     {"value", json::array()},     {"cover", json::array()}};
        for (const TreeNode& n : t.nodes) {
            node["feature"].push_back(n.feature);
            node["threshold"].push_back(n.threshold);
            node["left"].push_back(n.left);
            node["right"].push_back(n.right);
            node["value"].push_back(n.value);
            node["cover"].push_back(n.cover);
        }
        arr.push_back(std::move(node));
    }
    return arr;
}

std::vector<Tree> trees_from_json(const json& arr) {
    std::vector<Tree> trees;
    trees.reserve(arr.size());
    for (const json& jt : arr) {
        Tree t;
        const auto& feature = jt.at("feature");
        const std::size_t n = feature.size();
        for (const char* key : {"threshold", "left", "right", "value", "cover"}) {
            if (jt.at(key).size() != n) throw DataError("model file: ragged tree arrays");
        }
        t.nodes.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            t.nodes[i].feature = feature[i].get<std::int32_t>();
            t.nodes[i].threshold = jt.at("threshold")[i].get<double>();
            t.nodes[i].left = jt.at("left")[i].get<std::int32_t>();
            t.nodes[i].right = jt.at("right")[i].get<std::int32_t>();
            t.nodes[i].value = jt.at("value")[i].get<double>();
            t.nodes[i].cover = jt.at("cover")[i].get<double>();
        }
        if (t.nodes.empty()) throw DataError("model file: empty tree");
        for (const TreeNode& node : t.nodes) {
            if (node.is_leaf()) continue;
            const auto limit = static_cast<std::int32_t>(n);
            if (node.left < 0 || node.left >= limit || node.right < 0 || node.right >= limit) {
                throw DataError("model file: tree child index out of range");
            }
        }
        trees.push_back(std::move(t));
    }
    return trees;
}

json standardizer_to_json(const Standardizer& s) {
    return {{"mean", s.mean}, {"sd", s.sd}};
}

Standardizer standardizer_from_json(const json& j) {
    Standardizer s;
    s.mean = j.at("mean").get<std::vector<double>>();
    s.sd = j.at("sd").get<std::vector<double>>();
    if (s.mean.size() != s.sd.size()) throw DataError("model file: ragged standardizer");
    return s;
}

json spec_to_json(const ModelSpec& spec) {
    return std::visit(
        [](const auto& s) -> json {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, RandomForestSpec>) {
                return {{"trees", s.trees},
                        {"max_depth", s.max_depth},
                        {"mtry", s.mtry},
                        {"bootstrap", s.bootstrap}};
            } else if constexpr (std::is_same_v<T, GradientBoostSpec>) {
                return {{"trees", s.trees},
                        {"max_depth", s.max_depth},
                        {"learning_rate", s.learning_rate},
                        {"l2_leaf_penalty", s.l2_leaf_penalty}};
            } else if constexpr (std::is_same_v<T, LogisticRegressionSpec>) {
                return {{"lambda", s.lambda}};
            } else {
                return {{"c", s.c}, {"sigma", s.sigma}};
            }
        },
        spec);
}

}  // namespace

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
    json doc;
    doc["schema_version"] = 1;
    doc["kind"] = model.kind();
    doc["feature_names"] = model.feature_names();
    doc["training_seed"] = model.training_seed();
    doc["spec"] = spec_to_json(model.spec());

    if (const auto* forest = dynamic_cast<const ForestModel*>(&model)) {
        doc["standardizer"] = nullptr;
        doc["parameters"] = {{"trees", trees_to_json(forest->trees())}};
    } else if (const auto* boost = dynamic_cast<const BoostModel*>(&model)) {
        doc["standardizer"] = nullptr;
        doc["parameters"] = {{"base_margin", boost->base_margin()},
                             {"trees", trees_to_json(boost->trees())}};
    } else if (const auto* logistic = dynamic_cast<const LogisticModel*>(&model)) {
        doc["standardizer"] = standardizer_to_json(logistic->standardizer());
        doc["parameters"] = {{"weights", logistic->weights()},
                             {"intercept", logistic->intercept()}};
    } else if (const auto* svm = dynamic_cast<const SvmModel*>(&model)) {
        doc["standardizer"] = standardizer_to_json(svm->standardizer());
        doc["parameters"] = {{"support_vectors", svm->support_vectors()},
                             {"dual_coef", svm->dual_coef()},
                             {"rho", svm->rho()},
                             {"platt_a", svm->platt_a()},
                             {"platt_b", svm->platt_b()}};
    } else {
        throw DataError("save_model: unknown model kind");
    }
    write_file_atomic(path, doc.dump(2) + "\n");
}

std::unique_ptr<TrainedModel> load_model(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw DataError(path.string() + ": model file is not valid JSON: " + e.what());
    }
    try {
        if (!doc.contains("schema_version") || doc["schema_version"].get<int>() != 1) {
            throw DataError(path.string() + ": unsupported model schema version");
        }
        const std::string kind = doc.at("kind").get<std::string>();
        auto names = doc.at("feature_names").get<std::vector<std::string>>();
        const auto seed = doc.at("training_seed").get<std::uint64_t>();
        const json& spec = doc.at("spec");
        const json& params = doc.at("parameters");

        if (kind == "random_forest") {
            RandomForestSpec s;
            s.trees = spec.at("trees").get<int>();
            s.max_depth = spec.at("max_depth").get<int>();
            s.mtry = spec.at("mtry").get<int>();
            s.bootstrap = spec.at("bootstrap").get<bool>();
            return std::make_unique<ForestModel>(s, trees_from_json(params.at("trees")),
                                                 std::move(names), seed);
        }
        if (kind == "gradient_boost") {
            GradientBoostSpec s;
            s.trees = spec.at("trees").get<int>();
            s.max_depth = spec.at("max_depth").get<int>();
            s.learning_rate = spec.at("learning_rate").get<double>();
            s.l2_leaf_penalty = spec.at("l2_leaf_penalty").get<double>();
            return std::make_unique<BoostModel>(s, params.at("base_margin").get<double>(),
                                                trees_from_json(params.at("trees")),
                                                std::move(names), seed);
        }
        if (kind == "logistic_regression") {
            LogisticRegressionSpec s;
            s.lambda = spec.at("lambda").get<double>();
            return std::make_unique<LogisticModel>(
                s, standardizer_from_json(doc.at("standardizer")),
                params.at("weights").get<std::vector<double>>(),
                params.at("intercept").get<double>(), std::move(names), seed);
        }
        if (kind == "rbf_svm") {
            RbfSvmSpec s;
            s.c = spec.at("c").get<double>();
            s.sigma = spec.at("sigma").get<double>();
            auto svs = params.at("support_vectors").get<std::vector<double>>();
            auto coef = params.at("dual_coef").get<std::vector<double>>();
            if (coef.empty() || svs.size() != coef.size() * names.size()) {
                throw DataError(path.string() + ": support vector shape mismatch");
            }
            return std::make_unique<SvmModel>(s, standardizer_from_json(doc.at("standardizer")),
                                              std::move(svs), std::move(coef),
                                              params.at("rho").get<double>(),
                                              params.at("platt_a").get<double>(),
                                              params.at("platt_b").get<double>(),
                                              std::move(names), seed);
        }
        throw DataError(path.string() + ": unknown model kind '" + kind + "'");
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": malformed model file: " + e.what());
    }
}

}  // namespace hyperdet
