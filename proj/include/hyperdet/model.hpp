#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hyperdet/features.hpp"
#include "hyperdet/tree.hpp"

namespace hyperdet {

// ---------------------------------------------------------------------------
// Hyperparameter specs
// ---------------------------------------------------------------------------

struct RandomForestSpec {
    int trees = 50;
    int max_depth = 28;
    // Candidate features per split; clamped to the actual feature count at
    // training time.
    int mtry = 10;
    // Test hook: disable bagging so a 1-tree forest is a plain decision tree.
    bool bootstrap = true;

    void validate() const;
};

struct GradientBoostSpec {
    int trees = 50;
    int max_depth = 37;
    double learning_rate = 0.3;
    double l2_leaf_penalty = 1.0;

    void validate() const;
};

struct LogisticRegressionSpec {
    double lambda = 0.03240;  // L2 penalty on weights, intercept excluded

    void validate() const;
};

struct RbfSvmSpec {
    double c = 5.0;
    double sigma = 12.0;  // k(x,z) = exp(-sigma * ||x-z||^2)

    void validate() const;
};

using ModelSpec =
    std::variant<RandomForestSpec, GradientBoostSpec, LogisticRegressionSpec, RbfSvmSpec>;

// Stable identifier per spec alternative: "random_forest", "gradient_boost",
// "logistic_regression", "rbf_svm".
std::string_view model_kind(const ModelSpec& spec);
void validate_spec(const ModelSpec& spec);

// ---------------------------------------------------------------------------
// Standardization (scale-sensitive models only)
// ---------------------------------------------------------------------------

// Per-feature mean and sample standard deviation estimated on training data.
// Constant features get deviation 1 (with a stderr warning at fit time) so
// transforms stay finite.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> sd;

    static Standardizer fit(const MatrixView& x);
    void transform(std::span<double> row) const;
};

// ---------------------------------------------------------------------------
// Trained models
// ---------------------------------------------------------------------------

class TrainedModel {
public:
    virtual ~TrainedModel() = default;

    virtual std::string_view kind() const = 0;
    virtual ModelSpec spec() const = 0;
    // Raw score: log-odds for the tree models and logistic regression,
    // decision-function units for the SVM. predict_proba is monotone in it.
    virtual double margin(std::span<const double> features) const = 0;
    virtual double predict_proba(std::span<const double> features) const = 0;

    const std::vector<std::string>& feature_names() const { return feature_names_; }
    std::uint64_t training_seed() const { return training_seed_; }

protected:
    TrainedModel(std::vector<std::string> feature_names, std::uint64_t training_seed)
        : feature_names_(std::move(feature_names)), training_seed_(training_seed) {}

    std::vector<std::string> feature_names_;
    std::uint64_t training_seed_;
};

class ForestModel final : public TrainedModel {
public:
    ForestModel(RandomForestSpec spec, std::vector<Tree> trees,
                std::vector<std::string> feature_names, std::uint64_t seed);

    std::string_view kind() const override { return "random_forest"; }
    ModelSpec spec() const override { return spec_; }
    // Mean leaf fraction over the trees; the margin is its logit clamped to
    // +/-16 so pure forests stay finite.
    double margin(std::span<const double> features) const override;
    double predict_proba(std::span<const double> features) const override;

    double fraction(std::span<const double> features) const;
    const std::vector<Tree>& trees() const { return trees_; }
    const RandomForestSpec& forest_spec() const { return spec_; }

private:
    RandomForestSpec spec_;
    std::vector<Tree> trees_;
};

class BoostModel final : public TrainedModel {
public:
    BoostModel(GradientBoostSpec spec, double base_margin, std::vector<Tree> trees,
               std::vector<std::string> feature_names, std::uint64_t seed);

    std::string_view kind() const override { return "gradient_boost"; }
    ModelSpec spec() const override { return spec_; }
    double margin(std::span<const double> features) const override;
    double predict_proba(std::span<const double> features) const override;

    double base_margin() const { return base_margin_; }
    const std::vector<Tree>& trees() const { return trees_; }
    const GradientBoostSpec& boost_spec() const { return spec_; }

private:
    GradientBoostSpec spec_;
    double base_margin_;
    std::vector<Tree> trees_;
};

class LogisticModel final : public TrainedModel {
public:
    LogisticModel(LogisticRegressionSpec spec, Standardizer standardizer,
                  std::vector<double> weights, double intercept,
                  std::vector<std::string> feature_names, std::uint64_t seed);

    std::string_view kind() const override { return "logistic_regression"; }
    ModelSpec spec() const override { return spec_; }
    double margin(std::span<const double> features) const override;
    double predict_proba(std::span<const double> features) const override;

    const std::vector<double>& weights() const { return weights_; }
    double intercept() const { return intercept_; }
    const Standardizer& standardizer() const { return standardizer_; }

private:
    LogisticRegressionSpec spec_;
    Standardizer standardizer_;
    std::vector<double> weights_;
    double intercept_;
};

class SvmModel final : public TrainedModel {
public:
    SvmModel(RbfSvmSpec spec, Standardizer standardizer, std::vector<double> support_vectors,
             std::vector<double> dual_coef, double rho, double platt_a, double platt_b,
             std::vector<std::string> feature_names, std::uint64_t seed);

    std::string_view kind() const override { return "rbf_svm"; }
    ModelSpec spec() const override { return spec_; }
    // Decision value sum_i alpha_i y_i k(sv_i, x) - rho on standardized inputs.
    double margin(std::span<const double> features) const override;
    // Platt scaling: 1 / (1 + exp(a * margin + b)).
    double predict_proba(std::span<const double> features) const override;

    std::size_t support_vector_count() const;
    const std::vector<double>& support_vectors() const { return support_vectors_; }
    const std::vector<double>& dual_coef() const { return dual_coef_; }
    double rho() const { return rho_; }
    double platt_a() const { return platt_a_; }
    double platt_b() const { return platt_b_; }
    const Standardizer& standardizer() const { return standardizer_; }

private:
    RbfSvmSpec spec_;
    Standardizer standardizer_;
    std::vector<double> support_vectors_;  // row-major, standardized units
    std::vector<double> dual_coef_;        // alpha_i * y_i per support vector
    double rho_;
    double platt_a_;
    double platt_b_;
};

// ---------------------------------------------------------------------------
// Training and scoring
// ---------------------------------------------------------------------------

// Flat training view assembled from a Dataset.
struct TrainingData {
    std::vector<double> values;  // rows x kNumFeatures
    std::vector<int> labels;
    std::size_t rows = 0;

    static TrainingData from_dataset(const Dataset& data);
    MatrixView matrix() const { return {values.data(), rows, kNumFeatures}; }
};

// Trains one model. Requires both classes present and finite features;
// parallelism (forest trees) never changes the result. Optimizer-backed models
// throw TrainError past their iteration caps.
std::unique_ptr<TrainedModel> train(const ModelSpec& spec, const Dataset& data,
                                    std::uint64_t seed, int threads = 0);

// Per-row probabilities, parallel across rows, order preserved.
std::vector<double> predict_proba_all(const TrainedModel& model, const Dataset& data,
                                      int threads = 0);

// Internal entry points shared by train() and the tests.
std::unique_ptr<TrainedModel> train_forest(const RandomForestSpec& spec, const TrainingData& data,
                                           std::uint64_t seed, int threads);
std::unique_ptr<TrainedModel> train_boost(const GradientBoostSpec& spec, const TrainingData& data,
                                          std::uint64_t seed);
std::unique_ptr<TrainedModel> train_logistic(const LogisticRegressionSpec& spec,
                                             const TrainingData& data, std::uint64_t seed);
std::unique_ptr<TrainedModel> train_svm(const RbfSvmSpec& spec, const TrainingData& data,
                                        std::uint64_t seed);

// ---------------------------------------------------------------------------
// Serialization: structured text (JSON) with schema_version 1; reals survive
// a round trip bit-exactly.
// ---------------------------------------------------------------------------

void save_model(const TrainedModel& model, const std::filesystem::path& path);
std::unique_ptr<TrainedModel> load_model(const std::filesystem::path& path);

}  // namespace hyperdet
