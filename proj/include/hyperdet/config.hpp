#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hyperdet/eval.hpp"
#include "hyperdet/kalman.hpp"
#include "hyperdet/model.hpp"
#include "hyperdet/sampling.hpp"
#include "hyperdet/synth.hpp"
#include "hyperdet/windowing.hpp"

namespace hyperdet {

/// Declarative run configuration shared by every subcommand. All randomness
/// flows from the single root `seed` through named per-stage derivations, so
/// one integer reproduces an entire run.
struct RunConfig {
    std::uint64_t seed = 0;
    bool seed_set = false;  // the seed must come from the config file or --seed
    int threads = 0;        // 0 = hardware default
    std::filesystem::path out_dir = "out";

    // Input locations; default to files inside out_dir (where `synth` puts them).
    std::filesystem::path samples_path;  // empty = out_dir/samples.csv
    std::filesystem::path events_path;   // empty = out_dir/events.csv

    SynthConfig synth;
    bool synth_seed_set = false;  // explicit synth.seed overrides the derivation
    ImputationConfig imputation;
    WindowParams windowing;
    double train_fraction = 0.7;
    ResampleSpec resample;
    std::vector<ModelSpec> models;          // default: all four kinds
    std::vector<OperatingRegime> regimes;   // default: tpr_floor 1.0 / 0.5, fpr_cap 0.1
    std::vector<std::string> explain_models;  // default: {"gradient_boost"}
    std::size_t explain_max_instances = 200;
    bool emit_plots = false;

    // Artifact locations (fixed names under out_dir).
    std::filesystem::path samples_file() const;
    std::filesystem::path events_file() const;
    std::filesystem::path truth_file() const;
    std::filesystem::path imputed_samples_file() const;
    std::filesystem::path windows_file() const;
    std::filesystem::path features_file() const;
    std::filesystem::path split_manifest_file() const;
    std::filesystem::path model_file(std::string_view kind) const;
    std::filesystem::path report_file() const;
    std::filesystem::path roc_file(std::string_view kind) const;
    std::filesystem::path comparisons_file() const;
    std::filesystem::path cv_accuracies_file() const;
    std::filesystem::path shap_summary_file(std::string_view kind) const;
    std::filesystem::path shap_values_file(std::string_view kind) const;

    /// Checks every invariant: seed present, nested configs valid, model kinds
    /// distinct, explain targets tree ensembles drawn from `models`, and all
    /// referenced file paths distinct. Throws ConfigError.
    void validate() const;
};

/// The built-in defaults (models, regimes, explain targets filled in).
RunConfig default_run_config();

/// Parses a JSON config file over the defaults. Unknown keys are rejected so
/// typos fail loudly. Throws ConfigError naming the file and offending key.
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace hyperdet
