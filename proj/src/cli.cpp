#include "hyperdet/cli.hpp"

#include <cstdint>
#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "hyperdet/error.hpp"
#include "hyperdet/eval.hpp"
#include "hyperdet/features.hpp"
#include "hyperdet/io.hpp"
#include "hyperdet/model.hpp"
#include "hyperdet/parallel.hpp"
#include "hyperdet/plot.hpp"
#include "hyperdet/rng.hpp"
#include "hyperdet/sampling.hpp"
#include "hyperdet/shap.hpp"
#include "hyperdet/synth.hpp"
#include "hyperdet/text.hpp"
#include "hyperdet/windowing.hpp"

namespace hyperdet {

namespace {

std::uint64_t stage_seed(const RunConfig& cfg, std::string_view stage,
                         std::uint64_t index = 0) {
    return Rng(cfg.seed).derive(stage, index).seed();
}

std::vector<Recording> load_validated_recordings(const RunConfig& cfg,
                                                 const std::filesystem::path& samples) {
    std::vector<Recording> recordings = load_recordings(samples, cfg.events_file());
    for (const Recording& r : recordings) {
        const std::vector<Violation> violations = validate_recording(r);
        if (!violations.empty()) {
            const Violation& v = violations.front();
            throw DataError("file '" + samples.string() + "', participant '" +
                            r.participant_id + "': " + std::to_string(violations.size()) +
                            " validation violation(s); first: " + v.field + " at timestamp " +
                            std::to_string(v.timestamp) + " violates rule: " + v.rule);
        }
    }
    return recordings;
}

std::pair<Dataset, Dataset> load_split_features(const RunConfig& cfg) {
    const Dataset data = read_features(cfg.features_file());
    return apply_split_manifest(data, cfg.split_manifest_file());
}

std::vector<int> labels_of(const Dataset& data) {
    std::vector<int> labels(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) labels[i] = data[i].label;
    return labels;
}

// Shared by `evaluate` and `pipeline`: loads each trained model, scores the
// test fold, writes the per-model ROC files, and returns the evaluations.
std::vector<ModelEvaluation> evaluate_models(const RunConfig& cfg) {
    const auto [train_set, test_set] = load_split_features(cfg);
    const std::vector<int> labels = labels_of(test_set);
    std::vector<ModelEvaluation> evaluations;
    evaluations.reserve(cfg.models.size());
    for (const ModelSpec& spec : cfg.models) {
        const std::string_view kind = model_kind(spec);
        const std::unique_ptr<TrainedModel> model = load_model(cfg.model_file(kind));
        const std::vector<double> scores = predict_proba_all(*model, test_set, cfg.threads);
        ModelEvaluation eval =
            evaluate_scores(std::string(kind), scores, labels, cfg.regimes);
        write_file_atomic(cfg.roc_file(kind), render_roc_csv(eval.roc));
        evaluations.push_back(std::move(eval));
    }
    return evaluations;
}

// Shared by `compare` and `pipeline`: runs the 5x2cv grid over all configured
// models, writes the accuracy and pairwise-comparison files, returns the rows.
std::vector<ComparisonRow> compare_models(const RunConfig& cfg) {
    if (cfg.models.size() < 2) {
        throw ConfigError("compare needs at least two models in the config");
    }
    const Dataset data = read_features(cfg.features_file());
    const CvAccuracyGrid grid = cv5x2_accuracies(cfg.models, data, cfg.resample,
                                                 stage_seed(cfg, "compare"), cfg.threads);

    std::string acc_csv = "replication,fold,model,accuracy\n";
    for (std::size_t rep = 0; rep < grid.size(); ++rep) {
        for (std::size_t fold = 0; fold < 2; ++fold) {
            for (std::size_t m = 0; m < cfg.models.size(); ++m) {
                acc_csv += format_int(static_cast<std::int64_t>(rep) + 1);
                acc_csv += ',';
                acc_csv += format_int(static_cast<std::int64_t>(fold) + 1);
                acc_csv += ',';
                acc_csv += std::string(model_kind(cfg.models[m]));
                acc_csv += ',';
                acc_csv += format_real(grid[rep][fold][m]);
                acc_csv += '\n';
            }
        }
    }
    write_file_atomic(cfg.cv_accuracies_file(), acc_csv);

    std::vector<ComparisonRow> rows;
    std::string cmp_csv = "model_a,model_b,t_statistic,p_value,degrees_of_freedom\n";
    for (std::size_t a = 0; a < cfg.models.size(); ++a) {
        for (std::size_t b = a + 1; b < cfg.models.size(); ++b) {
            std::array<std::array<double, 2>, 5> differences{};
            for (std::size_t rep = 0; rep < 5; ++rep) {
                for (std::size_t fold = 0; fold < 2; ++fold) {
                    differences[rep][fold] = grid[rep][fold][a] - grid[rep][fold][b];
                }
            }
            ComparisonRow row{std::string(model_kind(cfg.models[a])),
                              std::string(model_kind(cfg.models[b])),
                              cv5x2_from_differences(differences)};
            cmp_csv += row.model_a;
            cmp_csv += ',';
            cmp_csv += row.model_b;
            cmp_csv += ',';
            cmp_csv += format_real(row.result.t_statistic);
            cmp_csv += ',';
            cmp_csv += format_real(row.result.p_value);
            cmp_csv += ',';
            cmp_csv += format_int(row.result.degrees_of_freedom);
            cmp_csv += '\n';
            rows.push_back(std::move(row));
        }
    }
    write_file_atomic(cfg.comparisons_file(), cmp_csv);
    return rows;
}

}  // namespace

void stage_synth(const RunConfig& cfg) {
    SynthConfig synth = cfg.synth;
    if (!cfg.synth_seed_set) synth.seed = stage_seed(cfg, "synth");
    const SynthResult result = generate(synth);
    std::filesystem::create_directories(cfg.out_dir);
    write_recordings(result.recordings, cfg.samples_file(), cfg.events_file());
    write_truth(result.truth, cfg.truth_file());
}

void stage_preprocess(const RunConfig& cfg) {
    const std::vector<Recording> recordings =
        load_validated_recordings(cfg, cfg.samples_file());
    std::filesystem::create_directories(cfg.out_dir);

    std::vector<Recording> imputed;
    std::vector<Window> windows;
    imputed.reserve(recordings.size());
    for (const Recording& r : recordings) {
        imputed.push_back(impute_recording(r, cfg.imputation));
        std::vector<Window> w = make_windows(r, cfg.imputation, cfg.windowing);
        windows.insert(windows.end(), std::make_move_iterator(w.begin()),
                       std::make_move_iterator(w.end()));
    }
    // The events file is an input here, not an artifact: write samples only.
    write_samples(imputed, cfg.imputed_samples_file());
    write_windows(windows, cfg.windows_file());
}

void stage_features(const RunConfig& cfg) {
    const std::vector<Recording> recordings =
        load_validated_recordings(cfg, cfg.imputed_samples_file());
    Dataset data;
    for (const Recording& r : recordings) {
        for (const Window& w : make_windows(r, cfg.imputation, cfg.windowing)) {
            FeatureResult result = extract_features(w);
            if (result.vec) data.push_back(std::move(*result.vec));
        }
    }
    if (data.empty()) {
        throw DataError("features: no usable windows in '" +
                        cfg.imputed_samples_file().string() + "'");
    }
    std::filesystem::create_directories(cfg.out_dir);
    write_features(data, cfg.features_file());
}

void stage_split(const RunConfig& cfg) {
    const Dataset data = read_features(cfg.features_file());
    const SplitResult split =
        split_by_participant(data, cfg.train_fraction, stage_seed(cfg, "split"));
    write_split_manifest(split, cfg.split_manifest_file());
}

void stage_train(const RunConfig& cfg) {
    const auto [train_set, test_set] = load_split_features(cfg);
    ResampleSpec resample = cfg.resample;
    resample.seed = stage_seed(cfg, "resample");
    const Dataset upsampled = upsample_minority(train_set, resample);
    for (std::size_t m = 0; m < cfg.models.size(); ++m) {
        const ModelSpec& spec = cfg.models[m];
        const std::unique_ptr<TrainedModel> model =
            train(spec, upsampled, stage_seed(cfg, "train", m), cfg.threads);
        save_model(*model, cfg.model_file(model_kind(spec)));
    }
}

void stage_evaluate(const RunConfig& cfg) {
    const std::vector<ModelEvaluation> evaluations = evaluate_models(cfg);
    write_file_atomic(cfg.report_file(), render_evaluation_report(evaluations, {}));
}

void stage_compare(const RunConfig& cfg) { compare_models(cfg); }

void stage_explain(const RunConfig& cfg) {
    const auto [train_set, test_set] = load_split_features(cfg);
    Dataset subset = test_set;
    if (subset.size() > cfg.explain_max_instances) {
        subset.resize(cfg.explain_max_instances);
    }
    const TrainingData instances = TrainingData::from_dataset(subset);
    const MatrixView x = instances.matrix();

    for (const std::string& kind : cfg.explain_models) {
        const std::unique_ptr<TrainedModel> model = load_model(cfg.model_file(kind));
        const std::vector<ShapExplanation> explanations =
            explain_instances(*model, x, cfg.threads);
        const SummaryData summary = summarize(explanations, x, model->feature_names());
        write_file_atomic(cfg.shap_summary_file(kind), render_shap_summary_csv(summary));
        write_file_atomic(cfg.shap_values_file(kind),
                          render_shap_values_csv(explanations, x, model->feature_names()));
        if (cfg.emit_plots) {
            write_file_atomic(cfg.out_dir / ("shap_summary_" + kind + ".svg"),
                              render_summary_svg(summary, "mean |SHAP| — " + kind));
            const std::size_t top = std::min<std::size_t>(3, summary.features.size());
            for (std::size_t i = 0; i < top; ++i) {
                const std::string& feature = summary.features[i].name;
                const DependenceData dep =
                    dependence(explanations, x, model->feature_names(), feature);
                write_file_atomic(
                    cfg.out_dir / ("shap_dependence_" + kind + "_" + feature + ".svg"),
                    render_dependence_svg(dep, feature + " — " + kind));
            }
        }
    }
}

void stage_pipeline(const RunConfig& cfg) {
    stage_synth(cfg);
    stage_preprocess(cfg);
    stage_features(cfg);
    stage_split(cfg);
    stage_train(cfg);
    const std::vector<ModelEvaluation> evaluations = evaluate_models(cfg);
    std::vector<ComparisonRow> comparisons;
    if (cfg.models.size() >= 2) comparisons = compare_models(cfg);
    write_file_atomic(cfg.report_file(), render_evaluation_report(evaluations, comparisons));
    stage_explain(cfg);
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"hyperdet: wearable-stream hyperarousal event detection pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out_dir;
    app.add_option("--config", config_path, "Run configuration file (JSON)");
    auto* seed_opt = app.add_option("--seed", seed, "Root seed (overrides the config)");
    auto* threads_opt = app.add_option("--threads", threads, "Worker thread cap (0 = auto)");
    auto* out_opt = app.add_option("--out", out_dir, "Output directory (overrides the config)");

    const std::map<std::string, void (*)(const RunConfig&)> stages = {
        {"synth", stage_synth},         {"preprocess", stage_preprocess},
        {"features", stage_features},   {"split", stage_split},
        {"train", stage_train},         {"evaluate", stage_evaluate},
        {"compare", stage_compare},     {"explain", stage_explain},
        {"pipeline", stage_pipeline},
    };
    const std::map<std::string, std::string> descriptions = {
        {"synth", "Generate synthetic wearable streams with ground truth"},
        {"preprocess", "Validate, impute, and window the sample streams"},
        {"features", "Extract window features from imputed samples"},
        {"split", "Write the participant-level train/test manifest"},
        {"train", "Train the configured models on the upsampled train fold"},
        {"evaluate", "Score the test fold and write the evaluation report"},
        {"compare", "Run pairwise 5x2cv model comparisons"},
        {"explain", "Export SHAP attributions for the tree models"},
        {"pipeline", "Run every stage end to end"},
    };
    for (const auto& [name, desc] : descriptions) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::string stage = app.get_subcommands().front()->get_name();
    try {
        RunConfig cfg = config_path.empty() ? default_run_config() : load_run_config(config_path);
        if (seed_opt->count() > 0) {
            cfg.seed = seed;
            cfg.seed_set = true;
        }
        if (threads_opt->count() > 0) cfg.threads = threads;
        if (out_opt->count() > 0) cfg.out_dir = out_dir;
        cfg.validate();
        set_default_threads(cfg.threads);
        stages.at(stage)(cfg);
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "hyperdet " << stage << ": config error: " << e.what() << '\n';
        return 2;
    } catch (const TrainError& e) {
        std::cerr << "hyperdet " << stage << ": training error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "hyperdet " << stage << ": data error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "hyperdet " << stage << ": error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace hyperdet
