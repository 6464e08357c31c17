#include "hyperdet/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"

#include "hyperdet/error.hpp"
#include "hyperdet/text.hpp"

namespace hyperdet {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw ConfigError("run config: " + what); }

void check_object(const json& value, const std::string& where) {
    if (!value.is_object()) fail(where + " must be a JSON object");
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
    for (const auto& [key, unused] : obj.items()) {
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* a) { return key == a; }) == allowed.end()) {
            fail("unknown key '" + key + "' in " + where);
        }
    }
}

double num_field(const json& obj, const char* key, double fallback, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number()) fail(where + "." + key + " must be a number");
    return it->get<double>();
}

int int_field(const json& obj, const char* key, int fallback, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number_integer()) fail(where + "." + key + " must be an integer");
    return it->get<int>();
}

bool bool_field(const json& obj, const char* key, bool fallback, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_boolean()) fail(where + "." + key + " must be a boolean");
    return it->get<bool>();
}

std::string string_field(const json& obj, const char* key, const std::string& fallback,
                         const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_string()) fail(where + "." + key + " must be a string");
    return it->get<std::string>();
}

std::uint64_t seed_value(const json& value, const std::string& where) {
    if (!value.is_number_integer() ||
        (value.is_number_integer() && !value.is_number_unsigned() && value.get<long long>() < 0)) {
        fail(where + " must be a non-negative integer");
    }
    return value.get<std::uint64_t>();
}

ModelSpec model_spec_from_json(const json& entry, const std::string& where) {
    std::string kind;
    const json* obj = nullptr;
    if (entry.is_string()) {
        kind = entry.get<std::string>();
    } else if (entry.is_object()) {
        obj = &entry;
        kind = string_field(entry, "kind", "", where);
        if (kind.empty()) fail(where + " object needs a 'kind' string");
    } else {
        fail(where + " must be a kind string or an object with overrides");
    }

    static const json empty = json::object();
    const json& over = obj != nullptr ? *obj : empty;
    if (kind == "random_forest") {
        check_keys(over, {"kind", "trees", "max_depth", "mtry", "bootstrap"}, where);
        RandomForestSpec spec;
        spec.trees = int_field(over, "trees", spec.trees, where);
        spec.max_depth = int_field(over, "max_depth", spec.max_depth, where);
        spec.mtry = int_field(over, "mtry", spec.mtry, where);
        spec.bootstrap = bool_field(over, "bootstrap", spec.bootstrap, where);
        return spec;
    }
    if (kind == "gradient_boost") {
        check_keys(over, {"kind", "trees", "max_depth", "learning_rate", "l2_leaf_penalty"},
                   where);
        GradientBoostSpec spec;
        spec.trees = int_field(over, "trees", spec.trees, where);
        spec.max_depth = int_field(over, "max_depth", spec.max_depth, where);
        spec.learning_rate = num_field(over, "learning_rate", spec.learning_rate, where);
        spec.l2_leaf_penalty = num_field(over, "l2_leaf_penalty", spec.l2_leaf_penalty, where);
        return spec;
    }
    if (kind == "logistic_regression") {
        check_keys(over, {"kind", "lambda"}, where);
        LogisticRegressionSpec spec;
        spec.lambda = num_field(over, "lambda", spec.lambda, where);
        return spec;
    }
    if (kind == "rbf_svm") {
        check_keys(over, {"kind", "c", "sigma"}, where);
        RbfSvmSpec spec;
        spec.c = num_field(over, "c", spec.c, where);
        spec.sigma = num_field(over, "sigma", spec.sigma, where);
        return spec;
    }
    fail(where + ": unknown model kind '" + kind + "'");
}

OperatingRegime regime_from_json(const json& entry, const std::string& where) {
    check_object(entry, where);
    if (entry.size() != 1) fail(where + " must hold exactly one of tpr_floor/fpr_cap");
    OperatingRegime regime;
    if (entry.contains("tpr_floor")) {
        regime.kind = OperatingRegime::Kind::TprFloor;
        regime.value = num_field(entry, "tpr_floor", 0.0, where);
    } else if (entry.contains("fpr_cap")) {
        regime.kind = OperatingRegime::Kind::FprCap;
        regime.value = num_field(entry, "fpr_cap", 0.0, where);
    } else {
        fail(where + " must hold exactly one of tpr_floor/fpr_cap");
    }
    if (!(regime.value >= 0.0 && regime.value <= 1.0)) {
        fail(where + " rate must lie in [0,1]");
    }
    return regime;
}

void parse_synth(const json& obj, RunConfig& cfg) {
    const std::string where = "synth";
    check_object(obj, where);
    check_keys(obj,
               {"participants", "duration", "baseline_hr", "hr_ar_coefficient", "hr_noise_sd",
                "event_rate", "event_duration", "event_hr_shift", "event_hr_sd_multiplier",
                "event_activity_multiplier", "activity_episode_rate", "missing_rate",
                "missing_burst_mean", "seed"},
               where);
    SynthConfig& s = cfg.synth;
    s.participants = int_field(obj, "participants", s.participants, where);
    s.duration = num_field(obj, "duration", s.duration, where);
    s.baseline_hr = num_field(obj, "baseline_hr", s.baseline_hr, where);
    s.hr_ar_coefficient = num_field(obj, "hr_ar_coefficient", s.hr_ar_coefficient, where);
    s.hr_noise_sd = num_field(obj, "hr_noise_sd", s.hr_noise_sd, where);
    s.event_rate = num_field(obj, "event_rate", s.event_rate, where);
    s.event_duration = num_field(obj, "event_duration", s.event_duration, where);
    s.event_hr_shift = num_field(obj, "event_hr_shift", s.event_hr_shift, where);
    s.event_hr_sd_multiplier =
        num_field(obj, "event_hr_sd_multiplier", s.event_hr_sd_multiplier, where);
    s.event_activity_multiplier =
        num_field(obj, "event_activity_multiplier", s.event_activity_multiplier, where);
    s.activity_episode_rate =
        num_field(obj, "activity_episode_rate", s.activity_episode_rate, where);
    s.missing_rate = num_field(obj, "missing_rate", s.missing_rate, where);
    s.missing_burst_mean = num_field(obj, "missing_burst_mean", s.missing_burst_mean, where);
    if (obj.contains("seed")) {
        s.seed = seed_value(obj.at("seed"), "synth.seed");
        cfg.synth_seed_set = true;
    }
}

}  // namespace

std::filesystem::path RunConfig::samples_file() const {
    return samples_path.empty() ? out_dir / "samples.csv" : samples_path;
}
std::filesystem::path RunConfig::events_file() const {
    return events_path.empty() ? out_dir / "events.csv" : events_path;
}
std::filesystem::path RunConfig::truth_file() const { return out_dir / "truth.csv"; }
std::filesystem::path RunConfig::imputed_samples_file() const {
    return out_dir / "imputed_samples.csv";
}
std::filesystem::path RunConfig::windows_file() const { return out_dir / "windows.csv"; }
std::filesystem::path RunConfig::features_file() const { return out_dir / "features.csv"; }
std::filesystem::path RunConfig::split_manifest_file() const {
    return out_dir / "split_manifest.csv";
}
std::filesystem::path RunConfig::model_file(std::string_view kind) const {
    return out_dir / ("model_" + std::string(kind) + ".json");
}
std::filesystem::path RunConfig::report_file() const { return out_dir / "evaluation_report.txt"; }
std::filesystem::path RunConfig::roc_file(std::string_view kind) const {
    return out_dir / ("roc_" + std::string(kind) + ".csv");
}
std::filesystem::path RunConfig::comparisons_file() const { return out_dir / "comparisons.csv"; }
std::filesystem::path RunConfig::cv_accuracies_file() const {
    return out_dir / "cv_accuracies.csv";
}
std::filesystem::path RunConfig::shap_summary_file(std::string_view kind) const {
    return out_dir / ("shap_summary_" + std::string(kind) + ".csv");
}
std::filesystem::path RunConfig::shap_values_file(std::string_view kind) const {
    return out_dir / ("shap_values_" + std::string(kind) + ".csv");
}

RunConfig default_run_config() {
    RunConfig cfg;
    cfg.models = {RandomForestSpec{}, GradientBoostSpec{}, LogisticRegressionSpec{},
                  RbfSvmSpec{}};
    cfg.regimes = {{OperatingRegime::Kind::TprFloor, 1.0},
                   {OperatingRegime::Kind::TprFloor, 0.5},
                   {OperatingRegime::Kind::FprCap, 0.1}};
    cfg.explain_models = {"gradient_boost"};
    return cfg;
}

void RunConfig::validate() const {
    if (!seed_set) fail("a seed is required (config file \"seed\" or --seed)");
    if (threads < 0) fail("threads must be >= 0");
    if (out_dir.empty()) fail("out_dir must not be empty");
    synth.validate();
    imputation.validate();
    windowing.validate();
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        fail("split.train_fraction must lie strictly between 0 and 1");
    }
    resample.validate();
    if (models.empty()) fail("at least one model is required");
    std::set<std::string> kinds;
    for (const ModelSpec& spec : models) {
        validate_spec(spec);
        if (!kinds.insert(std::string(model_kind(spec))).second) {
            fail("duplicate model kind '" + std::string(model_kind(spec)) +
                 "' (artifact paths must be distinct)");
        }
    }
    for (const std::string& name : explain_models) {
        if (name != "random_forest" && name != "gradient_boost") {
            fail("explain.models entry '" + name + "' is not a tree-ensemble model");
        }
        if (!kinds.contains(name)) {
            fail("explain.models entry '" + name + "' is not in the models list");
        }
    }
    if (explain_max_instances == 0) fail("explain.max_instances must be >= 1");

    std::vector<std::string> paths = {
        samples_file().lexically_normal().string(),
        events_file().lexically_normal().string(),
        truth_file().lexically_normal().string(),
        imputed_samples_file().lexically_normal().string(),
        windows_file().lexically_normal().string(),
        features_file().lexically_normal().string(),
        split_manifest_file().lexically_normal().string(),
        report_file().lexically_normal().string(),
        comparisons_file().lexically_normal().string(),
        cv_accuracies_file().lexically_normal().string(),
    };
    for (const std::string& kind : kinds) {
        paths.push_back(model_file(kind).lexically_normal().string());
        paths.push_back(roc_file(kind).lexically_normal().string());
    }
    for (const std::string& kind : explain_models) {
        paths.push_back(shap_summary_file(kind).lexically_normal().string());
        paths.push_back(shap_values_file(kind).lexically_normal().string());
    }
    std::sort(paths.begin(), paths.end());
    const auto dup = std::adjacent_find(paths.begin(), paths.end());
    if (dup != paths.end()) fail("referenced paths are not distinct: '" + *dup + "'");
}

RunConfig load_run_config(const std::filesystem::path& path) {
    RunConfig cfg = default_run_config();
    json root;
    try {
        root = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    check_object(root, "config file '" + path.string() + "'");
    check_keys(root,
               {"seed", "threads", "out_dir", "paths", "synth", "imputation", "windowing",
                "split", "resample", "models", "evaluation", "explain"},
               "config root");

    if (root.contains("seed")) {
        cfg.seed = seed_value(root.at("seed"), "seed");
        cfg.seed_set = true;
    }
    cfg.threads = int_field(root, "threads", cfg.threads, "config root");
    cfg.out_dir = string_field(root, "out_dir", cfg.out_dir.string(), "config root");

    if (root.contains("paths")) {
        const json& paths = root.at("paths");
        check_object(paths, "paths");
        check_keys(paths, {"samples", "events"}, "paths");
        cfg.samples_path = string_field(paths, "samples", "", "paths");
        cfg.events_path = string_field(paths, "events", "", "paths");
    }
    if (root.contains("synth")) parse_synth(root.at("synth"), cfg);
    if (root.contains("imputation")) {
        const json& obj = root.at("imputation");
        check_object(obj, "imputation");
        check_keys(obj, {"max_gap", "mse_threshold", "process_noise", "observation_noise"},
                   "imputation");
        cfg.imputation.max_gap = int_field(obj, "max_gap", cfg.imputation.max_gap, "imputation");
        cfg.imputation.mse_threshold =
            num_field(obj, "mse_threshold", cfg.imputation.mse_threshold, "imputation");
        cfg.imputation.process_noise =
            num_field(obj, "process_noise", cfg.imputation.process_noise, "imputation");
        cfg.imputation.observation_noise =
            num_field(obj, "observation_noise", cfg.imputation.observation_noise, "imputation");
    }
    if (root.contains("windowing")) {
        const json& obj = root.at("windowing");
        check_object(obj, "windowing");
        check_keys(obj, {"step_s", "max_missing_fraction"}, "windowing");
        cfg.windowing.step_s = int_field(obj, "step_s", cfg.windowing.step_s, "windowing");
        cfg.windowing.max_missing_fraction = num_field(
            obj, "max_missing_fraction", cfg.windowing.max_missing_fraction, "windowing");
    }
    if (root.contains("split")) {
        const json& obj = root.at("split");
        check_object(obj, "split");
        check_keys(obj, {"train_fraction"}, "split");
        cfg.train_fraction = num_field(obj, "train_fraction", cfg.train_fraction, "split");
    }
    if (root.contains("resample")) {
        const json& obj = root.at("resample");
        check_object(obj, "resample");
        check_keys(obj, {"majority_units", "minority_units"}, "resample");
        cfg.resample.majority_units =
            int_field(obj, "majority_units", cfg.resample.majority_units, "resample");
        cfg.resample.minority_units =
            int_field(obj, "minority_units", cfg.resample.minority_units, "resample");
    }
    if (root.contains("models")) {
        const json& arr = root.at("models");
        if (!arr.is_array()) fail("models must be an array");
        cfg.models.clear();
        for (std::size_t i = 0; i < arr.size(); ++i) {
            cfg.models.push_back(
                model_spec_from_json(arr[i], "models[" + std::to_string(i) + "]"));
        }
    }
    if (root.contains("evaluation")) {
        const json& obj = root.at("evaluation");
        check_object(obj, "evaluation");
        check_keys(obj, {"regimes"}, "evaluation");
        if (obj.contains("regimes")) {
            const json& arr = obj.at("regimes");
            if (!arr.is_array()) fail("evaluation.regimes must be an array");
            cfg.regimes.clear();
            for (std::size_t i = 0; i < arr.size(); ++i) {
                cfg.regimes.push_back(
                    regime_from_json(arr[i], "evaluation.regimes[" + std::to_string(i) + "]"));
            }
        }
    }
    if (root.contains("explain")) {
        const json& obj = root.at("explain");
        check_object(obj, "explain");
        check_keys(obj, {"models", "max_instances", "emit_plots"}, "explain");
        if (obj.contains("models")) {
            const json& arr = obj.at("models");
            if (!arr.is_array()) fail("explain.models must be an array");
            cfg.explain_models.clear();
            for (const json& entry : arr) {
                if (!entry.is_string()) fail("explain.models entries must be strings");
                cfg.explain_models.push_back(entry.get<std::string>());
            }
        }
        const int max_instances = int_field(obj, "max_instances",
                                            static_cast<int>(cfg.explain_max_instances),
                                            "explain");
        if (max_instances < 1) fail("explain.max_instances must be >= 1");
        cfg.explain_max_instances = static_cast<std::size_t>(max_instances);
        cfg.emit_plots = bool_field(obj, "emit_plots", cfg.emit_plots, "explain");
    }
    return cfg;
}

}  // namespace hyperdet
