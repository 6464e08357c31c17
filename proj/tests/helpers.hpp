#pragma once

#include <array>
#include <filesystem>
#include <string>

#include "hyperdet/features.hpp"

namespace testutil {

// Deterministic 9-feature dataset built from pure integer arithmetic, so the
// reference oracles (scikit-learn / scipy scripts) can regenerate the exact
// same matrix. Labels follow a linear rule on the first three features plus a
// small deterministic perturbation, giving correlated but non-separable data.
inline hyperdet::Dataset pinned_dataset(std::size_t n, int base = 0) {
    hyperdet::Dataset data;
    data.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
        const int i = static_cast<int>(r) + base;
        std::array<double, 9> v{};
        for (int j = 0; j < 9; ++j) {
            v[static_cast<std::size_t>(j)] =
                ((i * 7 + j * 13) % 19) - 9 + 0.5 * ((i + j) % 3);
        }
        hyperdet::FeatureVector f;
        f.hrmean = v[0];
        f.hrmax = v[1];
        f.hrmin = v[2];
        f.hrsd = v[3];
        f.hrrange = v[4];
        f.linaccmean = v[5];
        f.linaccmax = v[6];
        f.linaccmin = v[7];
        f.linaccrange = v[8];
        const double score = v[0] + v[1] - v[2] + 0.3 * ((i % 4) - 1.5);
        f.label = score > 0.0 ? 1 : 0;
        f.participant_id = "T" + std::to_string(i % 6);
        f.window_start = 1000 + 30 * i;
        data.push_back(std::move(f));
    }
    return data;
}

// A feature vector whose 9 values come from a plain array; label optional.
inline hyperdet::FeatureVector feature_row(const std::array<double, 9>& v, int label = 0,
                                           std::string participant = "P", int start = 0) {
    hyperdet::FeatureVector f;
    f.hrmean = v[0];
    f.hrmax = v[1];
    f.hrmin = v[2];
    f.hrsd = v[3];
    f.hrrange = v[4];
    f.linaccmean = v[5];
    f.linaccmax = v[6];
    f.linaccmin = v[7];
    f.linaccrange = v[8];
    f.label = label;
    f.participant_id = std::move(participant);
    f.window_start = start;
    return f;
}

// Fresh scratch directory under the system temp dir, wiped on entry.
inline std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("hyperdet_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testutil
