#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hyperdet/kalman.hpp"
#include "hyperdet/types.hpp"

namespace hyperdet {

// Sliding-window parameters. Window duration is fixed at 60 s by the Window
// type; the step and the drop threshold are configurable.
struct WindowParams {
    int step_s = 30;
    double max_missing_fraction = 0.80;  // windows strictly above this are dropped

    void validate() const;
};

// A labeled 60-second slice covering [start, start+60). Channel arrays hold
// one slot per second, already imputed; slots that stayed missing (gap longer
// than max_gap, or no sample row at that second) are absent.
//
// missing_fraction counts the hr cell and the acceleration cell of each
// second with equal weight: (missing cells after imputation) / (2 * 60).
struct Window {
    static constexpr int kDurationS = 60;

    std::string participant_id;
    std::int64_t start = 0;
    int label = 0;  // 1 = hyperarousal (some event mark in [start, start+60)), 0 otherwise
    double missing_fraction = 0.0;
    std::vector<std::optional<double>> hr;       // size 60
    std::vector<std::optional<double>> acc_mag;  // size 60, Euclidean norm per second
};

// Applies per-channel imputation on the dense 1 Hz grid and materializes the
// result: every second between the first and last timestamp becomes a sample
// row; cells that stayed missing (gaps longer than max_gap) remain absent.
// Running it twice is a no-op after the first pass.
Recording impute_recording(const Recording& r, const ImputationConfig& cfg);

// Segments a validated recording into windows. Imputation runs per channel
// over the whole recording (on the 1 Hz grid between the first and last
// sample timestamps) before slicing. Windows start at the first sample
// timestamp and advance by step_s while start + 60 <= last timestamp + 1.
// A recording shorter than 60 s yields an empty sequence.
std::vector<Window> make_windows(const Recording& r, const ImputationConfig& cfg,
                                 const WindowParams& wp = {});

// Windows dump: participant_id,window_start,label,missing_fraction
void write_windows(const std::vector<Window>& windows, const std::filesystem::path& path);

}  // namespace hyperdet
