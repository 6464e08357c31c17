#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hyperdet/types.hpp"

namespace hyperdet {

/// Parameters of the synthetic wearable-stream generator. Heart rate follows
/// an AR(1) process around a baseline; acceleration is gravity plus episodic
/// activity bumps; events shift the hr mean, widen its noise, and suppress
/// concurrent activity; missingness arrives in geometric-length bursts.
struct SynthConfig {
    int participants = 4;
    double duration = 3600.0;            // seconds of recording per participant
    double baseline_hr = 70.0;           // bpm
    double hr_ar_coefficient = 0.95;     // AR(1) coefficient, in (0,1)
    double hr_noise_sd = 2.0;            // innovation sd, bpm
    double event_rate = 2.0;             // events per hour
    double event_duration = 60.0;        // seconds per event
    double event_hr_shift = 25.0;        // added to hr mean during events, bpm
    double event_hr_sd_multiplier = 2.0; // scales hr innovation sd during events, >= 1
    double event_activity_multiplier = 0.3;  // scales activity during events, in (0,1]
    double activity_episode_rate = 4.0;  // exercise episodes per hour
    double missing_rate = 0.05;          // stationary missing fraction, in [0,1)
    double missing_burst_mean = 3.0;     // mean missing-burst length, samples
    std::uint64_t seed = 0;

    /// Throws ConfigError on out-of-range values.
    void validate() const;
};

/// One ground-truth event interval [event_start, event_end) in epoch seconds.
struct TruthInterval {
    std::string participant_id;
    std::int64_t event_start = 0;
    std::int64_t event_end = 0;
};

struct SynthResult {
    std::vector<Recording> recordings;
    std::vector<TruthInterval> truth;
};

/// Generates the configured streams. Each participant draws from an
/// independently derived RNG stream, so output is deterministic for a fixed
/// config regardless of generation order. An EventMark is emitted at every
/// event onset; truth intervals are the merged event spans.
SynthResult generate(const SynthConfig& cfg);

/// Writes the truth intervals as `participant_id,event_start,event_end`.
void write_truth(const std::vector<TruthInterval>& truth, const std::filesystem::path& path);

}  // namespace hyperdet
