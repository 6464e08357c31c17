#include "hyperdet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "hyperdet/error.hpp"
#include "hyperdet/rng.hpp"
#include "hyperdet/text.hpp"

namespace hyperdet {

namespace {

constexpr std::int64_t kStartTimestamp = 1600000000;  // arbitrary epoch anchor
constexpr double kGravity = 9.81;                     // resting |acceleration|, m/s^2
constexpr double kAccNoiseSd = 0.05;                  // sensor jitter on the magnitude
constexpr double kEpisodeDuration = 120.0;            // seconds per activity episode
constexpr double kEpisodeAmplitudeLow = 1.5;          // m/s^2
constexpr double kEpisodeAmplitudeHigh = 4.0;
constexpr double kDirectionStepSd = 0.02;             // radians per second

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError("synth config: " + what);
}

// Poisson arrival times in [0, duration) at `rate_per_hour`, via exponential
// inter-arrival gaps.
std::vector<double> poisson_onsets(double rate_per_hour, double duration, Rng& rng) {
    std::vector<double> onsets;
    const double rate = rate_per_hour / 3600.0;
    double t = rng.exponential(rate);
    while (t < duration) {
        onsets.push_back(t);
        t += rng.exponential(rate);
    }
    return onsets;
}

// Two-state missingness chain with stationary missing fraction `rate` and
// mean burst length `burst_mean`. Marks `missing[t] = true` per sample.
std::vector<char> missing_mask(std::size_t n, double rate, double burst_mean, Rng& rng) {
    std::vector<char> missing(n, 0);
    if (rate <= 0.0) return missing;
    const double p_recover = 1.0 / burst_mean;
    const double p_drop = rate * p_recover / (1.0 - rate);
    bool state_missing = rng.uniform01() < rate;
    for (std::size_t t = 0; t < n; ++t) {
        missing[t] = state_missing ? 1 : 0;
        const double u = rng.uniform01();
        state_missing = state_missing ? (u >= p_recover) : (u < p_drop);
    }
    return missing;
}

struct ParticipantStream {
    Recording recording;
    std::vector<TruthInterval> truth;
};

ParticipantStream generate_participant(const SynthConfig& cfg, const std::string& id,
                                       Rng rng) {
    const auto n = static_cast<std::size_t>(cfg.duration);
    ParticipantStream out;
    out.recording.participant_id = id;
    out.recording.samples.resize(n);

    // Event onsets: one EventMark each; truth intervals are the merged spans.
    const std::vector<double> onsets = poisson_onsets(cfg.event_rate, cfg.duration, rng);
    std::vector<char> in_event(n, 0);
    for (const double onset : onsets) {
        out.recording.events.push_back(
            {kStartTimestamp + static_cast<std::int64_t>(onset)});
        const auto lo = static_cast<std::size_t>(onset);
        const auto hi = std::min(n, static_cast<std::size_t>(onset + cfg.event_duration));
        std::fill(in_event.begin() + static_cast<std::ptrdiff_t>(lo),
                  in_event.begin() + static_cast<std::ptrdiff_t>(hi), 1);
    }
    for (std::size_t t = 0; t < n;) {
        if (!in_event[t]) {
            ++t;
            continue;
        }
        std::size_t end = t;
        while (end < n && in_event[end]) ++end;
        out.truth.push_back({id, kStartTimestamp + static_cast<std::int64_t>(t),
                             kStartTimestamp + static_cast<std::int64_t>(end)});
        t = end;
    }

    // Activity: half-sine episodes on top of a resting floor; events suppress
    // the episodic component.
    std::vector<double> activity(n, 0.0);
    for (const double start : poisson_onsets(cfg.activity_episode_rate, cfg.duration, rng)) {
        const double amplitude =
            kEpisodeAmplitudeLow + (kEpisodeAmplitudeHigh - kEpisodeAmplitudeLow) * rng.uniform01();
        const auto lo = static_cast<std::size_t>(start);
        const auto hi = std::min(n, static_cast<std::size_t>(start + kEpisodeDuration));
        for (std::size_t t = lo; t < hi; ++t) {
            const double phase = (static_cast<double>(t) - start) / kEpisodeDuration;
            activity[t] += amplitude * std::sin(std::numbers::pi * phase);
        }
    }

    // Heart rate: AR(1) deviation process around a mean that jumps by
    // event_hr_shift during events, with innovation sd widened by the
    // multiplier. The deviation starts from its stationary distribution.
    const double ar = cfg.hr_ar_coefficient;
    const double stationary_sd = cfg.hr_noise_sd / std::sqrt(1.0 - ar * ar);
    double deviation = stationary_sd * rng.normal();
    // Sensor orientation drifts slowly; features only see the magnitude.
    double theta = std::acos(2.0 * rng.uniform01() - 1.0);
    double phi = 2.0 * std::numbers::pi * rng.uniform01();

    for (std::size_t t = 0; t < n; ++t) {
        Sample& s = out.recording.samples[t];
        s.timestamp = kStartTimestamp + static_cast<std::int64_t>(t);

        const bool active_event = in_event[t] != 0;
        const double innovation_sd =
            cfg.hr_noise_sd * (active_event ? cfg.event_hr_sd_multiplier : 1.0);
        if (t > 0) deviation = ar * deviation + innovation_sd * rng.normal();
        const double hr_mean = cfg.baseline_hr + (active_event ? cfg.event_hr_shift : 0.0);
        s.hr = std::max(1.0, hr_mean + deviation);

        const double suppression = active_event ? cfg.event_activity_multiplier : 1.0;
        const double magnitude =
            std::max(0.0, kGravity + suppression * activity[t] + kAccNoiseSd * rng.normal());
        theta += kDirectionStepSd * rng.normal();
        phi += kDirectionStepSd * rng.normal();
        s.acc_x = magnitude * std::sin(theta) * std::cos(phi);
        s.acc_y = magnitude * std::sin(theta) * std::sin(phi);
        s.acc_z = magnitude * std::cos(theta);
    }

    const std::vector<char> hr_missing =
        missing_mask(n, cfg.missing_rate, cfg.missing_burst_mean, rng);
    const std::vector<char> acc_missing =
        missing_mask(n, cfg.missing_rate, cfg.missing_burst_mean, rng);
    for (std::size_t t = 0; t < n; ++t) {
        Sample& s = out.recording.samples[t];
        if (hr_missing[t]) s.hr.reset();
        if (acc_missing[t]) {
            s.acc_x.reset();
            s.acc_y.reset();
            s.acc_z.reset();
        }
    }
    return out;
}

}  // namespace

void SynthConfig::validate() const {
    require(participants >= 1, "participants must be >= 1");
    require(duration > 0.0 && std::isfinite(duration), "duration must be positive");
    require(baseline_hr > 0.0, "baseline_hr must be positive");
    require(hr_ar_coefficient > 0.0 && hr_ar_coefficient < 1.0,
            "hr_ar_coefficient must be in (0,1)");
    require(hr_noise_sd > 0.0, "hr_noise_sd must be positive");
    require(event_rate > 0.0, "event_rate must be positive");
    require(event_duration > 0.0, "event_duration must be positive");
    require(std::isfinite(event_hr_shift), "event_hr_shift must be finite");
    require(event_hr_sd_multiplier >= 1.0, "event_hr_sd_multiplier must be >= 1");
    require(event_activity_multiplier > 0.0 && event_activity_multiplier <= 1.0,
            "event_activity_multiplier must be in (0,1]");
    require(activity_episode_rate > 0.0, "activity_episode_rate must be positive");
    require(missing_rate >= 0.0 && missing_rate < 1.0, "missing_rate must be in [0,1)");
    require(missing_burst_mean >= 1.0, "missing_burst_mean must be >= 1 sample");
}

SynthResult generate(const SynthConfig& cfg) {
    cfg.validate();
    const Rng root(cfg.seed);
    std::size_t width = 2;
    for (int p = cfg.participants; p >= 100; p /= 10) ++width;

    SynthResult result;
    result.recordings.reserve(static_cast<std::size_t>(cfg.participants));
    for (int p = 0; p < cfg.participants; ++p) {
        std::string id = std::to_string(p + 1);
        if (id.size() < width) id.insert(0, width - id.size(), '0');
        id.insert(0, 1, 'P');
        ParticipantStream stream =
            generate_participant(cfg, id, root.derive("synth-participant",
                                                      static_cast<std::uint64_t>(p)));
        result.recordings.push_back(std::move(stream.recording));
        result.truth.insert(result.truth.end(), stream.truth.begin(), stream.truth.end());
    }
    return result;
}

void write_truth(const std::vector<TruthInterval>& truth, const std::filesystem::path& path) {
    std::string out = "participant_id,event_start,event_end\n";
    for (const TruthInterval& t : truth) {
        out += t.participant_id;
        out += ',';
        out += format_int(t.event_start);
        out += ',';
        out += format_int(t.event_end);
        out += '\n';
    }
    write_file_atomic(path, out);
}

}  // namespace hyperdet
