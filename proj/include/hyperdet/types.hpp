#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hyperdet {

// One 1 Hz reading from the wearable. Missing stream values are explicit
// absences, never sentinel numerics. The three acceleration components are
// all present or all absent at a given timestamp.
struct Sample {
    std::int64_t timestamp = 0;  // epoch seconds, monotone key within a recording
    std::optional<double> hr;    // beats per minute, positive when present
    std::optional<double> acc_x; // m/s^2
    std::optional<double> acc_y;
    std::optional<double> acc_z;

    bool has_acc() const { return acc_x.has_value() && acc_y.has_value() && acc_z.has_value(); }
};

// A self-reported event, timestamped in the same epoch-second clock.
struct EventMark {
    std::int64_t timestamp = 0;
};

// One participant's full sample stream plus their event marks.
// Invariants: sample timestamps strictly increasing, event timestamps
// non-decreasing. Immutable after construction; safe to share across readers.
struct Recording {
    std::string participant_id;
    std::vector<Sample> samples;
    std::vector<EventMark> events;

    std::int64_t first_timestamp() const { return samples.empty() ? 0 : samples.front().timestamp; }
    std::int64_t last_timestamp() const { return samples.empty() ? 0 : samples.back().timestamp; }
    // Number of 1 Hz slots covered, inclusive of both ends.
    std::int64_t span_seconds() const {
        return samples.empty() ? 0 : last_timestamp() - first_timestamp() + 1;
    }
};

// A single invariant violation found in a recording. Violations are data,
// not errors: validation always completes and reports everything it saw.
struct Violation {
    std::string field;
    std::int64_t timestamp = 0;
    std::string rule;
};

std::vector<Violation> validate_recording(const Recording& r);

}  // namespace hyperdet
