#pragma once

#include <filesystem>
#include <vector>

#include "hyperdet/types.hpp"

namespace hyperdet {

// File schemas (UTF-8, comma-separated, empty field = missing):
//   samples: participant_id,timestamp,hr,acc_x,acc_y,acc_z
//   events:  participant_id,timestamp
// Headers must match exactly.
inline constexpr const char* kSamplesHeader = "participant_id,timestamp,hr,acc_x,acc_y,acc_z";
inline constexpr const char* kEventsHeader = "participant_id,timestamp";

// Loads and groups rows into one Recording per participant, sorted by
// participant id, samples sorted by timestamp. Throws DataError (with the
// offending line number) on malformed rows, duplicate (participant, timestamp)
// pairs, acceleration components that are not all-or-none, or an event whose
// participant has no samples.
std::vector<Recording> load_recordings(const std::filesystem::path& samples_path,
                                       const std::filesystem::path& events_path);

void write_samples(const std::vector<Recording>& recordings,
                   const std::filesystem::path& samples_path);

void write_recordings(const std::vector<Recording>& recordings,
                      const std::filesystem::path& samples_path,
                      const std::filesystem::path& events_path);

}  // namespace hyperdet
