#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hyperdet/features.hpp"

namespace hyperdet {

// Participant-level train/test assignment. Every window follows its
// participant, so the two sides never share a participant.
struct SplitResult {
    Dataset train;
    Dataset test;
    std::vector<std::string> train_participants;
    std::vector<std::string> test_participants;
    std::uint64_t seed = 0;
};

// Shuffles the distinct participants with `seed` and assigns the first
// round-half-up(train_fraction * P) of them to train (clamped so both sides
// keep at least one participant). Rows keep their original order.
SplitResult split_by_participant(const Dataset& data, double train_fraction, std::uint64_t seed);

// Class-ratio target for upsampling: majority_units of the majority class per
// minority_units of the minority class.
struct ResampleSpec {
    int majority_units = 4;
    int minority_units = 3;
    std::uint64_t seed = 0;

    void validate() const;  // both units must be positive
};

// Returns train with the minority class grown to exactly
// floor(majority_count * minority_units / majority_units) rows: all original
// minority rows are kept and the remainder is drawn with replacement
// (seeded). The majority class is untouched. If the minority already meets or
// exceeds the target, the dataset is returned unchanged.
Dataset upsample_minority(const Dataset& train, const ResampleSpec& spec);

struct RatioSweepRow {
    ResampleSpec spec;
    double metric = 0.0;
};

// Applies each resampling ratio to `train` and reports the evaluator's metric
// per ratio. The evaluator is expected to train on the resampled rows it is
// given and score on validation data it holds; this function never touches
// anything but `train`.
std::vector<RatioSweepRow> ratio_sweep(const Dataset& train, std::span<const ResampleSpec> ratios,
                                       const std::function<double(const Dataset&)>& evaluator);

// Split manifest file: participant_id,role with role in {train,test}.
void write_split_manifest(const SplitResult& split, const std::filesystem::path& path);
// Applies a manifest to a feature dataset. Participants in the data but not
// in the manifest are an error, as is a row claiming both roles.
std::pair<Dataset, Dataset> apply_split_manifest(const Dataset& data,
                                                 const std::filesystem::path& path);

}  // namespace hyperdet
