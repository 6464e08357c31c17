#include "hyperdet/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "hyperdet/error.hpp"
#include "hyperdet/rng.hpp"
#include "hyperdet/text.hpp"

namespace hyperdet {

void ResampleSpec::validate() const {
    if (majority_units < 1 || minority_units < 1) {
        throw ConfigError("ResampleSpec: majority_units and minority_units must be positive");
    }
}

SplitResult split_by_participant(const Dataset& data, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("split_by_participant: train_fraction must be in (0,1)");
    }
    std::vector<std::string> ids = participants(data);
    if (ids.size() < 2) {
        throw DataError("split_by_participant: need at least 2 participants, got " +
                        std::to_string(ids.size()));
    }
    Rng rng = Rng(seed).derive("participant-split");
    rng.shuffle(ids);

    // Round half up, then clamp so neither side is empty.
    std::size_t n_train = static_cast<std::size_t>(
        std::floor(train_fraction * static_cast<double>(ids.size()) + 0.5));
    n_train = std::clamp<std::size_t>(n_train, 1, ids.size() - 1);

    SplitResult result;
    result.seed = seed;
    result.train_participants.assign(ids.begin(), ids.begin() + n_train);
    result.test_participants.assign(ids.begin() + n_train, ids.end());
    std::sort(result.train_participants.begin(), result.train_participants.end());
    std::sort(result.test_participants.begin(), result.test_participants.end());

    const std::set<std::string> train_set(result.train_participants.begin(),
                                          result.train_participants.end());
    for (const auto& row : data) {
        (train_set.count(row.participant_id) ? result.train : result.test).push_back(row);
    }
    return result;
}

Dataset upsample_minority(const Dataset& train, const ResampleSpec& spec) {
    spec.validate();
    const auto [neg, pos] = class_counts(train);
    if (neg == 0 || pos == 0) {
        throw DataError("upsample_minority: training data must contain both classes");
    }
    const int minority_label = pos <= neg ? 1 : 0;
    const std::size_t majority_count = std::max(neg, pos);
    const std::size_t minority_count = std::min(neg, pos);

    const std::size_t target =
        majority_count * static_cast<std::size_t>(spec.minority_units) /
        static_cast<std::size_t>(spec.majority_units);
    if (minority_count >= target) return train;

    std::vector<std::size_t> minority_rows;
    for (std::size_t i = 0; i < train.size(); ++i) {
        if (train[i].label == minority_label) minority_rows.push_back(i);
    }

    Dataset out = train;
    out.reserve(train.size() + (target - minority_count));
    Rng rng = Rng(spec.seed).derive("upsample");
    for (std::size_t k = minority_count; k < target; ++k) {
        out.push_back(train[minority_rows[rng.uniform_int(minority_rows.size())]]);
    }
    return out;
}

std::vector<RatioSweepRow> ratio_sweep(const Dataset& train, std::span<const ResampleSpec> ratios,
                                       const std::function<double(const Dataset&)>& evaluator) {
    if (ratios.empty()) throw ConfigError("ratio_sweep: no ratios given");
    std::vector<RatioSweepRow> rows;
    rows.reserve(ratios.size());
    for (const auto& spec : ratios) {
        rows.push_back({spec, evaluator(upsample_minority(train, spec))});
    }
    return rows;
}

void write_split_manifest(const SplitResult& split, const std::filesystem::path& path) {
    std::ostringstream ss;
    ss << "participant_id,role\n";
    for (const auto& id : split.train_participants) ss << id << ",train\n";
    for (const auto& id : split.test_participants) ss << id << ",test\n";
    write_file_atomic(path, ss.str());
}

std::pair<Dataset, Dataset> apply_split_manifest(const Dataset& data,
                                                 const std::filesystem::path& path) {
    const std::string content = read_file(path);
    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line) || line != "participant_id,role") {
        throw DataError(path.string() + ": bad split manifest header");
    }
    std::map<std::string, std::string> role;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 2 || (fields[1] != "train" && fields[1] != "test")) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": expected participant_id,{train|test}");
        }
        const auto [it, inserted] = role.emplace(fields[0], fields[1]);
        if (!inserted && it->second != fields[1]) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": participant '" + fields[0] + "' assigned to both roles");
        }
    }
    Dataset train, test;
    for (const auto& row : data) {
        const auto it = role.find(row.participant_id);
        if (it == role.end()) {
            throw DataError(path.string() + ": participant '" + row.participant_id +
                            "' missing from split manifest");
        }
        (it->second == "train" ? train : test).push_back(row);
    }
    return {std::move(train), std::move(test)};
}

}  // namespace hyperdet
