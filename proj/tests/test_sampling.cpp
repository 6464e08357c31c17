#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "hyperdet/error.hpp"
#include "hyperdet/sampling.hpp"

using namespace hyperdet;

namespace {

// neg majority rows + pos minority rows, each row tagged so copies are traceable.
Dataset imbalanced(std::size_t majority, std::size_t minority) {
    Dataset data;
    for (std::size_t i = 0; i < majority; ++i) {
        std::array<double, 9> v{};
        v[0] = static_cast<double>(i);
        data.push_back(testutil::feature_row(v, 0, "maj", static_cast<int>(i)));
    }
    for (std::size_t i = 0; i < minority; ++i) {
        std::array<double, 9> v{};
        v[0] = 1e6 + static_cast<double>(i);
        data.push_back(testutil::feature_row(v, 1, "min", static_cast<int>(i)));
    }
    return data;
}

}  // namespace

TEST_CASE("4:3 upsampling grows 372 positives against 9486 negatives to 7114") {
    const Dataset train = imbalanced(9486, 372);
    ResampleSpec spec;
    spec.majority_units = 4;
    spec.minority_units = 3;
    spec.seed = 99;
    const Dataset out = upsample_minority(train, spec);
    std::size_t neg = 0, pos = 0;
    for (const auto& r : out) (r.label == 1 ? pos : neg)++;
    CHECK(neg == 9486);
    CHECK(pos == 7114);  // floor(9486 * 3 / 4)
    CHECK(out.size() == 9486 + 7114);
}

TEST_CASE("small exact target: majority 4, minority 1, ratio 4:3 gives 3") {
    const Dataset out = upsample_minority(imbalanced(4, 1), ResampleSpec{4, 3, 5});
    std::size_t pos = 0;
    for (const auto& r : out)
        if (r.label == 1) pos++;
    CHECK(pos == 3);
}

TEST_CASE("upsampling keeps all originals and copies only existing rows") {
    const Dataset train = imbalanced(40, 6);
    const Dataset out = upsample_minority(train, ResampleSpec{4, 3, 123});

    // Every original row (by its tagging value) survives in order.
    std::vector<double> original_tags, out_tags;
    for (const auto& r : train) original_tags.push_back(r.hrmean);
    for (std::size_t i = 0; i < train.size(); ++i) CHECK(out[i].hrmean == train[i].hrmean);

    // Appended rows are field-for-field copies of original minority rows.
    std::set<double> minority_tags;
    for (const auto& r : train)
        if (r.label == 1) minority_tags.insert(r.hrmean);
    for (std::size_t i = train.size(); i < out.size(); ++i) {
        CHECK(out[i].label == 1);
        CHECK(minority_tags.count(out[i].hrmean) == 1);
        CHECK(out[i].participant_id == "min");
    }
}

TEST_CASE("upsampling is deterministic per seed and sensitive to it") {
    const Dataset train = imbalanced(50, 7);
    const Dataset a = upsample_minority(train, ResampleSpec{4, 3, 1});
    const Dataset b = upsample_minority(train, ResampleSpec{4, 3, 1});
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].hrmean == b[i].hrmean);

    const Dataset c = upsample_minority(train, ResampleSpec{4, 3, 2});
    bool any_difference = c.size() != a.size();
    for (std::size_t i = 0; !any_difference && i < a.size(); ++i)
        any_difference = a[i].hrmean != c[i].hrmean;
    CHECK(any_difference);
}

TEST_CASE("minority at or above target is left untouched") {
    const Dataset train = imbalanced(8, 6);  // target floor(8*3/4)=6, already met
    const Dataset out = upsample_minority(train, ResampleSpec{4, 3, 9});
    CHECK(out.size() == train.size());

    const Dataset train2 = imbalanced(8, 7);  // above target
    CHECK(upsample_minority(train2, ResampleSpec{4, 3, 9}).size() == train2.size());
}

TEST_CASE("degenerate resampling inputs are rejected") {
    Dataset one_class = imbalanced(10, 0);
    CHECK_THROWS_AS(upsample_minority(one_class, ResampleSpec{4, 3, 0}), DataError);
    CHECK_THROWS_AS((ResampleSpec{0, 3, 0}.validate()), ConfigError);
    CHECK_THROWS_AS((ResampleSpec{4, -1, 0}.validate()), ConfigError);
}

TEST_CASE("participant split holds fraction and disjointness") {
    // 10 participants, 12 rows each.
    Dataset data;
    for (int p = 0; p < 10; ++p)
        for (int i = 0; i < 12; ++i) {
            std::array<double, 9> v{};
            v[0] = p * 100 + i;
            data.push_back(
                testutil::feature_row(v, i % 2, "S" + std::to_string(p), 1000 + 30 * i));
        }

    const SplitResult split = split_by_participant(data, 0.7, 42);
    CHECK(split.train_participants.size() == 7);
    CHECK(split.test_participants.size() == 3);
    CHECK(split.train.size() == 7 * 12);
    CHECK(split.test.size() == 3 * 12);

    std::set<std::string> train_ids(split.train_participants.begin(),
                                    split.train_participants.end());
    for (const auto& id : split.test_participants) CHECK(train_ids.count(id) == 0);
    for (const auto& row : split.train) CHECK(train_ids.count(row.participant_id) == 1);
    for (const auto& row : split.test) CHECK(train_ids.count(row.participant_id) == 0);

    // Same seed, same assignment.
    const SplitResult again = split_by_participant(data, 0.7, 42);
    CHECK(again.train_participants == split.train_participants);
    CHECK(again.test_participants == split.test_participants);
}

TEST_CASE("split rounds half up and keeps both sides non-empty") {
    Dataset data;
    for (int p = 0; p < 5; ++p) {
        std::array<double, 9> v{};
        data.push_back(testutil::feature_row(v, p % 2, "R" + std::to_string(p), p));
    }
    // 0.7 * 5 = 3.5 rounds to 4.
    CHECK(split_by_participant(data, 0.7, 1).train_participants.size() == 4);
    // 0.5 * 5 = 2.5 rounds to 3.
    CHECK(split_by_participant(data, 0.5, 1).train_participants.size() == 3);
    // Extreme fractions still leave one participant on each side.
    CHECK(split_by_participant(data, 0.999, 1).test_participants.size() == 1);
    CHECK(split_by_participant(data, 0.001, 1).train_participants.size() == 1);
}

TEST_CASE("split with a single participant is impossible") {
    Dataset data = imbalanced(3, 0);  // all rows carry participant "maj"
    CHECK_THROWS_AS(split_by_participant(data, 0.7, 0), DataError);
    CHECK_THROWS_AS(split_by_participant(Dataset{}, 0.7, 0), DataError);
}

TEST_CASE("ratio sweep reports one row per ratio in order") {
    const Dataset train = imbalanced(40, 5);
    const std::vector<ResampleSpec> ratios = {
        {1, 1, 7}, {4, 3, 7}, {2, 1, 7}, {3, 1, 7}, {4, 1, 7}};
    const auto rows = ratio_sweep(train, ratios, [](const Dataset& resampled) {
        std::size_t pos = 0;
        for (const auto& r : resampled)
            if (r.label == 1) pos++;
        return static_cast<double>(pos);
    });
    REQUIRE(rows.size() == 5);
    CHECK(rows[0].metric == 40.0);  // 1:1 -> floor(40*1/1)
    CHECK(rows[1].metric == 30.0);  // 4:3 -> floor(40*3/4)
    CHECK(rows[2].metric == 20.0);
    CHECK(rows[3].metric == 13.0);  // floor(40/3)
    CHECK(rows[4].metric == 10.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].spec.majority_units == ratios[i].majority_units);
        CHECK(rows[i].spec.minority_units == ratios[i].minority_units);
    }
}

TEST_CASE("split manifest round trips and drives apply") {
    const auto dir = testutil::fresh_dir("sampling_manifest");
    Dataset data;
    for (int p = 0; p < 6; ++p)
        for (int i = 0; i < 3; ++i) {
            std::array<double, 9> v{};
            v[0] = p;
            data.push_back(testutil::feature_row(v, i % 2, "M" + std::to_string(p), i * 30));
        }
    const SplitResult split = split_by_participant(data, 0.7, 77);
    const auto path = dir / "split.csv";
    write_split_manifest(split, path);

    const auto [train, test] = apply_split_manifest(data, path);
    REQUIRE(train.size() == split.train.size());
    REQUIRE(test.size() == split.test.size());
    for (std::size_t i = 0; i < train.size(); ++i)
        CHECK(train[i].participant_id == split.train[i].participant_id);
    for (std::size_t i = 0; i < test.size(); ++i)
        CHECK(test[i].window_start == split.test[i].window_start);
}

TEST_CASE("manifest errors name the offending row") {
    const auto dir = testutil::fresh_dir("sampling_manifest_errors");
    Dataset data;
    std::array<double, 9> v{};
    data.push_back(testutil::feature_row(v, 0, "A", 0));
    data.push_back(testutil::feature_row(v, 1, "B", 0));

    const auto bad_role = dir / "bad_role.csv";
    {
        std::ofstream out(bad_role);
        out << "participant_id,role\nA,train\nB,holdout\n";
    }
    CHECK_THROWS_WITH_AS(apply_split_manifest(data, bad_role),
                         doctest::Contains(":3"), DataError);

    const auto conflict = dir / "conflict.csv";
    {
        std::ofstream out(conflict);
        out << "participant_id,role\nA,train\nA,test\nB,test\n";
    }
    CHECK_THROWS_AS(apply_split_manifest(data, conflict), DataError);

    const auto missing = dir / "missing.csv";
    {
        std::ofstream out(missing);
        out << "participant_id,role\nA,train\n";
    }
    CHECK_THROWS_WITH_AS(apply_split_manifest(data, missing), doctest::Contains("B"), DataError);
}
