#include <cmath>
#include <filesystem>
#include <limits>

#include "doctest.h"
#include "helpers.hpp"
#include "hyperdet/text.hpp"

using namespace hyperdet;

TEST_CASE("format_real round-trips doubles exactly") {
    for (const double v : {0.1, 1.0 / 3.0, 12345.6789, -2.5e-17, 1e300, 0.0, -0.0}) {
        const auto back = parse_real(format_real(v));
        REQUIRE(back.has_value());
        CHECK(*back == v);
    }
    CHECK(format_real(1.0) == "1");
    CHECK(format_int(-42) == "-42");
    CHECK(format_int(0) == "0");
}

TEST_CASE("split_csv_line keeps empty fields") {
    CHECK(split_csv_line("a,b,c") == std::vector<std::string>{"a", "b", "c"});
    CHECK(split_csv_line("a,,c") == std::vector<std::string>{"a", "", "c"});
    CHECK(split_csv_line(",") == std::vector<std::string>{"", ""});
    CHECK(split_csv_line("x") == std::vector<std::string>{"x"});
}

TEST_CASE("parse_real and parse_int are strict") {
    CHECK(parse_real("1.5").value() == 1.5);
    CHECK(parse_real("-3e2").value() == -300.0);
    CHECK_FALSE(parse_real("").has_value());
    CHECK_FALSE(parse_real("1.5x").has_value());
    CHECK_FALSE(parse_real(" 1.5").has_value());
    CHECK(parse_int("-7").value() == -7);
    CHECK_FALSE(parse_int("7.0").has_value());
    CHECK_FALSE(parse_int("").has_value());
    CHECK_FALSE(parse_int("12a").has_value());
}

TEST_CASE("write_file_atomic leaves no temp file and replaces content") {
    const auto dir = testutil::fresh_dir("text");
    const auto path = dir / "x.txt";
    write_file_atomic(path, "one\n");
    write_file_atomic(path, "two\n");
    CHECK(read_file(path) == "two\n");
    std::size_t entries = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++entries;
    CHECK(entries == 1);
}
