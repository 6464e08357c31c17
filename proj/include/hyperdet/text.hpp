#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hyperdet {

// %.17g formatting: enough digits that parsing the string recovers the exact double.
std::string format_real(double v);

std::string format_int(std::int64_t v);

// Plain comma split, no quoting. The file schemas forbid commas inside fields.
std::vector<std::string> split_csv_line(std::string_view line);

// Strict parsers. Return nullopt on any trailing garbage or empty input.
std::optional<double> parse_real(std::string_view s);
std::optional<std::int64_t> parse_int(std::string_view s);

// Writes to <path>.tmp then renames, so readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

}  // namespace hyperdet
