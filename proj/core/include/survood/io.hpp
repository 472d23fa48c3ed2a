#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace survood::io {

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double value);

// Parses the whole of `text` as a double; throws InputError naming `what` otherwise.
double parse_double(std::string_view text, std::string_view what);
long long parse_int(std::string_view text, std::string_view what);

// Minimal CSV: comma separated, no quoting. Trailing '\r' is stripped.
std::vector<std::string> split_csv_line(std::string_view line);

std::string read_file(const std::filesystem::path& path);
// Writes atomically enough for our purposes: creates parent dirs, truncates.
void write_file(const std::filesystem::path& path, std::string_view contents);

// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

}  // namespace survood::io
