#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

// Small text and file helpers shared by the engines and the CLI.
namespace escape::text {

/// Compact human-readable rendering (printf "%g" with up to 12 digits).
std::string format_real(double value);

/// Fixed-width numeric rendering used in CSV cells ("%.10g").
std::string format_csv(double value);

std::string_view trim(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

/// Parses the whole string as a number; throws std::invalid_argument naming
/// `what` on failure.
double parse_real(std::string_view s, std::string_view what);
long long parse_int(std::string_view s, std::string_view what);
unsigned long long parse_u64(std::string_view s, std::string_view what);

std::string read_file(const std::filesystem::path& path);

/// Writes `contents` to a sibling temporary file and renames it over `path`,
/// so a failed write never leaves a partial file behind.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents);

}  // namespace escape::text
