#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace polaris {

// Minimal RFC-4180-ish CSV: quoted fields with "" escapes, CR/LF tolerant.
// Embedded newlines inside quoted fields are not supported.
std::vector<std::vector<std::string>> read_csv_file(const std::filesystem::path& path);

std::vector<std::string> split_csv_line(const std::string& line);

std::string csv_escape(const std::string& field);

void write_csv_row(std::ostream& out, std::span<const std::string> fields);

// Canonical 9-significant-digit rendering; round-trips through parse at that
// precision and never emits "-0".
std::string format_double(double v);

}  // namespace polaris
