#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace annocheck {

// Collapses every run of whitespace (spaces, tabs, newlines) to a single
// space and trims the ends. The only text cleaning the corpus loader does.
std::string normalize_whitespace(std::string_view text);

std::string trim(std::string_view text);

std::vector<std::string> split_lines(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Replaces every occurrence of `needle` in `text` with `value`.
std::string replace_all(std::string text, std::string_view needle, std::string_view value);

// RFC-4180-style CSV: quotes fields containing comma, quote, or newline.
std::string csv_escape(std::string_view field);

// Parses one CSV document into rows of fields. Handles quoted fields with
// embedded commas, quotes ("" escape), and newlines.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

// Fixed decimal formatting used by the CSV/Markdown writers so emitted
// tables are byte-stable across runs.
std::string format_double(double value);

}  // namespace annocheck
