// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace rulegen {

/// Levenshtein edit distance (unit costs), two-row DP.
std::size_t levenshtein(std::string_view a, std::string_view b);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

/// Collapses every whitespace run to a single space and trims the ends.
std::string collapse_whitespace(std::string_view s);

/// Splits on '\n'; a trailing newline does not produce an empty last element.
std::vector<std::string> split_lines(std::string_view s);

/// Rule-text normalization used for overlap comparison: drop //, /* */ and #
/// comments, collapse whitespace, lowercase.
std::string normalize_rule_text(std::string_view s);

/// Count of non-overlapping occurrences of needle in haystack (empty needle: 0).
std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

}  // namespace rulegen
