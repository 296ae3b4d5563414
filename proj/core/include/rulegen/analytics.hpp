// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "rulegen/matcher.hpp"
#include "rulegen/rule.hpp"
#include "rulegen/util.hpp"

namespace rulegen::analytics {

struct Metrics {
    long long tp = 0;
    long long fp = 0;
    long long tn = 0;
    long long fn = 0;
    double accuracy = 0.0;
    std::optional<double> precision;  // null when tp+fp == 0
    std::optional<double> recall;     // null when tp+fn == 0
    std::optional<double> f1;         // null unless both defined

    /// "66.7%" style rendering (1 decimal, percent); "n/a" for null.
    static std::string percent(std::optional<double> value);
};

/// Exact confusion counts over labeled verdicts (predicted vs label).
/// Throws Error{EmptyInput} for an empty list.
Metrics confusion_metrics(const std::vector<match::PackageVerdict>& verdicts);

struct RuleTally {
    std::string rule_id;
    std::set<std::string> matched_malicious;
    std::set<std::string> matched_legitimate;
};

struct RulePrecision {
    std::string rule_id;
    std::size_t matched_count = 0;         // distinct packages
    std::optional<double> precision;       // null only in the unmatched bucket
};

struct RulePrecisionReport {
    std::vector<RulePrecision> matched;    // sorted by rule_id
    std::vector<std::string> unmatched;    // rules matching zero packages
};

RulePrecisionReport per_rule_precision(const std::vector<RuleTally>& tallies);

struct CdfPoint {
    std::size_t x = 0;   // detected-package count
    double y = 0.0;      // cumulative rule fraction
};

/// Sorted CDF over per-rule detected-package counts.
std::vector<CdfPoint> coverage_cdf(const std::vector<std::size_t>& match_counts);

/// "detected_packages,cumulative_rule_fraction" CSV with %.6f fractions.
std::string cdf_to_csv(const std::vector<CdfPoint>& cdf);

struct OverlapPair {
    std::string a_id;
    std::string b_id;
    double similarity = 0.0;
};

struct OverlapReport {
    std::size_t overlap_count = 0;
    std::vector<OverlapPair> pairs;  // similarity >= threshold, sorted
};

/// similarity(a,b) = 1 - levenshtein(norm(a), norm(b)) / max(len); norm strips
/// comments, collapses whitespace, lowercases.
OverlapReport rule_overlap(const std::vector<rules::Rule>& set_a,
                           const std::vector<rules::Rule>& set_b, double sim_threshold = 0.8);

double rule_similarity(const rules::Rule& a, const rules::Rule& b);

// ---------------------------------------------------------------------------
// Taxonomy (heuristic keyword classifier over a frozen 11x38 table)
// ---------------------------------------------------------------------------

struct TaxonomyTag {
    int category_id = 10;
    std::string category;
    std::string subcategory;

    bool operator<(const TaxonomyTag& other) const {
        return std::tie(category_id, subcategory) <
               std::tie(other.category_id, other.subcategory);
    }
    bool operator==(const TaxonomyTag& other) const {
        return category_id == other.category_id && subcategory == other.subcategory;
    }
};

struct TaxonomyEntry {
    int category_id = 0;
    std::string category;
    std::string subcategory;
    std::vector<std::string> keywords;  // lowercase substrings
    std::vector<std::string> patterns;  // regexes
};

struct Taxonomy {
    std::vector<TaxonomyEntry> entries;
    std::size_t category_count() const;

    /// Built-in table embedded from core/data/taxonomy.json.
    static Taxonomy builtin();
    /// Throws Error{BadTaxonomyFile} on malformed input.
    static Taxonomy from_file(const std::filesystem::path& path);
    static Taxonomy from_json_text(std::string_view text);
};

/// Every matching tag (non-exclusive); no keyword hit yields Other/Unknown.
std::set<TaxonomyTag> classify_rule(const rules::Rule& rule, const Taxonomy& taxonomy);

// ---------------------------------------------------------------------------

struct ScoreCdfs {
    std::vector<std::pair<double, double>> confidence;     // (score, cumulative fraction)
    std::vector<std::pair<double, double>> maliciousness;
    std::vector<std::pair<double, double>> risk;
    std::size_t absent_confidence = 0;
    std::size_t absent_maliciousness = 0;
    std::size_t absent_risk = 0;
};

/// CDFs over present scores only; absent scores are excluded and counted.
ScoreCdfs score_cdf(const std::vector<rules::Rule>& rule_set);

std::string score_cdf_to_csv(const std::vector<std::pair<double, double>>& cdf);

/// Symmetric co-occurrence matrix over category ids (kCategoryCount wide):
/// cell (i,j) counts rules tagged with both i and j; the diagonal counts
/// rules tagged with i.
inline constexpr std::size_t kCategoryCount = 11;
using Heatmap = std::array<std::array<std::size_t, kCategoryCount>, kCategoryCount>;

Heatmap category_heatmap(const std::vector<std::set<TaxonomyTag>>& tags_per_rule);

/// CSV with a category-id header row and column.
std::string heatmap_to_csv(const Heatmap& heatmap);

}  // namespace rulegen::analytics
