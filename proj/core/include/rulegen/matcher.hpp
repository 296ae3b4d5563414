// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "rulegen/corpus.hpp"
#include "rulegen/rule.hpp"

namespace rulegen::match {

struct MatchResult {
    std::string rule_id;
    std::string package;
    std::string file;
    std::vector<std::size_t> offsets;  // byte offsets (yara) / 1-based line numbers (semgrep)
};

struct PackageVerdict {
    std::string package;
    std::set<std::string> matched_rules;
    std::size_t matched_count = 0;
    bool predicted = false;  // matched_count >= threshold
    corpus::Label label = corpus::Label::unknown;
};

struct ScanStats {
    std::vector<std::string> timeouts;  // "<rule>|<package>|<file>"
    bool approximate_semgrep = false;   // fallback matcher used for semgrep rules
};

struct MatcherConfig {
    std::size_t threshold = 1;        // T: matched-rule count for a positive verdict
    std::uint64_t timeout_ms = 2000;  // per (rule, file)
    std::string external_semgrep_cmd; // optional adapter, "{rule}" and "{target}" slots
};

/// All results for one file; rules whose condition does not hold produce no
/// entry. Timeouts are recorded and the scan continues.
std::vector<MatchResult> scan_file(const std::vector<rules::Rule>& rule_set,
                                   const corpus::SourceFile& file, const std::string& package,
                                   const MatcherConfig& cfg = {}, ScanStats* stats = nullptr);

/// Offsets of every occurrence (overlapping included) of a plain literal,
/// honoring nocase/wide/ascii/fullword.
std::vector<std::size_t> find_literal(std::string_view haystack, std::string_view needle,
                                      bool nocase = false, bool wide = false, bool ascii = true,
                                      bool fullword = false);

struct CorpusScan {
    std::vector<PackageVerdict> verdicts;                       // sorted by package name
    std::vector<MatchResult> findings;                          // sorted (package, rule, file)
    std::map<std::string, std::set<std::string>> rule_matches;  // rule id -> matched packages
    ScanStats stats;
};

/// Deterministic: same rules + corpus give byte-identical reports regardless
/// of the jobs setting.
CorpusScan scan_corpus(const std::vector<rules::Rule>& rule_set,
                       const std::vector<corpus::PackageRecord>& packages,
                       const MatcherConfig& cfg = {}, unsigned jobs = 1);

}  // namespace rulegen::match
