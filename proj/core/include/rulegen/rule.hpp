// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rulegen::rules {

enum class RuleFormat { yara, semgrep };
const char* to_string(RuleFormat f);

enum class ErrCode {
    missing_section,
    syntax,
    undefined_string,
    bad_regex,
    bad_meta,
    encoding,
    yaml_structure,
};
const char* to_string(ErrCode c);

struct CompileError {
    ErrCode code;
    std::string message;
};

/// Frozen message catalog: fix prompts embed these verbatim, so the wording is
/// part of the stable interface.
CompileError make_error(ErrCode code, const std::string& detail);

struct RuleScores {
    std::optional<double> confidence;
    std::optional<double> maliciousness;
    std::optional<double> risk;
};

// ---------------------------------------------------------------------------
// YARA structure (documented subset)
// ---------------------------------------------------------------------------

struct YaraString {
    enum class Kind { text, regex, hex };
    std::string id;    // without the '$'
    Kind kind = Kind::text;
    std::string text;  // unescaped literal, or regex body
    bool nocase = false;
    bool wide = false;
    bool ascii = false;
    bool fullword = false;
    bool re_icase = false;
    bool re_dotall = false;
    struct HexByte {
        std::uint8_t value = 0;
        bool wildcard = false;  // "??"
    };
    std::vector<HexByte> hex;
};

struct MetaEntry {
    enum class Type { str, integer, boolean };
    std::string key;
    Type type = Type::str;
    std::string str;
    long long num = 0;
    bool flag = false;
};

struct CondExpr {
    enum class Kind {
        str_ref,
        all_of_them,
        any_of_them,
        n_of_them,
        logical_and,
        logical_or,
        logical_not,
        boolean,
    };
    Kind kind = Kind::boolean;
    std::string ref;  // str_ref
    long long n = 0;  // n_of_them
    bool value = false;
    std::vector<CondExpr> children;
};

struct YaraRule {
    std::string name;
    std::vector<std::string> tags;
    std::vector<MetaEntry> meta;
    std::vector<YaraString> strings;
    CondExpr condition;
    std::string condition_text;
};

// ---------------------------------------------------------------------------
// Semgrep structure (documented subset)
// ---------------------------------------------------------------------------

struct SemgrepClause {
    enum class Kind { pattern, pattern_regex };
    Kind kind = Kind::pattern;
    std::string value;
};

struct SemgrepRule {
    std::string id;
    std::string message;
    std::string severity;
    std::vector<std::string> languages;
    enum class Mode { single, all_of, any_of } mode = Mode::single;
    std::vector<SemgrepClause> clauses;
};

// ---------------------------------------------------------------------------

struct Provenance {
    std::string origin;  // "cluster:<id>" | "metadata:<package>" | "baseline:<group>" | ""
    std::string detail;
    int attempts = 0;    // fix attempts consumed during alignment
};

struct Rule {
    RuleFormat format = RuleFormat::yara;
    std::string name;  // yara rule identifier or semgrep id
    std::string text;  // accepted source text
    std::optional<YaraRule> yara;
    std::optional<SemgrepRule> semgrep;
    RuleScores scores;
    Provenance provenance;
    std::vector<std::string> taxonomy_tags;  // "category/subcategory", filled by analytics
};

}  // namespace rulegen::rules
