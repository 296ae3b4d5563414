// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rulegen/corpus.hpp"

namespace rulegen::seg {

enum class TokenKind { identifier, number, string_literal, op, punct, other };

struct Token {
    TokenKind kind = TokenKind::other;
    std::string text;        // literal text preserved, including quotes for strings
    std::size_t offset = 0;  // byte offset in the source content
};

/// Lexical scan: identifiers, numbers, string literals, operators, punctuation.
/// Whitespace and comments (#, //, /* */) are dropped; offsets retained.
/// Total: unknown bytes become single-char `other` tokens.
std::vector<Token> tokenize_source(const corpus::SourceFile& file);

struct CodeSegment {
    std::vector<Token> tokens;
    std::size_t token_count = 0;
    std::string file;          // origin path
    std::size_t begin_offset = 0;
    std::size_t end_offset = 0;
    std::size_t index = 0;     // position within the file's segment sequence
};

/// Fixed-length split: ceil(len/threshold) segments, all but the last holding
/// exactly `threshold` tokens.
std::vector<CodeSegment> split_segments(const std::vector<Token>& tokens, const std::string& file,
                                        std::size_t threshold = 512);

enum class UnitKind { module_prelude, function, class_def, control_block, overflow_chunk };

const char* to_string(UnitKind k);

struct BasicUnit {
    std::string text;
    UnitKind kind = UnitKind::module_prelude;
    std::string file;
    std::size_t start_line = 0;  // 1-based, inclusive
    std::size_t end_line = 0;    // 1-based, inclusive
    std::size_t char_len = 0;
};

/// Block extraction: a new unit opens at each top-level line whose first
/// non-indent text starts with def/class/if/for/while/try/with; following
/// lines accumulate until the next starter. Any unit crossing `char_cap`
/// is force-split into an overflow_chunk chain at exact character boundaries.
/// Unit texts concatenate byte-for-byte to the original file content.
std::vector<BasicUnit> extract_basic_units(const corpus::SourceFile& file,
                                           std::size_t char_cap = 4000);

enum class FlagKind { empty_information, release_zero, typosquatting, malicious_dependency };

const char* to_string(FlagKind k);

struct MetadataFlag {
    FlagKind kind;
    std::string evidence;
};

struct AuditConfig {
    std::size_t typosquat_max_distance = 2;
    std::size_t typosquat_min_length = 4;
};

/// Metadata audit per the four categories: empty description, all-zero
/// version, small edit distance to a popular package name, denylisted
/// dependency. Pure; flag order follows the category order above.
std::vector<MetadataFlag> audit_metadata(const corpus::PackageMetadata& meta,
                                         const std::vector<std::string>& popular,
                                         const std::vector<std::string>& denylist,
                                         const AuditConfig& cfg = {});

/// True when the version normalizes to all-zero numeric components
/// ("0.0", "0.0.0", "v0.0"); non-numeric components block the flag.
bool is_release_zero(const std::string& version);

}  // namespace rulegen::seg
