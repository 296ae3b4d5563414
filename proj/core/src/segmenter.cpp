// SPDX-License-Identifier: Apache-2.0
#include "rulegen/segmenter.hpp"

#include <algorithm>
#include <cctype>

#include "rulegen/strutil.hpp"

namespace rulegen::seg {

const char* to_string(UnitKind k) {
    switch (k) {
        case UnitKind::module_prelude: return "module_prelude";
        case UnitKind::function: return "function";
        case UnitKind::class_def: return "class";
        case UnitKind::control_block: return "control_block";
        case UnitKind::overflow_chunk: return "overflow_chunk";
    }
    return "unknown";
}

const char* to_string(FlagKind k) {
    switch (k) {
        case FlagKind::empty_information: return "empty_information";
        case FlagKind::release_zero: return "release_zero";
        case FlagKind::typosquatting: return "typosquatting";
        case FlagKind::malicious_dependency: return "malicious_dependency";
    }
    return "unknown";
}

namespace {

bool is_ident_start(unsigned char c) {
    return std::isalpha(c) || c == '_';
}

bool is_ident_char(unsigned char c) {
    return std::isalnum(c) || c == '_';
}

bool is_op_char(char c) {
    static const std::string ops = "+-*/%=<>!&|^~@?";
    return ops.find(c) != std::string::npos;
}

bool is_punct_char(char c) {
    static const std::string punct = "()[]{},.:;";
    return punct.find(c) != std::string::npos;
}

// Scans a quoted literal starting at i (supports ''' and """ triples and
// backslash escapes); returns one past the closing quote, or npos style end.
std::size_t scan_string(const std::string& s, std::size_t i) {
    char quote = s[i];
    bool triple = i + 2 < s.size() && s[i + 1] == quote && s[i + 2] == quote;
    std::size_t j = i + (triple ? 3 : 1);
    while (j < s.size()) {
        if (s[j] == '\\' && j + 1 < s.size()) {
            j += 2;
            continue;
        }
        if (triple) {
            if (j + 3 <= s.size() && s[j] == quote && s[j + 1] == quote && s[j + 2] == quote) {
                return j + 3;
            }
            ++j;
        } else {
            if (s[j] == quote) {
                return j + 1;
            }
            if (s[j] == '\n') {
                return j;  // unterminated single-line literal: stop at EOL
            }
            ++j;
        }
    }
    return s.size();
}

}  // namespace

std::vector<Token> tokenize_source(const corpus::SourceFile& file) {
    const std::string& s = file.content;
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        if (c == '#') {
            while (i < s.size() && s[i] != '\n') {
                ++i;
            }
            continue;
        }
        if (c == '/' && i + 1 < s.size() && s[i + 1] == '/') {
            while (i < s.size() && s[i] != '\n') {
                ++i;
            }
            continue;
        }
        if (c == '/' && i + 1 < s.size() && s[i + 1] == '*') {
            std::size_t end = s.find("*/", i + 2);
            i = end == std::string::npos ? s.size() : end + 2;
            continue;
        }
        if (c == '"' || c == '\'') {
            std::size_t end = scan_string(s, i);
            tokens.push_back({TokenKind::string_literal, s.substr(i, end - i), i});
            i = end;
            continue;
        }
        if (std::isdigit(c)) {
            std::size_t j = i + 1;
            while (j < s.size() &&
                   (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '.' || s[j] == '_')) {
                ++j;
            }
            tokens.push_back({TokenKind::number, s.substr(i, j - i), i});
            i = j;
            continue;
        }
        if (is_ident_start(c)) {
            std::size_t j = i + 1;
            while (j < s.size() && is_ident_char(static_cast<unsigned char>(s[j]))) {
                ++j;
            }
            tokens.push_back({TokenKind::identifier, s.substr(i, j - i), i});
            i = j;
            continue;
        }
        if (is_op_char(s[i])) {
            std::size_t j = i + 1;
            while (j < s.size() && is_op_char(s[j])) {
                ++j;
            }
            tokens.push_back({TokenKind::op, s.substr(i, j - i), i});
            i = j;
            continue;
        }
        if (is_punct_char(s[i])) {
            tokens.push_back({TokenKind::punct, s.substr(i, 1), i});
            ++i;
            continue;
        }
        tokens.push_back({TokenKind::other, s.substr(i, 1), i});
        ++i;
    }
    return tokens;
}

std::vector<CodeSegment> split_segments(const std::vector<Token>& tokens, const std::string& file,
                                        std::size_t threshold) {
    if (threshold == 0) {
        threshold = 1;
    }
    std::vector<CodeSegment> segments;
    for (std::size_t start = 0; start < tokens.size(); start += threshold) {
        CodeSegment seg;
        std::size_t end = std::min(tokens.size(), start + threshold);
        seg.tokens.assign(tokens.begin() + static_cast<std::ptrdiff_t>(start),
                          tokens.begin() + static_cast<std::ptrdiff_t>(end));
        seg.token_count = seg.tokens.size();
        seg.file = file;
        seg.begin_offset = seg.tokens.front().offset;
        seg.end_offset = seg.tokens.back().offset + seg.tokens.back().text.size();
        seg.index = segments.size();
        segments.push_back(std::move(seg));
    }
    return segments;
}

namespace {

struct StarterMatch {
    bool matched = false;
    UnitKind kind = UnitKind::control_block;
};

StarterMatch match_starter(std::string_view line) {
    // only top-level starters open a unit; indented lines stay in their block
    if (line.empty() || line.front() == ' ' || line.front() == '\t') {
        return {};
    }
    struct Starter {
        std::string_view prefix;
        UnitKind kind;
    };
    static const Starter starters[] = {
        {"def ", UnitKind::function},       {"class ", UnitKind::class_def},
        {"if ", UnitKind::control_block},   {"for ", UnitKind::control_block},
        {"while ", UnitKind::control_block},{"try:", UnitKind::control_block},
        {"with ", UnitKind::control_block}, {"async def ", UnitKind::function},
    };
    for (const auto& starter : starters) {
        if (line.starts_with(starter.prefix)) {
            return {true, starter.kind};
        }
    }
    return {};
}

std::size_t count_lines_before(const std::string& text, std::size_t offset) {
    return static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

}  // namespace

std::vector<BasicUnit> extract_basic_units(const corpus::SourceFile& file, std::size_t char_cap) {
    const std::string& text = file.content;
    std::vector<BasicUnit> units;
    if (text.empty()) {
        return units;
    }

    // pass 1: split into starter-delimited blocks (prelude first)
    struct Block {
        std::size_t begin;
        std::size_t end;
        UnitKind kind;
    };
    std::vector<Block> blocks;
    std::size_t line_start = 0;
    std::size_t block_begin = 0;
    UnitKind block_kind = UnitKind::module_prelude;
    bool have_block = false;
    while (line_start <= text.size()) {
        std::size_t line_end = text.find('\n', line_start);
        std::size_t next = line_end == std::string::npos ? text.size() : line_end + 1;
        std::string_view line(text.data() + line_start,
                              (line_end == std::string::npos ? text.size() : line_end) - line_start);
        StarterMatch starter = match_starter(line);
        if (starter.matched) {
            if (have_block && line_start > block_begin) {
                blocks.push_back({block_begin, line_start, block_kind});
            }
            block_begin = line_start;
            block_kind = starter.kind;
            have_block = true;
        } else if (!have_block) {
            have_block = true;  // leading non-starter lines: module prelude
        }
        if (next > text.size() || line_end == std::string::npos) {
            break;
        }
        line_start = next;
    }
    if (have_block && block_begin < text.size()) {
        blocks.push_back({block_begin, text.size(), block_kind});
    }

    // pass 2: enforce the char cap, force-splitting at exact boundaries
    for (const auto& block : blocks) {
        std::size_t len = block.end - block.begin;
        if (len <= char_cap) {
            BasicUnit unit;
            unit.text = text.substr(block.begin, len);
            unit.kind = block.kind;
            unit.file = file.relative_path;
            unit.start_line = count_lines_before(text, block.begin) + 1;
            unit.end_line = count_lines_before(text, block.end == 0 ? 0 : block.end - 1) + 1;
            unit.char_len = len;
            units.push_back(std::move(unit));
            continue;
        }
        for (std::size_t off = block.begin; off < block.end; off += char_cap) {
            std::size_t piece = std::min(char_cap, block.end - off);
            BasicUnit unit;
            unit.text = text.substr(off, piece);
            unit.kind = UnitKind::overflow_chunk;
            unit.file = file.relative_path;
            unit.start_line = count_lines_before(text, off) + 1;
            unit.end_line = count_lines_before(text, off + piece - 1) + 1;
            unit.char_len = piece;
            units.push_back(std::move(unit));
        }
    }
    return units;
}

bool is_release_zero(const std::string& version) {
    std::string v = trim(version);
    if (!v.empty() && (v.front() == 'v' || v.front() == 'V')) {
        v.erase(v.begin());
    }
    if (v.empty()) {
        return false;
    }
    std::size_t start = 0;
    bool any_component = false;
    for (std::size_t i = 0; i <= v.size(); ++i) {
        if (i == v.size() || v[i] == '.') {
            std::string comp = v.substr(start, i - start);
            if (comp.empty()) {
                return false;
            }
            for (char c : comp) {
                if (!std::isdigit(static_cast<unsigned char>(c))) {
                    return false;
                }
            }
            if (comp.find_first_not_of('0') != std::string::npos) {
                return false;
            }
            any_component = true;
            start = i + 1;
        }
    }
    return any_component;
}

std::vector<MetadataFlag> audit_metadata(const corpus::PackageMetadata& meta,
                                         const std::vector<std::string>& popular,
                                         const std::vector<std::string>& denylist,
                                         const AuditConfig& cfg) {
    std::vector<MetadataFlag> flags;
    if (trim(meta.description).empty()) {
        flags.push_back({FlagKind::empty_information, "description is empty"});
    }
    if (is_release_zero(meta.version)) {
        flags.push_back({FlagKind::release_zero, "version " + meta.version});
    }
    if (meta.name.size() >= cfg.typosquat_min_length) {
        std::string lowered = to_lower(meta.name);
        for (const auto& pop : popular) {
            std::string pop_lower = to_lower(pop);
            if (lowered == pop_lower) {
                continue;
            }
            std::size_t dist = levenshtein(lowered, pop_lower);
            if (dist <= cfg.typosquat_max_distance) {
                flags.push_back({FlagKind::typosquatting,
                                 meta.name + " resembles popular package " + pop});
                break;
            }
        }
    }
    for (const auto& dep : meta.dependencies) {
        if (std::find(denylist.begin(), denylist.end(), dep.name) != denylist.end()) {
            flags.push_back({FlagKind::malicious_dependency, "dependency " + dep.name});
            break;
        }
    }
    return flags;
}

}  // namespace rulegen::seg
