// SPDX-License-Identifier: Apache-2.0
#include "rulegen/yara.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <optional>
#include <set>

#include "rulegen/corpus.hpp"
#include "rulegen/rex.hpp"

namespace rulegen::yara {

using rules::CompileError;
using rules::CondExpr;
using rules::ErrCode;
using rules::MetaEntry;
using rules::Rule;
using rules::RuleFormat;
using rules::YaraRule;
using rules::YaraString;
using rules::make_error;

namespace {

bool is_ident_start(unsigned char c) {
    return std::isalpha(c) || c == '_';
}

bool is_ident_char(unsigned char c) {
    return std::isalnum(c) || c == '_';
}

// ---------------------------------------------------------------------------
// Cursor over sanitized text, comment-aware
// ---------------------------------------------------------------------------

class Cursor {
  public:
    explicit Cursor(std::string_view s) : s_(s) {}

    void skip_trivia() {
        while (pos_ < s_.size()) {
            char c = s_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else if (c == '/' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '/') {
                while (pos_ < s_.size() && s_[pos_] != '\n') {
                    ++pos_;
                }
            } else if (c == '/' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '*') {
                std::size_t end = s_.find("*/", pos_ + 2);
                pos_ = end == std::string_view::npos ? s_.size() : end + 2;
            } else {
                break;
            }
        }
    }

    bool eof() {
        skip_trivia();
        return pos_ >= s_.size();
    }

    char peek() {
        skip_trivia();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    bool eat(char c) {
        skip_trivia();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    /// Reads an identifier, or empty string when none is present.
    std::string ident() {
        skip_trivia();
        if (pos_ >= s_.size() || !is_ident_start(static_cast<unsigned char>(s_[pos_]))) {
            return {};
        }
        std::size_t start = pos_;
        while (pos_ < s_.size() && is_ident_char(static_cast<unsigned char>(s_[pos_]))) {
            ++pos_;
        }
        return std::string(s_.substr(start, pos_ - start));
    }

    /// Peeks the next identifier without consuming it.
    std::string peek_ident() {
        std::size_t save = pos_;
        std::string word = ident();
        pos_ = save;
        return word;
    }

    std::size_t pos() const { return pos_; }
    void set_pos(std::size_t p) { pos_ = p; }
    char raw_at(std::size_t p) const { return p < s_.size() ? s_[p] : '\0'; }
    std::size_t size() const { return s_.size(); }
    void advance() { ++pos_; }

  private:
    std::string_view s_;
    std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Condition parsing
// ---------------------------------------------------------------------------

class ConditionParser {
  public:
    ConditionParser(Cursor& cur, std::vector<CompileError>& errors) : cur_(cur), errors_(errors) {}

    // parses up to the rule's closing brace (not consumed)
    std::optional<CondExpr> parse() {
        if (cur_.peek() == '}') {
            errors_.push_back(make_error(ErrCode::syntax, "empty condition"));
            return std::nullopt;
        }
        auto expr = parse_or();
        if (!expr) {
            return std::nullopt;
        }
        if (cur_.peek() != '}') {
            errors_.push_back(make_error(ErrCode::syntax, "unexpected token in condition"));
            return std::nullopt;
        }
        return expr;
    }

  private:
    std::optional<CondExpr> parse_or() {
        auto left = parse_and();
        if (!left) {
            return std::nullopt;
        }
        while (cur_.peek_ident() == "or") {
            cur_.ident();
            auto right = parse_and();
            if (!right) {
                return std::nullopt;
            }
            CondExpr node;
            node.kind = CondExpr::Kind::logical_or;
            node.children.push_back(std::move(*left));
            node.children.push_back(std::move(*right));
            left = std::move(node);
        }
        return left;
    }

    std::optional<CondExpr> parse_and() {
        auto left = parse_unary();
        if (!left) {
            return std::nullopt;
        }
        while (cur_.peek_ident() == "and") {
            cur_.ident();
            auto right = parse_unary();
            if (!right) {
                return std::nullopt;
            }
            CondExpr node;
            node.kind = CondExpr::Kind::logical_and;
            node.children.push_back(std::move(*left));
            node.children.push_back(std::move(*right));
            left = std::move(node);
        }
        return left;
    }

    std::optional<CondExpr> parse_unary() {
        if (cur_.peek_ident() == "not") {
            cur_.ident();
            auto inner = parse_unary();
            if (!inner) {
                return std::nullopt;
            }
            CondExpr node;
            node.kind = CondExpr::Kind::logical_not;
            node.children.push_back(std::move(*inner));
            return node;
        }
        return parse_primary();
    }

    bool expect_of_them(const char* what) {
        if (cur_.ident() != "of" || cur_.ident() != "them") {
            errors_.push_back(
                make_error(ErrCode::syntax, std::string("expected 'of them' after ") + what));
            return false;
        }
        return true;
    }

    std::optional<CondExpr> parse_primary() {
        char c = cur_.peek();
        if (c == '(') {
            cur_.eat('(');
            auto inner = parse_or();
            if (!inner) {
                return std::nullopt;
            }
            if (!cur_.eat(')')) {
                errors_.push_back(make_error(ErrCode::syntax, "unbalanced parenthesis in condition"));
                return std::nullopt;
            }
            return inner;
        }
        if (c == '$') {
            cur_.eat('$');
            std::string id = cur_.ident();
            if (id.empty()) {
                errors_.push_back(make_error(ErrCode::syntax, "bad string reference in condition"));
                return std::nullopt;
            }
            CondExpr node;
            node.kind = CondExpr::Kind::str_ref;
            node.ref = id;
            return node;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            long long n = 0;
            while (std::isdigit(static_cast<unsigned char>(cur_.peek()))) {
                n = n * 10 + (cur_.peek() - '0');
                cur_.advance();
            }
            if (!expect_of_them("a count")) {
                return std::nullopt;
            }
            CondExpr node;
            node.kind = CondExpr::Kind::n_of_them;
            node.n = n;
            return node;
        }
        std::string word = cur_.ident();
        if (word == "all") {
            if (!expect_of_them("'all'")) {
                return std::nullopt;
            }
            CondExpr node;
            node.kind = CondExpr::Kind::all_of_them;
            return node;
        }
        if (word == "any") {
            if (!expect_of_them("'any'")) {
                return std::nullopt;
            }
            CondExpr node;
            node.kind = CondExpr::Kind::any_of_them;
            return node;
        }
        if (word == "true" || word == "false") {
            CondExpr node;
            node.kind = CondExpr::Kind::boolean;
            node.value = word == "true";
            return node;
        }
        if (word.empty()) {
            errors_.push_back(make_error(ErrCode::syntax, "unexpected character in condition"));
        } else {
            errors_.push_back(make_error(
                ErrCode::syntax, "unsupported construct '" + word + "' in condition"));
        }
        return std::nullopt;
    }

    Cursor& cur_;
    std::vector<CompileError>& errors_;
};

void collect_refs(const CondExpr& expr, std::set<std::string>& refs) {
    if (expr.kind == CondExpr::Kind::str_ref) {
        refs.insert(expr.ref);
    }
    for (const auto& child : expr.children) {
        collect_refs(child, refs);
    }
}

// ---------------------------------------------------------------------------
// Balance pre-scan (outside comments and double-quoted strings)
// ---------------------------------------------------------------------------

bool balanced(std::string_view s, std::vector<CompileError>& errors) {
    long brace = 0;
    long paren = 0;
    bool in_string = false;
    std::size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (in_string) {
            if (c == '\\') {
                i += 2;
                continue;
            }
            if (c == '"' || c == '\n') {
                in_string = false;  // newline: unterminated, caught below
                if (c == '\n') {
                    errors.push_back(make_error(ErrCode::syntax, "unclosed quote"));
                    return false;
                }
            }
            ++i;
            continue;
        }
        if (c == '"') {
            in_string = true;
            ++i;
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
            i = end == std::string_view::npos ? s.size() : end + 2;
            continue;
        }
        if (c == '{') {
            ++brace;
        } else if (c == '}') {
            --brace;
        } else if (c == '(') {
            ++paren;
        } else if (c == ')') {
            --paren;
        }
        ++i;
    }
    if (in_string) {
        errors.push_back(make_error(ErrCode::syntax, "unclosed quote"));
        return false;
    }
    if (brace != 0) {
        errors.push_back(make_error(ErrCode::syntax, "unbalanced braces"));
        return false;
    }
    if (paren != 0) {
        errors.push_back(make_error(ErrCode::syntax, "unbalanced parentheses"));
        return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// String entry parsing
// ---------------------------------------------------------------------------

bool parse_text_value(Cursor& cur, YaraString& out, std::vector<CompileError>& errors) {
    // opening quote consumed by caller
    std::string value;
    while (true) {
        char c = cur.raw_at(cur.pos());
        if (cur.pos() >= cur.size() || c == '\n') {
            errors.push_back(make_error(ErrCode::syntax, "unclosed quote in string $" + out.id));
            return false;
        }
        cur.advance();
        if (c == '"') {
            break;
        }
        if (c == '\\') {
            char esc = cur.raw_at(cur.pos());
            cur.advance();
            switch (esc) {
                case '\\': value.push_back('\\'); break;
                case '"': value.push_back('"'); break;
                case 'n': value.push_back('\n'); break;
                case 't': value.push_back('\t'); break;
                case 'r': value.push_back('\r'); break;
                case 'x': {
                    char h1 = cur.raw_at(cur.pos());
                    char h2 = cur.raw_at(cur.pos() + 1);
                    if (!std::isxdigit(static_cast<unsigned char>(h1)) ||
                        !std::isxdigit(static_cast<unsigned char>(h2))) {
                        errors.push_back(make_error(
                            ErrCode::syntax, "bad \\x escape in string $" + out.id));
                        return false;
                    }
                    auto hex = [](char h) {
                        if (h >= '0' && h <= '9') return h - '0';
                        if (h >= 'a' && h <= 'f') return h - 'a' + 10;
                        return h - 'A' + 10;
                    };
                    value.push_back(static_cast<char>(hex(h1) * 16 + hex(h2)));
                    cur.advance();
                    cur.advance();
                    break;
                }
                default:
                    errors.push_back(make_error(
                        ErrCode::syntax,
                        std::string("invalid escape '\\") + esc + "' in string $" + out.id));
                    return false;
            }
            continue;
        }
        value.push_back(c);
    }
    if (value.empty()) {
        errors.push_back(make_error(ErrCode::syntax, "empty string literal $" + out.id));
        return false;
    }
    out.kind = YaraString::Kind::text;
    out.text = value;
    return true;
}

bool parse_regex_value(Cursor& cur, YaraString& out, std::vector<CompileError>& errors) {
    // opening slash consumed by caller
    std::string body;
    while (true) {
        char c = cur.raw_at(cur.pos());
        if (cur.pos() >= cur.size() || c == '\n') {
            errors.push_back(make_error(ErrCode::syntax, "unterminated regex in string $" + out.id));
            return false;
        }
        cur.advance();
        if (c == '\\') {
            body.push_back('\\');
            body.push_back(cur.raw_at(cur.pos()));
            cur.advance();
            continue;
        }
        if (c == '/') {
            break;
        }
        body.push_back(c);
    }
    // trailing i/s flags, with no whitespace before them
    while (true) {
        char c = cur.raw_at(cur.pos());
        if (c == 'i') {
            out.re_icase = true;
            cur.advance();
        } else if (c == 's') {
            out.re_dotall = true;
            cur.advance();
        } else {
            break;
        }
    }
    if (body.empty()) {
        errors.push_back(make_error(ErrCode::syntax, "empty regex in string $" + out.id));
        return false;
    }
    out.kind = YaraString::Kind::regex;
    out.text = body;
    return true;
}

bool parse_hex_value(Cursor& cur, YaraString& out, std::vector<CompileError>& errors) {
    // opening brace consumed by caller
    std::vector<YaraString::HexByte> bytes;
    std::string nibble;
    while (true) {
        char c = cur.raw_at(cur.pos());
        if (cur.pos() >= cur.size()) {
            errors.push_back(make_error(ErrCode::syntax, "unterminated hex string $" + out.id));
            return false;
        }
        cur.advance();
        if (c == '}') {
            break;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            continue;
        }
        if (c == '?') {
            char c2 = cur.raw_at(cur.pos());
            if (c2 != '?') {
                errors.push_back(
                    make_error(ErrCode::syntax, "lone '?' in hex string $" + out.id));
                return false;
            }
            cur.advance();
            if (!nibble.empty()) {
                errors.push_back(make_error(
                    ErrCode::syntax, "odd nibble before wildcard in hex string $" + out.id));
                return false;
            }
            bytes.push_back({0, true});
            continue;
        }
        if (!std::isxdigit(static_cast<unsigned char>(c))) {
            errors.push_back(make_error(
                ErrCode::syntax, std::string("invalid character '") + c + "' in hex string $" + out.id));
            return false;
        }
        nibble.push_back(c);
        if (nibble.size() == 2) {
            auto hex = [](char h) {
                if (h >= '0' && h <= '9') return h - '0';
                if (h >= 'a' && h <= 'f') return h - 'a' + 10;
                return h - 'A' + 10;
            };
            bytes.push_back({static_cast<std::uint8_t>(hex(nibble[0]) * 16 + hex(nibble[1])), false});
            nibble.clear();
        }
    }
    if (!nibble.empty()) {
        errors.push_back(make_error(ErrCode::syntax, "odd nibble count in hex string $" + out.id));
        return false;
    }
    if (bytes.empty()) {
        errors.push_back(make_error(ErrCode::syntax, "empty hex string $" + out.id));
        return false;
    }
    out.kind = YaraString::Kind::hex;
    out.hex = std::move(bytes);
    return true;
}

}  // namespace

std::string check_encoding(std::string_view text, std::vector<CompileError>& errors) {
    std::string_view body = text;
    if (body.size() >= 3 && static_cast<unsigned char>(body[0]) == 0xEF &&
        static_cast<unsigned char>(body[1]) == 0xBB && static_cast<unsigned char>(body[2]) == 0xBF) {
        errors.push_back(make_error(ErrCode::encoding, "UTF-8 BOM present"));
        body.remove_prefix(3);
    }
    std::string sanitized = corpus::decode_utf8_lossy(body);
    if (sanitized.find("\xEF\xBF\xBD") != std::string::npos &&
        body.find("\xEF\xBF\xBD") == std::string_view::npos) {
        errors.push_back(make_error(ErrCode::encoding, "text is not valid UTF-8"));
    }
    return sanitized;
}

CompileResult compile_yara(std::string_view text) {
    std::vector<CompileError> errors;
    std::string sanitized = check_encoding(text, errors);
    if (!balanced(sanitized, errors)) {
        return errors;
    }

    Cursor cur(sanitized);
    YaraRule rule;

    // --- header
    if (cur.ident() != "rule") {
        errors.push_back(make_error(ErrCode::missing_section,
                                    "rule header (keyword 'rule' followed by an identifier)"));
        return errors;
    }
    rule.name = cur.ident();
    if (rule.name.empty()) {
        errors.push_back(make_error(ErrCode::syntax, "rule name must be an identifier"));
        return errors;
    }
    if (cur.eat(':')) {
        std::string tag;
        while (!(tag = cur.ident()).empty()) {
            rule.tags.push_back(tag);
        }
        if (rule.tags.empty()) {
            errors.push_back(make_error(ErrCode::syntax, "expected tags after ':'"));
            return errors;
        }
    }
    if (!cur.eat('{')) {
        errors.push_back(make_error(ErrCode::syntax, "expected '{' after rule header"));
        return errors;
    }

    // --- sections, in canonical order
    bool have_meta = false;
    bool have_strings = false;
    bool have_condition = false;
    std::string section = cur.peek_ident();
    if (section == "meta") {
        cur.ident();
        if (!cur.eat(':')) {
            errors.push_back(make_error(ErrCode::syntax, "expected ':' after 'meta'"));
            return errors;
        }
        have_meta = true;
        while (true) {
            std::string key = cur.peek_ident();
            if (key.empty() || key == "strings" || key == "condition") {
                break;
            }
            cur.ident();
            if (!cur.eat('=')) {
                errors.push_back(make_error(ErrCode::syntax, "expected '=' in meta entry '" + key + "'"));
                return errors;
            }
            MetaEntry entry;
            entry.key = key;
            char c = cur.peek();
            if (c == '"') {
                cur.eat('"');
                YaraString tmp;
                tmp.id = "meta:" + key;
                if (!parse_text_value(cur, tmp, errors)) {
                    return errors;
                }
                entry.type = MetaEntry::Type::str;
                entry.str = tmp.text;
            } else if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
                bool negative = cur.eat('-');
                long long value = 0;
                bool any = false;
                while (std::isdigit(static_cast<unsigned char>(cur.peek()))) {
                    value = value * 10 + (cur.peek() - '0');
                    cur.advance();
                    any = true;
                }
                if (!any) {
                    errors.push_back(make_error(ErrCode::bad_meta, "'" + key + "' has no digits"));
                    return errors;
                }
                entry.type = MetaEntry::Type::integer;
                entry.num = negative ? -value : value;
            } else {
                std::string word = cur.ident();
                if (word == "true" || word == "false") {
                    entry.type = MetaEntry::Type::boolean;
                    entry.flag = word == "true";
                } else {
                    errors.push_back(make_error(
                        ErrCode::bad_meta,
                        "'" + key + "' must be a string, integer or boolean"));
                    return errors;
                }
            }
            rule.meta.push_back(std::move(entry));
        }
        if (rule.meta.empty()) {
            errors.push_back(make_error(ErrCode::syntax, "empty meta section"));
            return errors;
        }
    }

    section = cur.peek_ident();
    if (section == "strings") {
        cur.ident();
        if (!cur.eat(':')) {
            errors.push_back(make_error(ErrCode::syntax, "expected ':' after 'strings'"));
            return errors;
        }
        have_strings = true;
        std::set<std::string> seen_ids;
        while (true) {
            if (cur.peek_ident() == "condition" || cur.peek() == '}') {
                break;
            }
            if (!cur.eat('$')) {
                errors.push_back(make_error(ErrCode::syntax, "expected '$' to begin a string entry"));
                return errors;
            }
            YaraString entry;
            entry.id = cur.ident();
            if (entry.id.empty()) {
                errors.push_back(make_error(ErrCode::syntax, "string identifier missing after '$'"));
                return errors;
            }
            if (!seen_ids.insert(entry.id).second) {
                errors.push_back(
                    make_error(ErrCode::syntax, "duplicate string identifier $" + entry.id));
                return errors;
            }
            if (!cur.eat('=')) {
                errors.push_back(make_error(ErrCode::syntax, "expected '=' after $" + entry.id));
                return errors;
            }
            char c = cur.peek();
            bool ok = false;
            if (c == '"') {
                cur.eat('"');
                ok = parse_text_value(cur, entry, errors);
            } else if (c == '/') {
                cur.eat('/');
                ok = parse_regex_value(cur, entry, errors);
            } else if (c == '{') {
                cur.eat('{');
                ok = parse_hex_value(cur, entry, errors);
            } else {
                errors.push_back(make_error(
                    ErrCode::syntax, "string $" + entry.id + " must be \"text\", /regex/ or { hex }"));
            }
            if (!ok) {
                return errors;
            }
            // keyword modifiers
            while (true) {
                std::string word = cur.peek_ident();
                if (word == "nocase") {
                    entry.nocase = true;
                } else if (word == "wide") {
                    entry.wide = true;
                } else if (word == "ascii") {
                    entry.ascii = true;
                } else if (word == "fullword") {
                    entry.fullword = true;
                } else if (word == "condition" || word.empty()) {
                    break;
                } else {
                    errors.push_back(make_error(
                        ErrCode::syntax, "unknown string modifier '" + word + "' on $" + entry.id));
                    return errors;
                }
                cur.ident();
            }
            rule.strings.push_back(std::move(entry));
        }
        if (rule.strings.empty()) {
            errors.push_back(make_error(ErrCode::syntax, "empty strings section"));
            return errors;
        }
    }

    section = cur.peek_ident();
    if (section == "condition") {
        cur.ident();
        if (!cur.eat(':')) {
            errors.push_back(make_error(ErrCode::syntax, "expected ':' after 'condition'"));
            return errors;
        }
        have_condition = true;
        ConditionParser parser(cur, errors);
        auto expr = parser.parse();
        if (!expr) {
            return errors;
        }
        rule.condition = std::move(*expr);
    }

    if (!have_meta) {
        errors.push_back(make_error(ErrCode::missing_section, "meta section"));
    }
    if (!have_strings) {
        errors.push_back(make_error(ErrCode::missing_section, "strings section"));
    }
    if (!have_condition) {
        errors.push_back(make_error(ErrCode::missing_section, "condition section"));
    }
    if (!errors.empty()) {
        return errors;
    }

    if (!cur.eat('}')) {
        errors.push_back(make_error(ErrCode::syntax, "expected '}' to close the rule"));
        return errors;
    }
    if (!cur.eof()) {
        errors.push_back(make_error(ErrCode::syntax, "trailing content after rule"));
        return errors;
    }

    // --- semantic checks
    std::set<std::string> refs;
    collect_refs(rule.condition, refs);
    std::set<std::string> defined;
    for (const auto& s : rule.strings) {
        defined.insert(s.id);
    }
    for (const auto& ref : refs) {
        if (!defined.contains(ref)) {
            errors.push_back(make_error(ErrCode::undefined_string, "$" + ref));
        }
    }
    for (const auto& s : rule.strings) {
        if (s.kind != YaraString::Kind::regex) {
            continue;
        }
        try {
            rex::Pattern::compile(s.text, s.re_icase || s.nocase, s.re_dotall);
        } catch (const rex::ParseError& e) {
            errors.push_back(make_error(ErrCode::bad_regex, "$" + s.id + ": " + e.what()));
        }
    }
    if (!errors.empty()) {
        return errors;
    }

    Rule out;
    out.format = RuleFormat::yara;
    out.name = rule.name;
    out.text = std::string(text);
    rule.condition_text = condition_to_text(rule.condition);
    out.yara = std::move(rule);
    return out;
}

std::string condition_to_text(const CondExpr& expr) {
    switch (expr.kind) {
        case CondExpr::Kind::str_ref:
            return "$" + expr.ref;
        case CondExpr::Kind::all_of_them:
            return "all of them";
        case CondExpr::Kind::any_of_them:
            return "any of them";
        case CondExpr::Kind::n_of_them:
            return std::to_string(expr.n) + " of them";
        case CondExpr::Kind::logical_and:
            return "(" + condition_to_text(expr.children[0]) + " and " +
                   condition_to_text(expr.children[1]) + ")";
        case CondExpr::Kind::logical_or:
            return "(" + condition_to_text(expr.children[0]) + " or " +
                   condition_to_text(expr.children[1]) + ")";
        case CondExpr::Kind::logical_not:
            return "(not " + condition_to_text(expr.children[0]) + ")";
        case CondExpr::Kind::boolean:
            return expr.value ? "true" : "false";
    }
    return "false";
}

std::string escape_literal(std::string_view raw) {
    std::string out;
    for (unsigned char c : raw) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '"': out += "\\\""; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (c < 0x20 || c == 0x7f) {
                    char buf[5];
                    std::snprintf(buf, sizeof(buf), "\\x%02x", c);
                    out += buf;
                } else {
                    out.push_back(static_cast<char>(c));
                }
        }
    }
    return out;
}

std::string to_text(const YaraRule& rule) {
    std::string out = "rule " + rule.name;
    if (!rule.tags.empty()) {
        out += " :";
        for (const auto& tag : rule.tags) {
            out += " " + tag;
        }
    }
    out += "\n{\n    meta:\n";
    for (const auto& m : rule.meta) {
        out += "        " + m.key + " = ";
        switch (m.type) {
            case MetaEntry::Type::str: out += "\"" + escape_literal(m.str) + "\""; break;
            case MetaEntry::Type::integer: out += std::to_string(m.num); break;
            case MetaEntry::Type::boolean: out += m.flag ? "true" : "false"; break;
        }
        out += "\n";
    }
    out += "    strings:\n";
    for (const auto& s : rule.strings) {
        out += "        $" + s.id + " = ";
        if (s.kind == YaraString::Kind::text) {
            out += "\"" + escape_literal(s.text) + "\"";
        } else if (s.kind == YaraString::Kind::regex) {
            out += "/" + s.text + "/";
            if (s.re_icase) {
                out += "i";
            }
            if (s.re_dotall) {
                out += "s";
            }
        } else {
            out += "{ ";
            for (const auto& b : s.hex) {
                if (b.wildcard) {
                    out += "?? ";
                } else {
                    char buf[4];
                    std::snprintf(buf, sizeof(buf), "%02X ", b.value);
                    out += buf;
                }
            }
            out += "}";
        }
        if (s.nocase) {
            out += " nocase";
        }
        if (s.wide) {
            out += " wide";
        }
        if (s.ascii) {
            out += " ascii";
        }
        if (s.fullword) {
            out += " fullword";
        }
        out += "\n";
    }
    out += "    condition:\n        " + condition_to_text(rule.condition) + "\n}\n";
    return out;
}

}  // namespace rulegen::yara
