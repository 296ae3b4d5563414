// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "rulegen/yara.hpp"

using namespace rulegen;
using rules::CompileError;
using rules::ErrCode;
using rules::Rule;
using rules::YaraString;

namespace {

const char* kValidRule =
    "rule demo_rule : pypi malware\n"
    "{\n"
    "    meta:\n"
    "        description = \"demo\"\n"
    "        severity = 3\n"
    "        active = true\n"
    "    strings:\n"
    "        $lit = \"os.system\" nocase fullword\n"
    "        $re = /https?:\\/\\/[a-z.]+/i\n"
    "        $hex = { DE AD ?? EF }\n"
    "    condition:\n"
    "        ($lit and $re) or 2 of them\n"
    "}\n";

Rule must_compile(std::string_view text) {
    auto outcome = yara::compile_yara(text);
    if (!std::holds_alternative<Rule>(outcome)) {
        for (const auto& e : std::get<std::vector<CompileError>>(outcome)) {
            MESSAGE(e.message);
        }
        REQUIRE(false);
    }
    return std::get<Rule>(std::move(outcome));
}

std::vector<CompileError> must_fail(std::string_view text) {
    auto outcome = yara::compile_yara(text);
    REQUIRE(std::holds_alternative<std::vector<CompileError>>(outcome));
    return std::get<std::vector<CompileError>>(outcome);
}

bool has_code(const std::vector<CompileError>& errors, ErrCode code) {
    for (const auto& e : errors) {
        if (e.code == code) {
            return true;
        }
    }
    return false;
}

}  // namespace

TEST_CASE("a full-featured rule parses into structure") {
    Rule rule = must_compile(kValidRule);
    REQUIRE(rule.yara.has_value());
    const auto& y = *rule.yara;
    CHECK(rule.name == "demo_rule");
    CHECK(y.tags == std::vector<std::string>{"pypi", "malware"});
    REQUIRE(y.meta.size() == 3);
    CHECK(y.meta[0].str == "demo");
    CHECK(y.meta[1].num == 3);
    CHECK(y.meta[2].flag == true);
    REQUIRE(y.strings.size() == 3);
    CHECK(y.strings[0].kind == YaraString::Kind::text);
    CHECK(y.strings[0].text == "os.system");
    CHECK(y.strings[0].nocase);
    CHECK(y.strings[0].fullword);
    CHECK(y.strings[1].kind == YaraString::Kind::regex);
    CHECK(y.strings[1].re_icase);
    CHECK(y.strings[1].text == "https?:\\/\\/[a-z.]+");
    REQUIRE(y.strings[2].hex.size() == 4);
    CHECK(y.strings[2].hex[0].value == 0xDE);
    CHECK(y.strings[2].hex[2].wildcard);
}

TEST_CASE("minimal rule with any of them") {
    Rule rule = must_compile(
        "rule tiny { meta: d = \"x\" strings: $a = \"needle\" condition: any of them }");
    CHECK(rule.yara->condition_text == "any of them");
}

TEST_CASE("comments are tolerated anywhere trivia is") {
    must_compile(
        "// leading\nrule c1 { /* inline */ meta: d = \"x\" // trailing\n"
        " strings: $a = \"abc\" condition: $a }");
}

TEST_CASE("undefined string reference") {
    auto errors = must_fail(
        "rule r { meta: d = \"x\" strings: $a = \"abc\" condition: $a and $b }");
    CHECK(has_code(errors, ErrCode::undefined_string));
}

TEST_CASE("pretty print round trip is structurally stable") {
    Rule rule = must_compile(kValidRule);
    std::string canonical = yara::to_text(*rule.yara);
    Rule again = must_compile(canonical);
    CHECK(again.name == rule.name);
    REQUIRE(again.yara->strings.size() == rule.yara->strings.size());
    for (std::size_t i = 0; i < rule.yara->strings.size(); ++i) {
        CHECK(again.yara->strings[i].id == rule.yara->strings[i].id);
        CHECK(again.yara->strings[i].kind == rule.yara->strings[i].kind);
        CHECK(again.yara->strings[i].text == rule.yara->strings[i].text);
    }
    CHECK(again.yara->condition_text == rule.yara->condition_text);
    CHECK(yara::to_text(*again.yara) == canonical);  // fixed point

    // compiling accepted text again succeeds (idempotent acceptance)
    must_compile(rule.text);
}

TEST_CASE("escape handling in literals") {
    Rule rule = must_compile(
        "rule esc { meta: d = \"x\" strings: $a = \"a\\\"b\\\\c\\n\\x41\" condition: $a }");
    CHECK(rule.yara->strings[0].text == "a\"b\\c\nA");
    std::string rendered = yara::to_text(*rule.yara);
    Rule again = must_compile(rendered);
    CHECK(again.yara->strings[0].text == "a\"b\\c\nA");
}

TEST_CASE("seeded mutations produce the intended error codes") {
    struct Mutation {
        const char* label;
        std::string text;
        ErrCode expected;
    };
    std::string base(kValidRule);
    auto replace = [&](const std::string& from, const std::string& to) {
        std::string out = base;
        auto pos = out.find(from);
        REQUIRE(pos != std::string::npos);
        out.replace(pos, from.size(), to);
        return out;
    };

    std::vector<Mutation> mutations{
        {"drop closing brace", base.substr(0, base.rfind('}')), ErrCode::syntax},
        {"drop condition section",
         replace("    condition:\n        ($lit and $re) or 2 of them\n", ""),
         ErrCode::missing_section},
        {"drop meta section",
         replace("    meta:\n        description = \"demo\"\n        severity = 3\n"
                 "        active = true\n",
                 ""),
         ErrCode::missing_section},
        {"drop strings section",
         replace("    strings:\n        $lit = \"os.system\" nocase fullword\n"
                 "        $re = /https?:\\/\\/[a-z.]+/i\n        $hex = { DE AD ?? EF }\n",
                 ""),
         ErrCode::missing_section},
        {"remove rule keyword", replace("rule demo_rule", "demo_rule"),
         ErrCode::missing_section},
        {"break a regex", replace("/https?:\\/\\/[a-z.]+/i", "/https?:\\/\\/[a-z.+/i"),
         ErrCode::bad_regex},
        {"add a BOM", "\xEF\xBB\xBF" + base, ErrCode::encoding},
        {"invalid utf-8 byte", replace("demo\"", "de\xFFmo\""), ErrCode::encoding},
        {"undefined condition ref", replace("($lit and $re)", "($lit and $nope)"),
         ErrCode::undefined_string},
        {"bare identifier meta value", replace("description = \"demo\"", "description = demo"),
         ErrCode::bad_meta},
        {"unclosed quote", replace("\"os.system\"", "\"os.system"), ErrCode::syntax},
        {"unbalanced condition paren", replace("($lit and $re) or", "($lit and $re or"),
         ErrCode::syntax},
        {"odd hex nibble", replace("{ DE AD ?? EF }", "{ DE A ?? EF }"), ErrCode::syntax},
        {"invalid hex char", replace("{ DE AD ?? EF }", "{ DE GZ ?? EF }"), ErrCode::syntax},
        {"unknown string modifier", replace("nocase fullword", "nocase bogusmod"),
         ErrCode::syntax},
        {"incomplete of-quantifier", replace("2 of them", "2 of"), ErrCode::syntax},
        {"empty condition body",
         replace("($lit and $re) or 2 of them\n", "\n"), ErrCode::syntax},
        {"bad repetition regex", replace("/https?:\\/\\/[a-z.]+/i", "/a{2,1}/"),
         ErrCode::bad_regex},
        {"duplicate string id", replace("$hex = { DE AD ?? EF }", "$lit = \"again\""),
         ErrCode::syntax},
        {"digit-leading rule name", replace("rule demo_rule", "rule 9bad"), ErrCode::syntax},
    };

    for (const auto& m : mutations) {
        CAPTURE(m.label);
        auto errors = must_fail(m.text);
        CHECK(has_code(errors, m.expected));
    }
}

TEST_CASE("trailing garbage and empty sections are rejected") {
    auto tail = must_fail(
        "rule a { meta: d = \"x\" strings: $a = \"abc\" condition: $a } trailing");
    CHECK(has_code(tail, ErrCode::syntax));

    auto empty_strings = must_fail("rule a { meta: d = \"x\" strings: condition: true }");
    CHECK(has_code(empty_strings, ErrCode::syntax));
}

TEST_CASE("condition text canonicalization") {
    Rule rule = must_compile(
        "rule c { meta: d = \"x\" strings: $a = \"abc\" $b = \"def\" condition: "
        "not $a or ($b and 1 of them) }");
    CHECK(rule.yara->condition_text == "((not $a) or ($b and 1 of them))");
}
