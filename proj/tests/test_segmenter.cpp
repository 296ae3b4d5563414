// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <numeric>
#include <random>
#include <set>

#include "rulegen/segmenter.hpp"

using namespace rulegen;
using seg::Token;
using seg::TokenKind;

namespace {

corpus::SourceFile file_of(std::string content, std::string path = "t.py") {
    corpus::SourceFile f;
    f.relative_path = std::move(path);
    f.content = std::move(content);
    f.byte_len = f.content.size();
    return f;
}

}  // namespace

TEST_CASE("tokenizer basics") {
    auto tokens = seg::tokenize_source(file_of("x = 1"));
    REQUIRE(tokens.size() == 3);
    CHECK(tokens[0].kind == TokenKind::identifier);
    CHECK(tokens[0].text == "x");
    CHECK(tokens[1].kind == TokenKind::op);
    CHECK(tokens[1].text == "=");
    CHECK(tokens[2].kind == TokenKind::number);
    CHECK(tokens[2].text == "1");

    CHECK(seg::tokenize_source(file_of("")).empty());
}

TEST_CASE("tokenizer drops comments, keeps literals and offsets") {
    auto tokens = seg::tokenize_source(file_of("a = 'txt'  # comment\nb = \"x\" // c\n/* d */ e"));
    std::vector<std::string> texts;
    for (const auto& t : tokens) {
        texts.push_back(t.text);
    }
    CHECK(texts == std::vector<std::string>{"a", "=", "'txt'", "b", "=", "\"x\"", "e"});
    CHECK(tokens[2].kind == TokenKind::string_literal);
    CHECK(tokens[2].offset == 4);
}

TEST_CASE("tokenizer golden count on a frozen fixture") {
    // import(1) os(2) def(3) run(4) ((5) cmd(6) )(7) :(8) return(9) os(10)
    // .(11) system(12) ((13) cmd(14) )(15)
    std::string fixture = "import os\n\ndef run(cmd):\n    return os.system(cmd)\n";
    CHECK(seg::tokenize_source(file_of(fixture)).size() == 15);
}

TEST_CASE("tokenizer handles unknown bytes and triple quotes") {
    auto tokens = seg::tokenize_source(file_of("'''big\nstring''' \x01"));
    REQUIRE(tokens.size() == 2);
    CHECK(tokens[0].kind == TokenKind::string_literal);
    CHECK(tokens[0].text == "'''big\nstring'''");
    CHECK(tokens[1].kind == TokenKind::other);
}

TEST_CASE("split_segments boundaries") {
    std::vector<Token> tokens(1024, Token{TokenKind::identifier, "t", 0});
    auto segments = seg::split_segments(tokens, "f.py", 512);
    REQUIRE(segments.size() == 2);
    CHECK(segments[0].token_count == 512);
    CHECK(segments[1].token_count == 512);

    tokens.resize(5);
    CHECK(seg::split_segments(tokens, "f.py", 512).size() == 1);

    tokens.assign(513, Token{TokenKind::identifier, "t", 0});
    auto odd = seg::split_segments(tokens, "f.py", 512);
    REQUIRE(odd.size() == 2);
    CHECK(odd[0].token_count == 512);
    CHECK(odd[1].token_count == 1);
    CHECK(odd[1].index == 1);
}

TEST_CASE("split_segments concatenation covers all tokens") {
    std::mt19937 rng(11);
    for (int round = 0; round < 20; ++round) {
        std::size_t n = rng() % 50;
        std::vector<Token> tokens;
        for (std::size_t i = 0; i < n; ++i) {
            tokens.push_back({TokenKind::identifier, "t" + std::to_string(i), i});
        }
        std::size_t threshold = 1 + rng() % 8;
        auto segments = seg::split_segments(tokens, "f.py", threshold);
        std::vector<Token> joined;
        for (const auto& s : segments) {
            joined.insert(joined.end(), s.tokens.begin(), s.tokens.end());
        }
        REQUIRE(joined.size() == tokens.size());
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            CHECK(joined[i].text == tokens[i].text);
        }
        for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
            CHECK(segments[i].token_count == threshold);
        }
    }
}

TEST_CASE("basic units: two top-level defs, no prelude") {
    auto units = seg::extract_basic_units(file_of("def a():\n    pass\ndef b():\n    pass\n"));
    REQUIRE(units.size() == 2);
    CHECK(units[0].kind == seg::UnitKind::function);
    CHECK(units[1].kind == seg::UnitKind::function);
    CHECK(units[0].text == "def a():\n    pass\n");
    CHECK(units[1].text == "def b():\n    pass\n");
}

TEST_CASE("basic units: 9000 chars without starters become an overflow chain") {
    std::string big;
    while (big.size() < 9000) {
        std::string line = "v" + std::to_string(big.size()) + " = 'データ'\n";
        if (big.size() + line.size() > 9000) {
            line.resize(9000 - big.size());
        }
        big += line;
    }
    REQUIRE(big.size() == 9000);
    auto units = seg::extract_basic_units(file_of(big));
    REQUIRE(units.size() == 3);
    CHECK(units[0].char_len == 4000);
    CHECK(units[1].char_len == 4000);
    CHECK(units[2].char_len == 1000);
    for (const auto& u : units) {
        CHECK(u.kind == seg::UnitKind::overflow_chunk);
    }
}

TEST_CASE("basic units: hand-annotated spans for a small module") {
    std::string fixture =
        "import os\n"         // line 1 (prelude)
        "import sys\n"        // line 2
        "\n"                  // line 3
        "class Alpha:\n"      // line 4 (class unit)
        "    def go(self):\n" // line 5: nested def stays inside the class
        "        return 1\n"  // line 6
        "\n"                  // line 7
        "def main():\n"       // line 8 (function unit)
        "    return Alpha().go()\n";  // line 9
    auto units = seg::extract_basic_units(file_of(fixture));
    REQUIRE(units.size() == 3);
    CHECK(units[0].kind == seg::UnitKind::module_prelude);
    CHECK(units[0].start_line == 1);
    CHECK(units[0].end_line == 3);
    CHECK(units[1].kind == seg::UnitKind::class_def);
    CHECK(units[1].start_line == 4);
    CHECK(units[1].end_line == 7);
    CHECK(units[2].kind == seg::UnitKind::function);
    CHECK(units[2].start_line == 8);
    CHECK(units[2].end_line == 9);
}

TEST_CASE("basic units concatenate to the original text") {
    std::mt19937 rng(23);
    const char* lines[] = {"import a\n", "def f():\n", "    x = 1\n", "class C:\n",
                           "    pass\n", "try:\n",     "while x:\n", "# note\n"};
    for (int round = 0; round < 30; ++round) {
        std::string text;
        std::size_t n = rng() % 40;
        for (std::size_t i = 0; i < n; ++i) {
            text += lines[rng() % 8];
        }
        auto units = seg::extract_basic_units(file_of(text), 120);
        std::string joined;
        for (const auto& u : units) {
            joined += u.text;
            CHECK(u.char_len <= 120);
            CHECK(u.char_len > 0);
        }
        CHECK(joined == text);
    }
}

TEST_CASE("metadata audit categories") {
    std::vector<std::string> popular{"requests", "numpy"};
    std::vector<std::string> denylist{"evil-dep"};

    corpus::PackageMetadata meta;
    meta.name = "cleanpkg";
    meta.version = "1.2.3";
    meta.description = "a fine package";
    CHECK(seg::audit_metadata(meta, popular, denylist).empty());

    SUBCASE("release zero") {
        meta.version = "0.0.0";
        auto flags = seg::audit_metadata(meta, popular, denylist);
        REQUIRE(flags.size() == 1);
        CHECK(flags[0].kind == seg::FlagKind::release_zero);
        CHECK_FALSE(flags[0].evidence.empty());
    }

    SUBCASE("version normalization") {
        CHECK(seg::is_release_zero("0.0"));
        CHECK(seg::is_release_zero("v0.0.0"));
        CHECK(seg::is_release_zero("000.0"));
        CHECK_FALSE(seg::is_release_zero("0.0.1"));
        CHECK_FALSE(seg::is_release_zero("0.0a"));  // non-numeric component blocks the flag
        CHECK_FALSE(seg::is_release_zero(""));
    }

    SUBCASE("typosquatting") {
        meta.name = "reqests";
        auto flags = seg::audit_metadata(meta, popular, denylist);
        REQUIRE(flags.size() == 1);
        CHECK(flags[0].kind == seg::FlagKind::typosquatting);

        meta.name = "req";  // below the length floor
        CHECK(seg::audit_metadata(meta, popular, denylist).empty());
        meta.name = "requests";  // exact popular name is fine
        CHECK(seg::audit_metadata(meta, popular, denylist).empty());
    }

    SUBCASE("denylisted dependency") {
        meta.dependencies.push_back({"evil-dep", ""});
        auto flags = seg::audit_metadata(meta, popular, denylist);
        REQUIRE(flags.size() == 1);
        CHECK(flags[0].kind == seg::FlagKind::malicious_dependency);
    }

    SUBCASE("flags combine and are order independent") {
        meta.name = "reqests";
        meta.version = "0.0";
        meta.description = "   ";
        meta.dependencies.push_back({"evil-dep", ""});
        auto flags = seg::audit_metadata(meta, popular, denylist);
        std::set<seg::FlagKind> kinds;
        for (const auto& f : flags) {
            kinds.insert(f.kind);
        }
        CHECK(kinds == std::set<seg::FlagKind>{
                           seg::FlagKind::empty_information, seg::FlagKind::release_zero,
                           seg::FlagKind::typosquatting, seg::FlagKind::malicious_dependency});
    }
}
