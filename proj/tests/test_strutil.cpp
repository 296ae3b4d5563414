// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "rulegen/strutil.hpp"

using namespace rulegen;

namespace {

// textbook full-matrix DP, kept independent of the two-row production version
std::size_t levenshtein_oracle(const std::string& a, const std::string& b) {
    std::vector<std::vector<std::size_t>> d(a.size() + 1,
                                            std::vector<std::size_t>(b.size() + 1, 0));
    for (std::size_t i = 0; i <= a.size(); ++i) {
        d[i][0] = i;
    }
    for (std::size_t j = 0; j <= b.size(); ++j) {
        d[0][j] = j;
    }
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost});
        }
    }
    return d[a.size()][b.size()];
}

std::string random_string(std::mt19937& rng, std::size_t max_len) {
    std::size_t len = rng() % (max_len + 1);
    std::string s;
    for (std::size_t i = 0; i < len; ++i) {
        s.push_back(static_cast<char>('a' + rng() % 4));
    }
    return s;
}

}  // namespace

TEST_CASE("levenshtein known values") {
    CHECK(levenshtein("", "") == 0);
    CHECK(levenshtein("abc", "") == 3);
    CHECK(levenshtein("", "abc") == 3);
    CHECK(levenshtein("abc", "abc") == 0);
    CHECK(levenshtein("abc", "abd") == 1);
    CHECK(levenshtein("kitten", "sitting") == 3);
    CHECK(levenshtein("reqests", "requests") == 1);
}

TEST_CASE("levenshtein equals the DP oracle on random strings") {
    std::mt19937 rng(7);
    for (int i = 0; i < 200; ++i) {
        std::string a = random_string(rng, 12);
        std::string b = random_string(rng, 12);
        CAPTURE(a);
        CAPTURE(b);
        CHECK(levenshtein(a, b) == levenshtein_oracle(a, b));
    }
}

TEST_CASE("collapse and trim") {
    CHECK(collapse_whitespace("  a\t\tb \n c  ") == "a b c");
    CHECK(collapse_whitespace("") == "");
    CHECK(trim("  x  ") == "x");
    CHECK(to_lower("AbC") == "abc");
}

TEST_CASE("split_lines") {
    CHECK(split_lines("a\nb\n") == std::vector<std::string>{"a", "b"});
    CHECK(split_lines("a\nb") == std::vector<std::string>{"a", "b"});
    CHECK(split_lines("") == std::vector<std::string>{});
}

TEST_CASE("normalize_rule_text strips comments and case") {
    std::string rule = "rule X { // comment\n  meta: /* block */ a = \"V\"\n # hash\n}";
    CHECK(normalize_rule_text(rule) == "rule x { meta: a = \"v\" }");
}

TEST_CASE("count_occurrences is non-overlapping") {
    CHECK(count_occurrences("aaaa", "aa") == 2);
    CHECK(count_occurrences("abcabc", "abc") == 2);
    CHECK(count_occurrences("abc", "") == 0);
}
