// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rulegen::rex {

/// Raised by Pattern::compile for malformed pattern text.
class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& message, std::size_t pos)
        : std::runtime_error(message + " at offset " + std::to_string(pos)), pos_(pos) {}
    std::size_t pos() const { return pos_; }

  private:
    std::size_t pos_;
};

/// NFA-simulation regex engine over bytes. Supported syntax: literals, '.',
/// classes [...] with ranges and negation, escapes (\d \D \w \W \s \S \n \r
/// \t \f \v \0 \xHH and escaped metacharacters), anchors ^ $, \b \B, groups
/// (capturing syntax accepted, semantics non-capturing), alternation, and
/// the quantifiers * + ? {m} {m,} {m,n} with optional lazy suffix.
///
/// Matching runs a Thompson set simulation, so there is no catastrophic
/// backtracking; work is bounded by an explicit step budget instead.
class Pattern {
  public:
    struct Span {
        std::size_t begin;
        std::size_t end;
    };

    /// Throws ParseError on malformed input or when repetition expansion
    /// exceeds the program size cap.
    static Pattern compile(std::string_view pattern, bool icase = false, bool dotall = false);

    /// Leftmost-longest non-overlapping matches. nullopt: step budget exhausted.
    std::optional<std::vector<Span>> find_all(std::string_view text,
                                              std::uint64_t step_budget = kDefaultBudget) const;

    /// First match anywhere, or nullopt on budget exhaustion.
    std::optional<bool> search(std::string_view text,
                               std::uint64_t step_budget = kDefaultBudget) const;

    std::size_t program_size() const { return insts_.size(); }

    static constexpr std::uint64_t kDefaultBudget = 50'000'000;

  private:
    enum class Op : std::uint8_t { byte, split, jump, assertion, match };
    enum class Assert : std::uint8_t { text_start, text_end, word_boundary, not_word_boundary };
    using ByteSet = std::array<std::uint64_t, 4>;

    struct Inst {
        Op op = Op::match;
        std::int32_t x = -1;       // next / first branch
        std::int32_t y = -1;       // second branch (split)
        std::int32_t bitmap = -1;  // byte-class index for Op::byte
        Assert kind = Assert::text_start;
    };

    struct Matcher;

    // Longest match starting exactly at `start`; nullopt on budget exhaustion,
    // SIZE_MAX sentinel in the inner optional means "no match at this start".
    std::optional<std::size_t> match_at(std::string_view text, std::size_t start,
                                        std::uint64_t& budget) const;

    std::vector<Inst> insts_;
    std::vector<ByteSet> bitmaps_;
    std::int32_t start_ = 0;
};

}  // namespace rulegen::rex
