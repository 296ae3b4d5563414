// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rulegen/rule.hpp"

namespace rulegen::yara {

using CompileResult = std::variant<rules::Rule, std::vector<rules::CompileError>>;

/// Structural compiler for the documented YARA subset: one rule per input,
/// all of meta/strings/condition required, text/regex/hex string kinds with
/// nocase/wide/ascii/fullword modifiers, and boolean conditions over string
/// refs, `all of them`, `any of them`, `N of them`, and/or/not, parentheses.
///
/// Checks run in order: UTF-8 without BOM (encoding), lexical balance
/// (syntax), rule header and the three sections (missing_section), strings
/// well-formedness (syntax), condition parse (syntax), all $refs defined
/// (undefined_string), regex bodies compile (bad_regex), meta value types
/// (bad_meta). The error list is the error channel.
CompileResult compile_yara(std::string_view text);

/// Canonical text for a parsed rule; compiling the output yields a
/// structurally equal rule.
std::string to_text(const rules::YaraRule& rule);

std::string condition_to_text(const rules::CondExpr& expr);
std::string escape_literal(std::string_view raw);

/// Shared with the semgrep checker: BOM and UTF-8 validity. Returns a
/// sanitized copy that downstream parsing can run on; failures are appended
/// to `errors`.
std::string check_encoding(std::string_view text, std::vector<rules::CompileError>& errors);

}  // namespace rulegen::yara
