// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>
#include <variant>
#include <vector>

#include "rulegen/rule.hpp"

namespace rulegen::semgrep {

using CheckResult = std::variant<rules::Rule, std::vector<rules::CompileError>>;

/// Structural checker for the documented Semgrep subset: a YAML document with
/// a top-level `rules:` list holding exactly one entry that carries id,
/// message, languages (non-empty list), severity, and exactly one of
/// pattern / patterns / pattern-either / pattern-regex. patterns and
/// pattern-either nest pattern / pattern-regex clauses one level deep.
/// Regex clauses must compile. The error list is the error channel.
CheckResult check_semgrep(std::string_view text);

/// Canonical YAML for a parsed rule.
std::string to_text(const rules::SemgrepRule& rule);

}  // namespace rulegen::semgrep
