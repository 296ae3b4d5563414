// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <variant>
#include <vector>

#include "rulegen/llm.hpp"
#include "rulegen/rule.hpp"

namespace rulegen::validate {

/// Short-term memory of the fix agent: at most `capacity` newest error lists.
class AgentMemory {
  public:
    explicit AgentMemory(std::size_t capacity = 2) : capacity_(capacity) {}

    void push(std::vector<rules::CompileError> errors) {
        recent_.push_back(std::move(errors));
        while (recent_.size() > capacity_) {
            recent_.erase(recent_.begin());
        }
    }

    const std::vector<std::vector<rules::CompileError>>& recent() const { return recent_; }
    std::size_t size() const { return recent_.size(); }

    int attempt = 0;  // 0..max_fix_attempts

  private:
    std::size_t capacity_;
    std::vector<std::vector<rules::CompileError>> recent_;
};

struct AlignmentFailure {
    llm::RuleDraft draft;
    int attempts = 0;  // fix attempts consumed
    std::vector<std::vector<rules::CompileError>> history;  // full, not memory-trimmed
    std::string last_rule_text;
};

struct ValidatorConfig {
    int max_fix_attempts = 5;
    std::size_t error_memory = 2;
    // Optional external compilers; "{file}" in the command is replaced with a
    // temp file holding the rule text. Non-zero exit merges a diagnostic.
    std::string external_yara_cmd;
    std::string external_semgrep_cmd;
    bool crlf_output = false;  // write rule files with CRLF line endings
};

using CompileOutcome = std::variant<rules::Rule, std::vector<rules::CompileError>>;

/// Dispatches to the YARA compiler or the Semgrep checker, then (when
/// configured) runs the external compiler and merges its diagnostics.
CompileOutcome compile_rule(std::string_view text, rules::RuleFormat format,
                            const ValidatorConfig& cfg = {});

using AlignResult = std::variant<rules::Rule, AlignmentFailure>;

/// The compile -> error -> fix-prompt -> recompile loop, bounded at
/// cfg.max_fix_attempts with a cfg.error_memory-deep error memory. A draft
/// that compiles immediately returns with attempts=0; otherwise each round
/// feeds the newest <= 2 error lists into a fix prompt. A response without a
/// parseable rule keeps the previous text and consumes the attempt.
AlignResult align_rule(const llm::RuleDraft& draft, llm::LlmBackend& backend,
                       const llm::PromptTemplates& templates, const ValidatorConfig& cfg = {});

/// Serializes rule text with the configured line endings.
std::string render_rule_file(std::string_view text, const ValidatorConfig& cfg);

}  // namespace rulegen::validate
