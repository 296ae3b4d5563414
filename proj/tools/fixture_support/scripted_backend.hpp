// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "rulegen/llm.hpp"

namespace rulegen::fixtures {

/// Deterministic LLM stand-in for building replay fixtures: crafts rules from
/// indicators shared by every sample block, echoes rules back for refine
/// prompts, and leaves rules unchanged for fix prompts. `stubborn` mode
/// answers every prompt with the same broken rule (for fix-loop bound tests).
class ScriptedBackend final : public llm::LlmBackend {
  public:
    enum class Mode { helpful, stubborn };

    explicit ScriptedBackend(Mode mode = Mode::helpful) : mode_(mode) {}

    std::string id() const override {
        return mode_ == Mode::helpful ? "scripted" : "scripted-stubborn";
    }
    std::string complete_text(const llm::Prompt& prompt) override;

    /// Indicators present in every sample: dotted identifier chains and quoted
    /// literals of >= 6 chars, ranked by (length desc, lexicographic), top 4.
    static std::vector<std::string> shared_indicators(const std::vector<std::string>& samples);

    static const char* broken_rule_text();

  private:
    Mode mode_;
};

}  // namespace rulegen::fixtures
