// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rulegen/corpus.hpp"
#include "rulegen/rule.hpp"
#include "rulegen/segmenter.hpp"
#include "rulegen/util.hpp"

namespace rulegen::llm {

enum class Stage { craft, refine, fix };
const char* to_string(Stage s);

struct Prompt {
    std::string system_text;
    std::string user_text;
    Stage stage = Stage::craft;
    rules::RuleFormat rule_format = rules::RuleFormat::yara;
    std::string few_shot;  // example rule embedded in user_text for craft prompts
};

struct LlmResponse {
    std::string text;
    std::string backend_id;
    std::string request_digest;
};

struct RuleDraft {
    std::string analysis_text;
    std::string rule_text;
    rules::RuleFormat rule_format = rules::RuleFormat::yara;
    rules::Provenance provenance;
    rules::RuleScores scores;
};

/// The prompt wording ships as editable template files; these are the built-in
/// copies embedded at build time. Placeholders: {format} {samples} {few_shot}
/// {analysis} {rule} {errors}.
struct PromptTemplates {
    std::string craft_system;
    std::string craft_user;
    std::string refine_system;
    std::string refine_user;
    std::string fix_system;
    std::string fix_user;
    std::string fewshot_yara;
    std::string fewshot_semgrep;

    static PromptTemplates builtin();
    /// Loads <dir>/<slot>.txt for every slot present; missing files keep the
    /// built-in text.
    static PromptTemplates from_dir(const std::filesystem::path& dir);

    const std::string& few_shot(rules::RuleFormat format) const {
        return format == rules::RuleFormat::yara ? fewshot_yara : fewshot_semgrep;
    }
};

/// Canonical digest of a prompt; identical prompts digest identically.
std::string request_digest(const Prompt& prompt);

/// Craft prompt over 1..4 basic units. Throws Error{UnitTooLarge} when a unit
/// exceeds 4000 chars and Error{EmptyInput} for zero units.
Prompt build_craft_prompt(const std::vector<seg::BasicUnit>& units, rules::RuleFormat format,
                          const PromptTemplates& templates);

/// Craft prompt over one metadata record plus its audit flags (the whole
/// metadata is one basic unit, serialized as JSON).
Prompt build_craft_prompt(const corpus::PackageMetadata& meta,
                          const std::vector<seg::MetadataFlag>& flags, rules::RuleFormat format,
                          const PromptTemplates& templates);

/// Refine prompt. Both inputs must be non-empty (Error{EmptyInput}).
Prompt build_refine_prompt(const std::string& analysis, const std::string& rule,
                           rules::RuleFormat format, const PromptTemplates& templates);

/// Fix prompt over the newest <= 2 error lists (older lists are dropped here
/// if the caller passes more). Requires >= 1 error message.
Prompt build_fix_prompt(const std::string& analysis, const std::string& rule,
                        const std::vector<std::vector<rules::CompileError>>& recent_errors,
                        rules::RuleFormat format, const PromptTemplates& templates);

class LlmBackend {
  public:
    virtual ~LlmBackend() = default;
    virtual std::string id() const = 0;
    virtual std::string complete_text(const Prompt& prompt) = 0;
};

/// Chat-completion HTTP service (system+user messages). Model, temperature
/// and token cap are constructor parameters; the API key comes from the named
/// environment variable. Throws Error{BackendUnavailable} after retries.
class RemoteChatBackend final : public LlmBackend {
  public:
    RemoteChatBackend(std::string endpoint, std::string model, double temperature = 0.0,
                      int max_tokens = 2048, std::string api_key_env = "", int max_retries = 3);
    std::string id() const override { return "remote:" + model_; }
    std::string complete_text(const Prompt& prompt) override;

  private:
    std::string endpoint_;
    std::string model_;
    double temperature_;
    int max_tokens_;
    std::string api_key_env_;
    int max_retries_;
};

/// Deterministic stand-in: maps request digests to recorded responses from a
/// JSON-lines fixture ({"request_digest": ..., "response_text": ...}).
/// Unknown digests raise Error{ReplayMiss} naming the digest.
class ReplayBackend final : public LlmBackend {
  public:
    explicit ReplayBackend(const std::filesystem::path& fixture_file);
    std::string id() const override { return "replay"; }
    std::string complete_text(const Prompt& prompt) override;
    std::size_t size() const { return responses_.size(); }

  private:
    std::map<std::string, std::string> responses_;
};

/// Wraps another backend and appends every new (digest, response) pair to a
/// JSON-lines fixture file, so a later ReplayBackend can stand in for it.
class RecordBackend final : public LlmBackend {
  public:
    RecordBackend(LlmBackend& inner, std::filesystem::path out_file);
    std::string id() const override { return inner_.id(); }
    std::string complete_text(const Prompt& prompt) override;

  private:
    LlmBackend& inner_;
    std::filesystem::path out_file_;
    std::map<std::string, std::string> seen_;
};

/// Runs the prompt through the backend and stamps the response with the
/// backend id and request digest.
LlmResponse complete(const Prompt& prompt, LlmBackend& backend);

/// Extracts the first fenced or heuristically delimited rule block; remaining
/// prose becomes analysis_text; optional "confidence/maliciousness/risk:
/// <float>" lines (outside the rule block) are parsed into scores. Throws
/// Error{NoRuleFound} when no rule block can be located.
RuleDraft parse_rule_output(const LlmResponse& response, rules::RuleFormat format);

}  // namespace rulegen::llm
