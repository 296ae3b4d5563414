// SPDX-License-Identifier: Apache-2.0
#include "rulegen/validator.hpp"

#include <array>
#include <cstdio>
#include <optional>

#include "rulegen/digest.hpp"
#include "rulegen/semgrep.hpp"
#include "rulegen/strutil.hpp"
#include "rulegen/util.hpp"
#include "rulegen/yara.hpp"

namespace rulegen::validate {

using rules::CompileError;
using rules::ErrCode;
using rules::Rule;
using rules::RuleFormat;

namespace {

// Runs an external compiler over the rule text; returns its diagnostic when
// the exit status is non-zero.
std::optional<CompileError> run_external(const std::string& cmd_template, std::string_view text) {
    std::filesystem::path tmp =
        std::filesystem::temp_directory_path() / ("rulegen-" + sha256_hex(text).substr(0, 16));
    write_file(tmp, text);
    std::string cmd = cmd_template;
    std::size_t slot = cmd.find("{file}");
    if (slot != std::string::npos) {
        cmd.replace(slot, 6, tmp.string());
    } else {
        cmd += " " + tmp.string();
    }
    cmd += " 2>&1";
    std::string output;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        std::filesystem::remove(tmp);
        return rules::make_error(ErrCode::syntax, "external compiler could not be started");
    }
    std::array<char, 512> buf;
    while (fgets(buf.data(), static_cast<int>(buf.size()), pipe)) {
        output += buf.data();
    }
    int status = pclose(pipe);
    std::filesystem::remove(tmp);
    if (status == 0) {
        return std::nullopt;
    }
    std::string first_line = output.substr(0, output.find('\n'));
    return rules::make_error(ErrCode::syntax, "external compiler: " + trim(first_line));
}

}  // namespace

CompileOutcome compile_rule(std::string_view text, RuleFormat format, const ValidatorConfig& cfg) {
    CompileOutcome outcome = format == RuleFormat::yara
                                 ? CompileOutcome(yara::compile_yara(text))
                                 : CompileOutcome(semgrep::check_semgrep(text));
    if (!std::holds_alternative<Rule>(outcome)) {
        return outcome;
    }
    const std::string& external =
        format == RuleFormat::yara ? cfg.external_yara_cmd : cfg.external_semgrep_cmd;
    if (!external.empty()) {
        if (auto diag = run_external(external, text)) {
            return std::vector<CompileError>{*diag};
        }
    }
    return outcome;
}

AlignResult align_rule(const llm::RuleDraft& draft, llm::LlmBackend& backend,
                       const llm::PromptTemplates& templates, const ValidatorConfig& cfg) {
    std::string rule_text = draft.rule_text;
    std::string analysis = draft.analysis_text;
    rules::RuleScores scores = draft.scores;

    auto stamp = [&](Rule rule, int attempts) {
        rule.provenance = draft.provenance;
        rule.provenance.attempts = attempts;
        rule.scores = scores;
        return rule;
    };

    CompileOutcome outcome = compile_rule(rule_text, draft.rule_format, cfg);
    if (std::holds_alternative<Rule>(outcome)) {
        return stamp(std::get<Rule>(std::move(outcome)), 0);
    }

    AgentMemory memory(cfg.error_memory);
    std::vector<std::vector<CompileError>> history;
    history.push_back(std::get<std::vector<CompileError>>(outcome));
    memory.push(history.back());

    for (int attempt = 1; attempt <= cfg.max_fix_attempts; ++attempt) {
        memory.attempt = attempt;
        llm::Prompt prompt = llm::build_fix_prompt(analysis, rule_text, memory.recent(),
                                                   draft.rule_format, templates);
        llm::LlmResponse response = llm::complete(prompt, backend);
        try {
            llm::RuleDraft fixed = llm::parse_rule_output(response, draft.rule_format);
            rule_text = fixed.rule_text;
            if (fixed.scores.confidence) {
                scores.confidence = fixed.scores.confidence;
            }
            if (fixed.scores.maliciousness) {
                scores.maliciousness = fixed.scores.maliciousness;
            }
            if (fixed.scores.risk) {
                scores.risk = fixed.scores.risk;
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoRuleFound) {
                throw;
            }
            // no rule in the response: the attempt is spent, text unchanged
        }
        outcome = compile_rule(rule_text, draft.rule_format, cfg);
        if (std::holds_alternative<Rule>(outcome)) {
            return stamp(std::get<Rule>(std::move(outcome)), attempt);
        }
        history.push_back(std::get<std::vector<CompileError>>(outcome));
        memory.push(history.back());
    }

    AlignmentFailure failure;
    failure.draft = draft;
    failure.attempts = cfg.max_fix_attempts;
    failure.history = std::move(history);
    failure.last_rule_text = rule_text;
    return failure;
}

std::string render_rule_file(std::string_view text, const ValidatorConfig& cfg) {
    std::string out;
    out.reserve(text.size() + 1);
    for (char c : text) {
        if (c == '\r') {
            continue;  // normalize first
        }
        if (c == '\n' && cfg.crlf_output) {
            out += "\r\n";
        } else {
            out.push_back(c);
        }
    }
    if (out.empty() || out.back() != '\n') {
        out += cfg.crlf_output ? "\r\n" : "\n";
    }
    return out;
}

}  // namespace rulegen::validate
