// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <random>

#include "fixture_support/scripted_backend.hpp"
#include "rulegen/llm.hpp"
#include "rulegen/util.hpp"
#include "rulegen/validator.hpp"

using namespace rulegen;
using fixtures::ScriptedBackend;
using rules::Rule;
using rules::RuleFormat;

namespace {

std::filesystem::path temp_dir(const char* tag) {
    auto dir = std::filesystem::temp_directory_path() / "rulegen-test" / tag;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

llm::RuleDraft draft_of(std::string rule_text, RuleFormat format = RuleFormat::yara) {
    llm::RuleDraft draft;
    draft.rule_text = std::move(rule_text);
    draft.analysis_text = "fixture analysis";
    draft.rule_format = format;
    draft.provenance.origin = "cluster:0";
    return draft;
}

/// wraps a backend and keeps every prompt it saw
struct CapturingBackend : llm::LlmBackend {
    llm::LlmBackend* inner;
    std::vector<llm::Prompt> prompts;
    explicit CapturingBackend(llm::LlmBackend& b) : inner(&b) {}
    std::string id() const override { return inner->id(); }
    std::string complete_text(const llm::Prompt& p) override {
        prompts.push_back(p);
        return inner->complete_text(p);
    }
};

std::size_t count_blocks(const std::string& text) {
    std::size_t n = 0;
    std::size_t pos = 0;
    while ((pos = text.find("Error message:", pos)) != std::string::npos) {
        ++n;
        ++pos;
    }
    return n;
}

}  // namespace

TEST_CASE("AgentMemory never exceeds two entries") {
    std::mt19937 rng(3);
    for (int round = 0; round < 50; ++round) {
        validate::AgentMemory memory(2);
        std::size_t pushes = rng() % 10;
        for (std::size_t i = 0; i < pushes; ++i) {
            memory.push({{rules::ErrCode::syntax, "e" + std::to_string(i)}});
            CHECK(memory.size() <= 2);
        }
        if (pushes >= 2) {
            // newest last
            CHECK(memory.recent().back().front().message == "e" + std::to_string(pushes - 1));
        }
    }
}

TEST_CASE("compile_rule dispatches by format") {
    auto good = validate::compile_rule(
        "rule ok { meta: d = \"x\" strings: $a = \"abc\" condition: $a }", RuleFormat::yara);
    CHECK(std::holds_alternative<Rule>(good));

    auto sg = validate::compile_rule(
        "rules:\n  - id: a\n    message: m\n    languages: [python]\n    severity: E\n"
        "    pattern: \"x\"\n",
        RuleFormat::semgrep);
    CHECK(std::holds_alternative<Rule>(sg));
}

TEST_CASE("align: immediate success stamps attempt 0") {
    ScriptedBackend backend;
    auto templates = llm::PromptTemplates::builtin();
    auto result = validate::align_rule(
        draft_of("rule ok { meta: d = \"x\" strings: $a = \"abc\" condition: $a }"), backend,
        templates);
    REQUIRE(std::holds_alternative<Rule>(result));
    CHECK(std::get<Rule>(result).provenance.attempts == 0);
    CHECK(std::get<Rule>(result).provenance.origin == "cluster:0");
}

TEST_CASE("align: replay fixture corrects the rule on attempt 1") {
    auto dir = temp_dir("align-fix");
    auto templates = llm::PromptTemplates::builtin();
    std::string broken = "rule fixme { meta: d = \"x\" strings: $a = \"abc\" condition: $a and $b }";
    std::string corrected =
        "rule fixme { meta: d = \"x\" strings: $a = \"abc\" condition: $a }";

    // author the bad -> good fixture: the first fix prompt's digest maps to a
    // response carrying the corrected rule
    auto outcome = validate::compile_rule(broken, RuleFormat::yara);
    REQUIRE(std::holds_alternative<std::vector<rules::CompileError>>(outcome));
    auto errors = std::get<std::vector<rules::CompileError>>(outcome);
    llm::Prompt fix_prompt =
        llm::build_fix_prompt("fixture analysis", broken, {errors}, RuleFormat::yara, templates);
    std::string line = std::string("{\"request_digest\": \"") + llm::request_digest(fix_prompt) +
                       "\", \"response_text\": \"```\\n" + corrected + "\\n```\"}\n";
    write_file(dir / "fix.jsonl", line);

    llm::ReplayBackend replay(dir / "fix.jsonl");
    auto result = validate::align_rule(draft_of(broken), replay, templates);
    REQUIRE(std::holds_alternative<Rule>(result));
    const Rule& rule = std::get<Rule>(result);
    CHECK(rule.provenance.attempts == 1);
    CHECK(rule.name == "fixme");
}

TEST_CASE("align: unfixable rule fails after exactly five attempts with <=2 error blocks") {
    ScriptedBackend stubborn(ScriptedBackend::Mode::stubborn);
    CapturingBackend capture(stubborn);
    auto templates = llm::PromptTemplates::builtin();
    auto result = validate::align_rule(draft_of(ScriptedBackend::broken_rule_text()), capture,
                                       templates);
    REQUIRE(std::holds_alternative<validate::AlignmentFailure>(result));
    const auto& failure = std::get<validate::AlignmentFailure>(result);
    CHECK(failure.attempts == 5);
    CHECK(failure.history.size() == 6);  // initial compile + five fix attempts
    CHECK(capture.prompts.size() == 5);
    for (const auto& prompt : capture.prompts) {
        CHECK(prompt.stage == llm::Stage::fix);
        CHECK(count_blocks(prompt.user_text) <= 2);
    }
    // memory keeps two lists from the second fix prompt on
    CHECK(count_blocks(capture.prompts.at(0).user_text) == 1);
    CHECK(count_blocks(capture.prompts.at(1).user_text) == 2);
    CHECK(count_blocks(capture.prompts.at(4).user_text) == 2);
}

TEST_CASE("align: a response with no rule keeps the text and spends the attempt") {
    struct Silent : llm::LlmBackend {
        std::string id() const override { return "silent"; }
        std::string complete_text(const llm::Prompt&) override { return "no rule here"; }
    };
    Silent silent;
    auto templates = llm::PromptTemplates::builtin();
    auto result =
        validate::align_rule(draft_of(ScriptedBackend::broken_rule_text()), silent, templates);
    REQUIRE(std::holds_alternative<validate::AlignmentFailure>(result));
    CHECK(std::get<validate::AlignmentFailure>(result).attempts == 5);
}

TEST_CASE("external compiler diagnostics merge when configured") {
    auto dir = temp_dir("external");
    auto script = dir / "fakecheck.sh";
    write_file(script, "#!/bin/sh\necho 'refused: policy says no'\nexit 1\n");
    std::filesystem::permissions(script, std::filesystem::perms::owner_all);

    validate::ValidatorConfig cfg;
    cfg.external_yara_cmd = script.string() + " {file}";
    auto outcome = validate::compile_rule(
        "rule ok { meta: d = \"x\" strings: $a = \"abc\" condition: $a }", RuleFormat::yara, cfg);
    REQUIRE(std::holds_alternative<std::vector<rules::CompileError>>(outcome));
    const auto& errors = std::get<std::vector<rules::CompileError>>(outcome);
    REQUIRE(errors.size() == 1);
    CHECK(errors[0].message.find("refused: policy says no") != std::string::npos);

    // passing external compiler keeps the built-in acceptance
    write_file(script, "#!/bin/sh\nexit 0\n");
    auto ok = validate::compile_rule(
        "rule ok { meta: d = \"x\" strings: $a = \"abc\" condition: $a }", RuleFormat::yara, cfg);
    CHECK(std::holds_alternative<Rule>(ok));
}

TEST_CASE("render_rule_file normalizes line endings") {
    validate::ValidatorConfig lf;
    CHECK(validate::render_rule_file("a\r\nb", lf) == "a\nb\n");
    validate::ValidatorConfig crlf;
    crlf.crlf_output = true;
    CHECK(validate::render_rule_file("a\nb", crlf) == "a\r\nb\r\n");
}
