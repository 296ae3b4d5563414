// SPDX-License-Identifier: Apache-2.0
#include "rulegen/llm.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <nlohmann/json.hpp>
#include <thread>

#include "rulegen/digest.hpp"
#include "rulegen/embedded_data.hpp"
#include "rulegen/http.hpp"
#include "rulegen/strutil.hpp"
#include "rulegen/util.hpp"

namespace rulegen::llm {

using nlohmann::json;
using rules::RuleFormat;

const char* to_string(Stage s) {
    switch (s) {
        case Stage::craft: return "craft";
        case Stage::refine: return "refine";
        case Stage::fix: return "fix";
    }
    return "unknown";
}

namespace {

constexpr std::size_t kUnitCharCap = 4000;
constexpr std::size_t kMaxCraftUnits = 4;
constexpr std::size_t kErrorMemory = 2;

std::string format_name(RuleFormat format) {
    return format == RuleFormat::yara ? "YARA" : "SemGrep";
}

std::string fill(std::string text, std::string_view slot, std::string_view value) {
    std::string needle = "{" + std::string(slot) + "}";
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        text.replace(pos, needle.size(), value);
        pos += value.size();
    }
    return text;
}

std::string load_or(const std::filesystem::path& dir, const char* name, std::string fallback) {
    std::filesystem::path p = dir / name;
    if (std::filesystem::exists(p)) {
        return read_file(p);
    }
    return fallback;
}

}  // namespace

PromptTemplates PromptTemplates::builtin() {
    PromptTemplates t;
    t.craft_system = std::string(data::craft_system_template());
    t.craft_user = std::string(data::craft_user_template());
    t.refine_system = std::string(data::refine_system_template());
    t.refine_user = std::string(data::refine_user_template());
    t.fix_system = std::string(data::fix_system_template());
    t.fix_user = std::string(data::fix_user_template());
    t.fewshot_yara = std::string(data::fewshot_yara());
    t.fewshot_semgrep = std::string(data::fewshot_semgrep());
    return t;
}

PromptTemplates PromptTemplates::from_dir(const std::filesystem::path& dir) {
    PromptTemplates t = builtin();
    t.craft_system = load_or(dir, "craft_system.txt", t.craft_system);
    t.craft_user = load_or(dir, "craft_user.txt", t.craft_user);
    t.refine_system = load_or(dir, "refine_system.txt", t.refine_system);
    t.refine_user = load_or(dir, "refine_user.txt", t.refine_user);
    t.fix_system = load_or(dir, "fix_system.txt", t.fix_system);
    t.fix_user = load_or(dir, "fix_user.txt", t.fix_user);
    t.fewshot_yara = load_or(dir, "fewshot_yara.txt", t.fewshot_yara);
    t.fewshot_semgrep = load_or(dir, "fewshot_semgrep.txt", t.fewshot_semgrep);
    return t;
}

std::string request_digest(const Prompt& prompt) {
    std::string canonical = "v1|";
    canonical += to_string(prompt.stage);
    canonical += '|';
    canonical += rules::to_string(prompt.rule_format);
    canonical += '|';
    canonical += std::to_string(prompt.system_text.size());
    canonical += ':';
    canonical += prompt.system_text;
    canonical += '|';
    canonical += std::to_string(prompt.user_text.size());
    canonical += ':';
    canonical += prompt.user_text;
    return sha256_hex(canonical);
}

Prompt build_craft_prompt(const std::vector<seg::BasicUnit>& units, RuleFormat format,
                          const PromptTemplates& templates) {
    if (units.empty()) {
        throw Error(ErrorCode::EmptyInput, "craft prompt needs at least one unit");
    }
    if (units.size() > kMaxCraftUnits) {
        throw Error(ErrorCode::UnitTooLarge,
                    "craft prompt takes at most " + std::to_string(kMaxCraftUnits) + " units");
    }
    std::string samples;
    for (std::size_t i = 0; i < units.size(); ++i) {
        if (units[i].char_len > kUnitCharCap) {
            throw Error(ErrorCode::UnitTooLarge,
                        "unit of " + std::to_string(units[i].char_len) + " chars exceeds " +
                            std::to_string(kUnitCharCap));
        }
        if (i) {
            samples += "\n\n";
        }
        samples += "Sample " + std::to_string(i + 1) + ":\n" + units[i].text;
    }
    Prompt prompt;
    prompt.stage = Stage::craft;
    prompt.rule_format = format;
    prompt.few_shot = templates.few_shot(format);
    prompt.system_text = fill(templates.craft_system, "format", format_name(format));
    prompt.user_text = fill(fill(templates.craft_user, "samples", samples), "few_shot",
                            prompt.few_shot);
    return prompt;
}

Prompt build_craft_prompt(const corpus::PackageMetadata& meta,
                          const std::vector<seg::MetadataFlag>& flags, RuleFormat format,
                          const PromptTemplates& templates) {
    json deps = json::array();
    for (const auto& d : meta.dependencies) {
        deps.push_back(d.name + (d.version_spec.empty() ? "" : " " + d.version_spec));
    }
    json flag_list = json::array();
    for (const auto& f : flags) {
        flag_list.push_back({{"kind", seg::to_string(f.kind)}, {"evidence", f.evidence}});
    }
    json block{{"name", meta.name},
               {"version", meta.version},
               {"description", meta.description},
               {"author", meta.author},
               {"author_email", meta.author_email},
               {"dependencies", deps},
               {"urls", meta.urls},
               {"audit_flags", flag_list}};
    seg::BasicUnit unit;
    unit.text = "Package metadata (JSON):\n" + block.dump(2);
    unit.kind = seg::UnitKind::module_prelude;
    unit.char_len = unit.text.size();
    Prompt prompt = build_craft_prompt(std::vector<seg::BasicUnit>{unit}, format, templates);
    return prompt;
}

Prompt build_refine_prompt(const std::string& analysis, const std::string& rule, RuleFormat format,
                           const PromptTemplates& templates) {
    if (trim(analysis).empty() || trim(rule).empty()) {
        throw Error(ErrorCode::EmptyInput, "refine prompt needs a non-empty analysis and rule");
    }
    Prompt prompt;
    prompt.stage = Stage::refine;
    prompt.rule_format = format;
    prompt.system_text = fill(templates.refine_system, "format", format_name(format));
    prompt.user_text = fill(fill(templates.refine_user, "analysis", analysis), "rule", rule);
    return prompt;
}

Prompt build_fix_prompt(const std::string& analysis, const std::string& rule,
                        const std::vector<std::vector<rules::CompileError>>& recent_errors,
                        RuleFormat format, const PromptTemplates& templates) {
    std::size_t total = 0;
    for (const auto& list : recent_errors) {
        total += list.size();
    }
    if (total == 0) {
        throw Error(ErrorCode::EmptyInput, "fix prompt needs at least one error message");
    }
    // keep only the newest two error lists (memory rule)
    std::size_t first = recent_errors.size() > kErrorMemory ? recent_errors.size() - kErrorMemory : 0;
    std::string blocks;
    for (std::size_t i = first; i < recent_errors.size(); ++i) {
        if (recent_errors[i].empty()) {
            continue;
        }
        if (!blocks.empty()) {
            blocks += "\n";
        }
        blocks += "Error message: ";
        for (std::size_t e = 0; e < recent_errors[i].size(); ++e) {
            if (e) {
                blocks += "; ";
            }
            blocks += recent_errors[i][e].message;
        }
    }
    Prompt prompt;
    prompt.stage = Stage::fix;
    prompt.rule_format = format;
    prompt.system_text = fill(templates.fix_system, "format", format_name(format));
    std::string user = fill(templates.fix_user, "errors", blocks);
    user = fill(user, "analysis", analysis.empty() ? "(none)" : analysis);
    user = fill(user, "rule", rule);
    prompt.user_text = user;
    return prompt;
}

// ---------------------------------------------------------------------------
// Backends
// ---------------------------------------------------------------------------

RemoteChatBackend::RemoteChatBackend(std::string endpoint, std::string model, double temperature,
                                     int max_tokens, std::string api_key_env, int max_retries)
    : endpoint_(std::move(endpoint)), model_(std::move(model)), temperature_(temperature),
      max_tokens_(max_tokens), api_key_env_(std::move(api_key_env)), max_retries_(max_retries) {}

std::string RemoteChatBackend::complete_text(const Prompt& prompt) {
    json body{{"model", model_},
              {"temperature", temperature_},
              {"max_tokens", max_tokens_},
              {"messages",
               json::array({json{{"role", "system"}, {"content", prompt.system_text}},
                            json{{"role", "user"}, {"content", prompt.user_text}}})}};
    std::map<std::string, std::string> headers;
    if (!api_key_env_.empty()) {
        if (const char* key = std::getenv(api_key_env_.c_str())) {
            headers["Authorization"] = std::string("Bearer ") + key;
        }
    }
    std::string payload = body.dump();
    for (int attempt = 0; attempt <= max_retries_; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(200 << (attempt - 1)));
        }
        auto response = http_post_json(endpoint_, payload, headers);
        if (!response || response->status != 200) {
            continue;
        }
        json doc = json::parse(response->body, nullptr, false);
        if (doc.is_discarded()) {
            continue;
        }
        try {
            return doc.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception&) {
            continue;
        }
    }
    throw Error(ErrorCode::BackendUnavailable, "chat service unreachable: " + endpoint_);
}

ReplayBackend::ReplayBackend(const std::filesystem::path& fixture_file) {
    std::ifstream in(fixture_file);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open replay fixture " + fixture_file.string());
    }
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            continue;
        }
        json doc = json::parse(line, nullptr, false);
        if (doc.is_discarded()) {
            throw Error(ErrorCode::IoError, "bad JSON line in replay fixture");
        }
        responses_[doc.at("request_digest").get<std::string>()] =
            doc.at("response_text").get<std::string>();
    }
}

std::string ReplayBackend::complete_text(const Prompt& prompt) {
    std::string digest = request_digest(prompt);
    auto it = responses_.find(digest);
    if (it == responses_.end()) {
        throw Error(ErrorCode::ReplayMiss, "no recorded response for digest " + digest);
    }
    return it->second;
}

RecordBackend::RecordBackend(LlmBackend& inner, std::filesystem::path out_file)
    : inner_(inner), out_file_(std::move(out_file)) {
    if (out_file_.has_parent_path()) {
        std::filesystem::create_directories(out_file_.parent_path());
    }
}

std::string RecordBackend::complete_text(const Prompt& prompt) {
    std::string digest = request_digest(prompt);
    auto it = seen_.find(digest);
    if (it != seen_.end()) {
        return it->second;
    }
    std::string text = inner_.complete_text(prompt);
    seen_[digest] = text;
    json line{{"request_digest", digest}, {"response_text", text}};
    std::ofstream out(out_file_, std::ios::app);
    out << line.dump() << "\n";
    return text;
}

LlmResponse complete(const Prompt& prompt, LlmBackend& backend) {
    LlmResponse response;
    response.request_digest = request_digest(prompt);
    response.backend_id = backend.id();
    response.text = backend.complete_text(prompt);
    return response;
}

// ---------------------------------------------------------------------------
// Response parsing
// ---------------------------------------------------------------------------

namespace {

struct Block {
    std::size_t begin = std::string::npos;  // of the content
    std::size_t end = std::string::npos;
    std::size_t outer_begin = std::string::npos;  // of the delimiters
    std::size_t outer_end = std::string::npos;
};

Block find_fenced_block(const std::string& text) {
    Block block;
    std::size_t open = text.find("```");
    if (open == std::string::npos) {
        return block;
    }
    std::size_t content = text.find('\n', open);
    if (content == std::string::npos) {
        return block;
    }
    ++content;  // skip the fence line (may carry a language tag)
    std::size_t close = text.find("```", content);
    if (close == std::string::npos) {
        return block;
    }
    block.outer_begin = open;
    block.begin = content;
    block.end = close;
    block.outer_end = std::min(text.size(), text.find('\n', close) == std::string::npos
                                                ? text.size()
                                                : text.find('\n', close) + 1);
    return block;
}

Block find_yara_block(const std::string& text) {
    Block block;
    std::size_t pos = text.find("rule ");
    while (pos != std::string::npos) {
        bool at_line_start = pos == 0 || text[pos - 1] == '\n';
        if (at_line_start) {
            break;
        }
        pos = text.find("rule ", pos + 1);
    }
    if (pos == std::string::npos) {
        return block;
    }
    std::size_t open_brace = text.find('{', pos);
    if (open_brace == std::string::npos) {
        return block;
    }
    long depth = 0;
    bool in_string = false;
    for (std::size_t i = open_brace; i < text.size(); ++i) {
        char c = text[i];
        if (in_string) {
            if (c == '\\') {
                ++i;
            } else if (c == '"' || c == '\n') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            --depth;
            if (depth == 0) {
                block.begin = block.outer_begin = pos;
                block.end = block.outer_end = i + 1;
                return block;
            }
        }
    }
    return block;
}

Block find_semgrep_block(const std::string& text) {
    Block block;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t line_end = text.find('\n', pos);
        if (line_end == std::string::npos) {
            line_end = text.size();
        }
        std::string_view line(text.data() + pos, line_end - pos);
        if (line.starts_with("rules:")) {
            std::size_t end = line_end;
            std::size_t scan = line_end == text.size() ? text.size() : line_end + 1;
            while (scan < text.size()) {
                std::size_t next_end = text.find('\n', scan);
                if (next_end == std::string::npos) {
                    next_end = text.size();
                }
                std::string_view next(text.data() + scan, next_end - scan);
                // the YAML block continues while lines are indented, empty, or list items
                if (next.empty() || next.front() == ' ' || next.front() == '\t' ||
                    next.starts_with("- ")) {
                    end = next_end;
                    scan = next_end == text.size() ? text.size() : next_end + 1;
                } else {
                    break;
                }
            }
            block.begin = block.outer_begin = pos;
            block.end = block.outer_end = end;
            return block;
        }
        pos = line_end == text.size() ? text.size() : line_end + 1;
    }
    return block;
}

void parse_score_line(std::string_view line, rules::RuleScores& scores) {
    auto try_key = [&](std::string_view key, std::optional<double>& slot) {
        if (!to_lower(trim(line)).starts_with(std::string(key))) {
            return;
        }
        std::size_t sep = line.find_first_of(":=");
        if (sep == std::string_view::npos) {
            return;
        }
        std::string value = trim(line.substr(sep + 1));
        try {
            std::size_t used = 0;
            double v = std::stod(value, &used);
            if (used == 0) {
                return;
            }
            slot = std::clamp(v, 0.0, 1.0);
        } catch (const std::exception&) {
            // lenient: malformed score lines are ignored
        }
    };
    try_key("confidence", scores.confidence);
    try_key("maliciousness", scores.maliciousness);
    try_key("risk", scores.risk);
}

}  // namespace

RuleDraft parse_rule_output(const LlmResponse& response, RuleFormat format) {
    const std::string& text = response.text;
    Block block = find_fenced_block(text);
    if (block.begin == std::string::npos) {
        block = format == RuleFormat::yara ? find_yara_block(text) : find_semgrep_block(text);
    }
    if (block.begin == std::string::npos) {
        throw Error(ErrorCode::NoRuleFound, "no rule block in response " + response.request_digest);
    }
    RuleDraft draft;
    draft.rule_format = format;
    draft.rule_text = trim(text.substr(block.begin, block.end - block.begin));
    std::string prose =
        text.substr(0, block.outer_begin) + text.substr(std::min(block.outer_end, text.size()));
    draft.analysis_text = trim(prose);
    for (const auto& line : split_lines(prose)) {
        parse_score_line(line, draft.scores);
    }
    if (draft.rule_text.empty()) {
        throw Error(ErrorCode::NoRuleFound, "empty rule block in response");
    }
    return draft;
}

}  // namespace rulegen::llm
