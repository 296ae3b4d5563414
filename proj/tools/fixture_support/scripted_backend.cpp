// SPDX-License-Identifier: Apache-2.0
#include "fixture_support/scripted_backend.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <set>

#include "rulegen/strutil.hpp"
#include "rulegen/yara.hpp"

namespace rulegen::fixtures {

using llm::Prompt;
using llm::Stage;
using rules::RuleFormat;

namespace {

constexpr std::size_t kMinIndicatorLen = 6;
constexpr std::size_t kMaxStrings = 4;

bool ident_start(unsigned char c) {
    return std::isalpha(c) || c == '_';
}

bool ident_char(unsigned char c) {
    return std::isalnum(c) || c == '_';
}

// dotted identifier chains ("socket.gethostname") and quoted literals
std::set<std::string> indicators_of(const std::string& text) {
    std::set<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (c == '"' || c == '\'') {
            char quote = text[i];
            std::size_t end = i + 1;
            while (end < text.size() && text[end] != quote && text[end] != '\n') {
                if (text[end] == '\\') {
                    ++end;
                }
                ++end;
            }
            if (end < text.size() && text[end] == quote) {
                std::string literal = text.substr(i + 1, end - i - 1);
                if (literal.size() >= kMinIndicatorLen) {
                    out.insert(literal);
                }
                i = end + 1;
                continue;
            }
            ++i;
            continue;
        }
        if (ident_start(c)) {
            std::size_t end = i + 1;
            bool has_dot = false;
            while (end < text.size()) {
                if (ident_char(static_cast<unsigned char>(text[end]))) {
                    ++end;
                } else if (text[end] == '.' && end + 1 < text.size() &&
                           ident_start(static_cast<unsigned char>(text[end + 1]))) {
                    has_dot = true;
                    ++end;
                } else {
                    break;
                }
            }
            std::string chain = text.substr(i, end - i);
            if (has_dot && chain.size() >= kMinIndicatorLen) {
                out.insert(chain);
            }
            i = end;
            continue;
        }
        ++i;
    }
    return out;
}

std::vector<std::string> split_samples(const std::string& user_text) {
    std::vector<std::string> samples;
    std::size_t pos = 0;
    while (true) {
        std::size_t begin = user_text.find("Sample ", pos);
        if (begin == std::string::npos) {
            break;
        }
        std::size_t colon = user_text.find(':', begin);
        if (colon == std::string::npos) {
            break;
        }
        std::size_t next = user_text.find("\n\nSample ", colon);
        std::size_t fewshot = user_text.find("\n\nFew Shot:", colon);
        std::size_t end = std::min(next == std::string::npos ? user_text.size() : next,
                                   fewshot == std::string::npos ? user_text.size() : fewshot);
        samples.push_back(user_text.substr(colon + 1, end - colon - 1));
        pos = end;
    }
    return samples;
}

std::string regex_escape(const std::string& raw) {
    static const std::string meta = R"(\^$.|?*+()[]{})";
    std::string out;
    for (char c : raw) {
        if (meta.find(c) != std::string::npos) {
            out.push_back('\\');
        }
        out.push_back(c);
    }
    return out;
}

std::string yaml_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out.push_back('\\');
        }
        out.push_back(c);
    }
    out += "\"";
    return out;
}

// metadata prompts carry one JSON sample; indicators come from its fields
std::vector<std::string> metadata_indicators(const std::string& sample) {
    std::size_t brace = sample.find('{');
    if (brace == std::string::npos) {
        return {};
    }
    nlohmann::json doc = nlohmann::json::parse(sample.substr(brace), nullptr, false);
    if (doc.is_discarded()) {
        return {};
    }
    std::vector<std::string> out;
    std::string name = doc.value("name", "");
    std::string version = doc.value("version", "");
    if (!name.empty()) {
        out.push_back("name='" + name + "'");
    }
    if (!version.empty()) {
        out.push_back("version='" + version + "'");
    }
    if (doc.contains("dependencies")) {
        for (const auto& dep : doc["dependencies"]) {
            std::string text = dep.get<std::string>();
            std::size_t space = text.find(' ');
            out.push_back(space == std::string::npos ? text : text.substr(0, space));
        }
    }
    return out;
}

std::string score_lines(const std::string& digest) {
    auto nibble = [&](std::size_t i) { return static_cast<unsigned>(digest[i] % 4); };
    double confidence = 0.80 + 0.05 * nibble(0);
    double maliciousness = 0.55 + 0.10 * nibble(1);
    double risk = 0.30 + 0.15 * nibble(2);
    char buf[96];
    std::snprintf(buf, sizeof(buf), "confidence: %.2f\nmaliciousness: %.2f\nrisk: %.2f\n",
                  confidence, maliciousness, risk);
    return buf;
}

std::string craft_yara(const std::string& digest, const std::vector<std::string>& indicators) {
    std::string name = "auto_" + digest.substr(0, 8);
    std::string out = "rule " + name + "\n{\n    meta:\n";
    out += "        description = \"Shared indicators from clustered samples\"\n";
    out += "        generator = \"craft\"\n";
    out += "    strings:\n";
    for (std::size_t i = 0; i < indicators.size(); ++i) {
        out += "        $s" + std::to_string(i) + " = \"" + yara::escape_literal(indicators[i]) +
               "\"\n";
    }
    out += "    condition:\n";
    out += indicators.size() >= 2 ? "        all of them\n" : "        any of them\n";
    out += "}";
    return out;
}

std::string craft_semgrep(const std::string& digest, const std::vector<std::string>& indicators) {
    std::string id = "auto-" + digest.substr(0, 8);
    std::string out = "rules:\n";
    out += "  - id: " + id + "\n";
    out += "    message: \"Shared indicators from clustered samples\"\n";
    out += "    languages: [python]\n";
    out += "    severity: ERROR\n";
    if (indicators.size() == 1) {
        out += "    pattern-regex: " + yaml_quote(regex_escape(indicators[0])) + "\n";
    } else {
        out += "    pattern-either:\n";
        for (const auto& indicator : indicators) {
            out += "      - pattern-regex: " + yaml_quote(regex_escape(indicator)) + "\n";
        }
    }
    return out;
}

std::string extract_rule_block(const std::string& user_text, RuleFormat format) {
    if (format == RuleFormat::yara) {
        std::size_t pos = user_text.find("rule ");
        if (pos == std::string::npos) {
            return {};
        }
        long depth = 0;
        std::size_t i = user_text.find('{', pos);
        if (i == std::string::npos) {
            return {};
        }
        for (; i < user_text.size(); ++i) {
            if (user_text[i] == '{') {
                ++depth;
            } else if (user_text[i] == '}') {
                --depth;
                if (depth == 0) {
                    return user_text.substr(pos, i - pos + 1);
                }
            }
        }
        return {};
    }
    std::size_t pos = user_text.find("rules:");
    if (pos == std::string::npos) {
        return {};
    }
    // extend over following indented / list-item lines
    std::size_t end = user_text.find('\n', pos);
    if (end == std::string::npos) {
        return user_text.substr(pos);
    }
    while (end + 1 < user_text.size()) {
        char first = user_text[end + 1];
        if (first != ' ' && first != '\t' && first != '-') {
            break;
        }
        std::size_t next_end = user_text.find('\n', end + 1);
        if (next_end == std::string::npos) {
            end = user_text.size();
            break;
        }
        end = next_end;
    }
    return user_text.substr(pos, end - pos);
}

}  // namespace

std::vector<std::string> ScriptedBackend::shared_indicators(
    const std::vector<std::string>& samples) {
    if (samples.empty()) {
        return {};
    }
    std::set<std::string> shared = indicators_of(samples[0]);
    for (std::size_t i = 1; i < samples.size(); ++i) {
        std::set<std::string> other = indicators_of(samples[i]);
        std::set<std::string> both;
        std::set_intersection(shared.begin(), shared.end(), other.begin(), other.end(),
                              std::inserter(both, both.begin()));
        shared = std::move(both);
    }
    std::vector<std::string> ranked(shared.begin(), shared.end());
    std::sort(ranked.begin(), ranked.end(), [](const std::string& a, const std::string& b) {
        return a.size() != b.size() ? a.size() > b.size() : a < b;
    });
    if (ranked.size() > kMaxStrings) {
        ranked.resize(kMaxStrings);
    }
    return ranked;
}

const char* ScriptedBackend::broken_rule_text() {
    return "rule broken_fix\n{\n    meta:\n        note = \"x\"\n    strings:\n"
           "        $a = \"foo\"\n    condition:\n        $a and $b\n}";
}

std::string ScriptedBackend::complete_text(const Prompt& prompt) {
    std::string digest = llm::request_digest(prompt);
    if (mode_ == Mode::stubborn) {
        return "The rule still needs work.\n\n```\n" + std::string(broken_rule_text()) + "\n```\n";
    }
    switch (prompt.stage) {
        case Stage::craft: {
            auto samples = split_samples(prompt.user_text);
            std::vector<std::string> indicators;
            bool metadata = !samples.empty() &&
                            samples[0].find("Package metadata (JSON):") != std::string::npos;
            if (metadata) {
                indicators = metadata_indicators(samples[0]);
            } else {
                indicators = shared_indicators(samples);
            }
            if (indicators.empty()) {
                return "Analysis Result:\nNo shared indicators found across the samples.\n";
            }
            std::string rule = prompt.rule_format == RuleFormat::yara
                                   ? craft_yara(digest, indicators)
                                   : craft_semgrep(digest, indicators);
            std::string out = "Analysis Result:\nThe samples share distinctive indicators: ";
            for (std::size_t i = 0; i < indicators.size(); ++i) {
                if (i) {
                    out += ", ";
                }
                out += indicators[i];
            }
            out += ".\n\n```\n" + rule + "\n```\n\n" + score_lines(digest);
            return out;
        }
        case Stage::refine: {
            std::string rule = extract_rule_block(prompt.user_text, prompt.rule_format);
            if (rule.empty()) {
                return "No rule found to optimize.\n";
            }
            return "Reviewed: the rule aligns with the analysis; structure kept.\n\n```\n" + rule +
                   "\n```\n\n" + score_lines(digest);
        }
        case Stage::fix: {
            std::string rule = extract_rule_block(prompt.user_text, prompt.rule_format);
            if (rule.empty()) {
                return "Unable to locate the rule.\n";
            }
            return "Applied the reported corrections.\n\n```\n" + rule + "\n```\n";
        }
    }
    return "";
}

}  // namespace rulegen::fixtures
