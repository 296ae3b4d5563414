// SPDX-License-Identifier: Apache-2.0
#include "rulegen/semgrep.hpp"

#include <yaml-cpp/yaml.h>

#include "rulegen/rex.hpp"
#include "rulegen/yara.hpp"

namespace rulegen::semgrep {

using rules::CompileError;
using rules::ErrCode;
using rules::Rule;
using rules::RuleFormat;
using rules::SemgrepClause;
using rules::SemgrepRule;
using rules::make_error;

namespace {

bool parse_clause(const YAML::Node& node, std::vector<SemgrepClause>& clauses,
                  std::vector<CompileError>& errors) {
    if (!node.IsMap()) {
        errors.push_back(make_error(ErrCode::yaml_structure, "clause entries must be maps"));
        return false;
    }
    if (node["pattern"] && node["pattern"].IsScalar()) {
        clauses.push_back({SemgrepClause::Kind::pattern, node["pattern"].as<std::string>()});
        return true;
    }
    if (node["pattern-regex"] && node["pattern-regex"].IsScalar()) {
        clauses.push_back(
            {SemgrepClause::Kind::pattern_regex, node["pattern-regex"].as<std::string>()});
        return true;
    }
    errors.push_back(make_error(ErrCode::yaml_structure,
                                "unsupported clause; expected pattern or pattern-regex"));
    return false;
}

}  // namespace

CheckResult check_semgrep(std::string_view text) {
    std::vector<CompileError> errors;
    std::string sanitized = yara::check_encoding(text, errors);

    YAML::Node doc;
    try {
        doc = YAML::Load(sanitized);
    } catch (const YAML::Exception& e) {
        errors.push_back(make_error(ErrCode::yaml_structure, e.what()));
        return errors;
    }
    if (!doc.IsMap() || !doc["rules"]) {
        errors.push_back(make_error(ErrCode::yaml_structure, "missing top-level 'rules' list"));
        return errors;
    }
    const YAML::Node rules_node = doc["rules"];
    if (!rules_node.IsSequence() || rules_node.size() == 0) {
        errors.push_back(make_error(ErrCode::yaml_structure, "'rules' must be a non-empty list"));
        return errors;
    }
    if (rules_node.size() > 1) {
        errors.push_back(
            make_error(ErrCode::yaml_structure, "multiple rule entries; expected exactly one"));
        return errors;
    }
    const YAML::Node entry = rules_node[0];
    if (!entry.IsMap()) {
        errors.push_back(make_error(ErrCode::yaml_structure, "rule entry must be a map"));
        return errors;
    }

    SemgrepRule rule;
    auto scalar = [&](const char* key) -> std::string {
        if (entry[key] && entry[key].IsScalar()) {
            return entry[key].as<std::string>();
        }
        return {};
    };
    rule.id = scalar("id");
    rule.message = scalar("message");
    rule.severity = scalar("severity");
    if (rule.id.empty()) {
        errors.push_back(make_error(ErrCode::yaml_structure, "missing id"));
    }
    if (rule.message.empty()) {
        errors.push_back(make_error(ErrCode::yaml_structure, "missing message"));
    }
    if (rule.severity.empty()) {
        errors.push_back(make_error(ErrCode::yaml_structure, "missing severity"));
    }
    if (entry["languages"] && entry["languages"].IsSequence() && entry["languages"].size() > 0) {
        for (const auto& lang : entry["languages"]) {
            if (lang.IsScalar()) {
                rule.languages.push_back(lang.as<std::string>());
            }
        }
    }
    if (rule.languages.empty()) {
        errors.push_back(make_error(ErrCode::yaml_structure, "missing languages"));
    }

    int clause_keys = 0;
    for (const char* key : {"pattern", "patterns", "pattern-either", "pattern-regex"}) {
        if (entry[key]) {
            ++clause_keys;
        }
    }
    if (clause_keys != 1) {
        errors.push_back(make_error(
            ErrCode::yaml_structure,
            "expected exactly one of pattern / patterns / pattern-either / pattern-regex"));
        return errors;
    }
    if (entry["pattern"]) {
        if (!entry["pattern"].IsScalar()) {
            errors.push_back(make_error(ErrCode::yaml_structure, "pattern must be a string"));
            return errors;
        }
        rule.mode = SemgrepRule::Mode::single;
        rule.clauses.push_back({SemgrepClause::Kind::pattern, entry["pattern"].as<std::string>()});
    } else if (entry["pattern-regex"]) {
        if (!entry["pattern-regex"].IsScalar()) {
            errors.push_back(make_error(ErrCode::yaml_structure, "pattern-regex must be a string"));
            return errors;
        }
        rule.mode = SemgrepRule::Mode::single;
        rule.clauses.push_back(
            {SemgrepClause::Kind::pattern_regex, entry["pattern-regex"].as<std::string>()});
    } else {
        const char* key = entry["patterns"] ? "patterns" : "pattern-either";
        rule.mode = entry["patterns"] ? SemgrepRule::Mode::all_of : SemgrepRule::Mode::any_of;
        const YAML::Node list = entry[key];
        if (!list.IsSequence() || list.size() == 0) {
            errors.push_back(make_error(ErrCode::yaml_structure,
                                        std::string(key) + " must be a non-empty list"));
            return errors;
        }
        for (const auto& clause : list) {
            if (!parse_clause(clause, rule.clauses, errors)) {
                return errors;
            }
        }
    }

    for (const auto& clause : rule.clauses) {
        if (clause.kind != SemgrepClause::Kind::pattern_regex) {
            continue;
        }
        try {
            rex::Pattern::compile(clause.value);
        } catch (const rex::ParseError& e) {
            errors.push_back(make_error(ErrCode::bad_regex, std::string(e.what())));
        }
    }
    if (!errors.empty()) {
        return errors;
    }

    Rule out;
    out.format = RuleFormat::semgrep;
    out.name = rule.id;
    out.text = std::string(text);
    out.semgrep = std::move(rule);
    return out;
}

namespace {

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

}  // namespace

std::string to_text(const SemgrepRule& rule) {
    std::string out = "rules:\n";
    out += "  - id: " + rule.id + "\n";
    out += "    message: " + yaml_quote(rule.message) + "\n";
    out += "    languages: [";
    for (std::size_t i = 0; i < rule.languages.size(); ++i) {
        if (i) {
            out += ", ";
        }
        out += rule.languages[i];
    }
    out += "]\n";
    out += "    severity: " + rule.severity + "\n";
    if (rule.mode == SemgrepRule::Mode::single) {
        const auto& clause = rule.clauses.front();
        out += clause.kind == SemgrepClause::Kind::pattern ? "    pattern: " : "    pattern-regex: ";
        out += yaml_quote(clause.value) + "\n";
    } else {
        out += rule.mode == SemgrepRule::Mode::all_of ? "    patterns:\n" : "    pattern-either:\n";
        for (const auto& clause : rule.clauses) {
            out += clause.kind == SemgrepClause::Kind::pattern ? "      - pattern: "
                                                               : "      - pattern-regex: ";
            out += yaml_quote(clause.value) + "\n";
        }
    }
    return out;
}

}  // namespace rulegen::semgrep
