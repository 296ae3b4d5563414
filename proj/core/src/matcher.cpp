// SPDX-License-Identifier: Apache-2.0
#include "rulegen/matcher.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <optional>
#include <tuple>

#include "rulegen/digest.hpp"
#include "rulegen/rex.hpp"
#include "rulegen/util.hpp"

namespace rulegen::match {

using rules::CondExpr;
using rules::Rule;
using rules::RuleFormat;
using rules::SemgrepClause;
using rules::SemgrepRule;
using rules::YaraString;

namespace {

constexpr std::uint64_t kStepsPerMs = 100000;  // regex budget scale

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool equals_nocase(char a, char b) {
    return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
}

void find_plain(std::string_view haystack, std::string_view needle, bool nocase, bool fullword,
                std::vector<std::size_t>& out) {
    if (needle.empty() || haystack.size() < needle.size()) {
        return;
    }
    for (std::size_t pos = 0; pos + needle.size() <= haystack.size(); ++pos) {
        bool hit = true;
        for (std::size_t k = 0; k < needle.size(); ++k) {
            char h = haystack[pos + k];
            char n = needle[k];
            if (nocase ? !equals_nocase(h, n) : h != n) {
                hit = false;
                break;
            }
        }
        if (!hit) {
            continue;
        }
        if (fullword) {
            bool left_ok = pos == 0 || !is_word_char(haystack[pos - 1]);
            std::size_t after = pos + needle.size();
            bool right_ok = after >= haystack.size() || !is_word_char(haystack[after]);
            if (!left_ok || !right_ok) {
                continue;
            }
        }
        out.push_back(pos);
    }
}

std::string widen(std::string_view s) {
    std::string out;
    out.reserve(s.size() * 2);
    for (char c : s) {
        out.push_back(c);
        out.push_back('\0');
    }
    return out;
}

std::vector<std::size_t> find_hex(std::string_view haystack,
                                  const std::vector<YaraString::HexByte>& pattern) {
    std::vector<std::size_t> out;
    if (pattern.empty() || haystack.size() < pattern.size()) {
        return out;
    }
    for (std::size_t pos = 0; pos + pattern.size() <= haystack.size(); ++pos) {
        bool hit = true;
        for (std::size_t k = 0; k < pattern.size(); ++k) {
            if (pattern[k].wildcard) {
                continue;
            }
            if (static_cast<std::uint8_t>(haystack[pos + k]) != pattern[k].value) {
                hit = false;
                break;
            }
        }
        if (hit) {
            out.push_back(pos);
        }
    }
    return out;
}

bool eval_condition(const CondExpr& expr, const std::map<std::string, std::size_t>& counts) {
    switch (expr.kind) {
        case CondExpr::Kind::str_ref: {
            auto it = counts.find(expr.ref);
            return it != counts.end() && it->second > 0;
        }
        case CondExpr::Kind::all_of_them:
            return std::all_of(counts.begin(), counts.end(),
                               [](const auto& kv) { return kv.second > 0; }) &&
                   !counts.empty();
        case CondExpr::Kind::any_of_them:
            return std::any_of(counts.begin(), counts.end(),
                               [](const auto& kv) { return kv.second > 0; });
        case CondExpr::Kind::n_of_them: {
            long long found = 0;
            for (const auto& [id, n] : counts) {
                if (n > 0) {
                    ++found;
                }
            }
            return found >= expr.n;
        }
        case CondExpr::Kind::logical_and:
            return eval_condition(expr.children[0], counts) &&
                   eval_condition(expr.children[1], counts);
        case CondExpr::Kind::logical_or:
            return eval_condition(expr.children[0], counts) ||
                   eval_condition(expr.children[1], counts);
        case CondExpr::Kind::logical_not:
            return !eval_condition(expr.children[0], counts);
        case CondExpr::Kind::boolean:
            return expr.value;
    }
    return false;
}

// string-literal pattern with whitespace runs matched flexibly
rex::Pattern pattern_from_snippet(std::string_view snippet) {
    std::string out;
    bool in_ws = false;
    for (char c : snippet) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_ws = true;
            continue;
        }
        if (in_ws && !out.empty()) {
            out += "\\s+";
        }
        in_ws = false;
        static const std::string meta = R"(\^$.|?*+()[]{})";
        if (meta.find(c) != std::string::npos) {
            out.push_back('\\');
        }
        out.push_back(c);
    }
    return rex::Pattern::compile(out);
}

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
    return 1 + static_cast<std::size_t>(
                   std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

struct Clock {
    std::chrono::steady_clock::time_point deadline;
    bool expired() const { return std::chrono::steady_clock::now() > deadline; }
};

// External adapter: writes rule + target to temp files, runs the command
// ("{rule}"/"{target}" slots) and reads semgrep-style JSON findings. Returns
// nullopt when the binary fails, so callers fall back to the approximate path.
std::optional<std::vector<std::size_t>> external_semgrep_lines(const std::string& cmd_template,
                                                               const Rule& rule,
                                                               const corpus::SourceFile& file) {
    auto tmpdir = std::filesystem::temp_directory_path();
    std::string tag = sha256_hex(rule.text + "\x1f" + file.content).substr(0, 16);
    std::filesystem::path rule_path = tmpdir / ("rulegen-sg-" + tag + ".yaml");
    std::filesystem::path target_path = tmpdir / ("rulegen-sg-" + tag + ".target");
    write_file(rule_path, rule.text);
    write_file(target_path, file.content);
    std::string cmd = cmd_template;
    for (auto [slot, value] : {std::pair<std::string, std::string>{"{rule}", rule_path.string()},
                               {"{target}", target_path.string()}}) {
        std::size_t pos = cmd.find(slot);
        if (pos != std::string::npos) {
            cmd.replace(pos, slot.size(), value);
        }
    }
    cmd += " 2>/dev/null";
    std::string output;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        return std::nullopt;
    }
    char buf[512];
    while (fgets(buf, sizeof(buf), pipe)) {
        output += buf;
    }
    int status = pclose(pipe);
    std::filesystem::remove(rule_path);
    std::filesystem::remove(target_path);
    if (status != 0) {
        return std::nullopt;
    }
    nlohmann::json doc = nlohmann::json::parse(output, nullptr, false);
    if (doc.is_discarded() || !doc.contains("results") || !doc["results"].is_array()) {
        return std::nullopt;
    }
    std::vector<std::size_t> lines;
    for (const auto& result : doc["results"]) {
        if (result.contains("start") && result["start"].contains("line")) {
            lines.push_back(result["start"]["line"].get<std::size_t>());
        }
    }
    std::sort(lines.begin(), lines.end());
    lines.erase(std::unique(lines.begin(), lines.end()), lines.end());
    return lines;
}

std::optional<std::vector<std::size_t>> semgrep_clause_lines(const SemgrepClause& clause,
                                                             const corpus::SourceFile& file,
                                                             std::uint64_t budget) {
    std::vector<std::size_t> lines;
    try {
        rex::Pattern pattern = clause.kind == SemgrepClause::Kind::pattern
                                   ? pattern_from_snippet(clause.value)
                                   : rex::Pattern::compile(clause.value);
        auto spans = pattern.find_all(file.content, budget);
        if (!spans) {
            return std::nullopt;  // budget exhausted
        }
        for (const auto& span : *spans) {
            lines.push_back(line_of_offset(file.content, span.begin));
        }
    } catch (const rex::ParseError&) {
        // validated rules should not reach here; treat as no match
    }
    std::sort(lines.begin(), lines.end());
    lines.erase(std::unique(lines.begin(), lines.end()), lines.end());
    return lines;
}

}  // namespace

std::vector<std::size_t> find_literal(std::string_view haystack, std::string_view needle,
                                      bool nocase, bool wide, bool ascii, bool fullword) {
    std::vector<std::size_t> out;
    bool want_ascii = ascii || !wide;  // plain strings default to ascii
    if (want_ascii) {
        find_plain(haystack, needle, nocase, fullword, out);
    }
    if (wide) {
        std::string wide_needle = widen(needle);
        find_plain(haystack, wide_needle, nocase, fullword, out);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<MatchResult> scan_file(const std::vector<Rule>& rule_set,
                                   const corpus::SourceFile& file, const std::string& package,
                                   const MatcherConfig& cfg, ScanStats* stats) {
    std::vector<MatchResult> results;
    for (const auto& rule : rule_set) {
        Clock clock{std::chrono::steady_clock::now() + std::chrono::milliseconds(cfg.timeout_ms)};
        bool timed_out = false;
        if (rule.format == RuleFormat::yara && rule.yara) {
            std::map<std::string, std::size_t> counts;
            std::vector<std::size_t> offsets;
            for (const auto& s : rule.yara->strings) {
                if (clock.expired()) {
                    timed_out = true;
                    break;
                }
                std::vector<std::size_t> hits;
                if (s.kind == YaraString::Kind::text) {
                    hits = find_literal(file.content, s.text, s.nocase, s.wide,
                                        s.ascii || !s.wide, s.fullword);
                } else if (s.kind == YaraString::Kind::hex) {
                    hits = find_hex(file.content, s.hex);
                } else {
                    try {
                        rex::Pattern pattern =
                            rex::Pattern::compile(s.text, s.re_icase || s.nocase, s.re_dotall);
                        auto spans = pattern.find_all(file.content, cfg.timeout_ms * kStepsPerMs);
                        if (!spans) {
                            timed_out = true;
                            break;
                        }
                        for (const auto& span : *spans) {
                            hits.push_back(span.begin);
                        }
                    } catch (const rex::ParseError&) {
                        // compiled rules cannot carry bad regexes; no match
                    }
                }
                counts[s.id] = hits.size();
                offsets.insert(offsets.end(), hits.begin(), hits.end());
            }
            if (timed_out) {
                if (stats) {
                    stats->timeouts.push_back(rule.name + "|" + package + "|" + file.relative_path);
                }
                continue;
            }
            if (eval_condition(rule.yara->condition, counts)) {
                std::sort(offsets.begin(), offsets.end());
                offsets.erase(std::unique(offsets.begin(), offsets.end()), offsets.end());
                results.push_back({rule.name, package, file.relative_path, std::move(offsets)});
            }
        } else if (rule.format == RuleFormat::semgrep && rule.semgrep) {
            if (!cfg.external_semgrep_cmd.empty()) {
                auto lines = external_semgrep_lines(cfg.external_semgrep_cmd, rule, file);
                if (lines) {
                    if (!lines->empty()) {
                        results.push_back({rule.name, package, file.relative_path, *lines});
                    }
                    continue;
                }
                // binary unavailable or failed: drop to the approximate matcher
            }
            if (stats) {
                stats->approximate_semgrep = true;
            }
            const SemgrepRule& sg = *rule.semgrep;
            bool matched = sg.mode == SemgrepRule::Mode::all_of;
            std::vector<std::size_t> lines;
            for (const auto& clause : sg.clauses) {
                if (clock.expired()) {
                    timed_out = true;
                    break;
                }
                auto clause_lines =
                    semgrep_clause_lines(clause, file, cfg.timeout_ms * kStepsPerMs);
                if (!clause_lines) {
                    timed_out = true;
                    break;
                }
                bool clause_hit = !clause_lines->empty();
                if (sg.mode == SemgrepRule::Mode::all_of) {
                    matched = matched && clause_hit;
                } else {
                    matched = matched || clause_hit;
                }
                lines.insert(lines.end(), clause_lines->begin(), clause_lines->end());
            }
            if (timed_out) {
                if (stats) {
                    stats->timeouts.push_back(rule.name + "|" + package + "|" + file.relative_path);
                }
                continue;
            }
            if (matched && !lines.empty()) {
                std::sort(lines.begin(), lines.end());
                lines.erase(std::unique(lines.begin(), lines.end()), lines.end());
                results.push_back({rule.name, package, file.relative_path, std::move(lines)});
            }
        }
    }
    return results;
}

CorpusScan scan_corpus(const std::vector<Rule>& rule_set,
                       const std::vector<corpus::PackageRecord>& packages,
                       const MatcherConfig& cfg, unsigned jobs) {
    struct PerPackage {
        std::vector<MatchResult> findings;
        ScanStats stats;
    };
    std::vector<PerPackage> partial(packages.size());
    parallel_for(packages.size(), jobs, [&](std::size_t i) {
        const auto& record = packages[i];
        for (const auto& file : record.files) {
            auto file_results =
                scan_file(rule_set, file, record.metadata.name, cfg, &partial[i].stats);
            partial[i].findings.insert(partial[i].findings.end(), file_results.begin(),
                                       file_results.end());
        }
    });

    CorpusScan scan;
    std::vector<std::size_t> order(packages.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return packages[a].metadata.name < packages[b].metadata.name;
    });
    for (std::size_t i : order) {
        const auto& record = packages[i];
        PackageVerdict verdict;
        verdict.package = record.metadata.name;
        verdict.label = record.label;
        for (const auto& finding : partial[i].findings) {
            verdict.matched_rules.insert(finding.rule_id);
            scan.rule_matches[finding.rule_id].insert(record.metadata.name);
        }
        verdict.matched_count = verdict.matched_rules.size();
        verdict.predicted = verdict.matched_count >= cfg.threshold;
        scan.verdicts.push_back(std::move(verdict));
        scan.findings.insert(scan.findings.end(), partial[i].findings.begin(),
                             partial[i].findings.end());
        scan.stats.timeouts.insert(scan.stats.timeouts.end(), partial[i].stats.timeouts.begin(),
                                   partial[i].stats.timeouts.end());
        scan.stats.approximate_semgrep |= partial[i].stats.approximate_semgrep;
    }
    std::sort(scan.findings.begin(), scan.findings.end(),
              [](const MatchResult& a, const MatchResult& b) {
                  return std::tie(a.package, a.rule_id, a.file) <
                         std::tie(b.package, b.rule_id, b.file);
              });
    return scan;
}

}  // namespace rulegen::match
