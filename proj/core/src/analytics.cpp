// SPDX-License-Identifier: Apache-2.0
#include "rulegen/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "rulegen/embedded_data.hpp"
#include "rulegen/rex.hpp"
#include "rulegen/strutil.hpp"
#include "rulegen/util.hpp"

namespace rulegen::analytics {

using nlohmann::json;
using rules::Rule;

std::string Metrics::percent(std::optional<double> value) {
    if (!value) {
        return "n/a";
    }
    return format_fixed(*value * 100.0, 1) + "%";
}

Metrics confusion_metrics(const std::vector<match::PackageVerdict>& verdicts) {
    if (verdicts.empty()) {
        throw Error(ErrorCode::EmptyInput, "no verdicts to score");
    }
    Metrics m;
    for (const auto& v : verdicts) {
        bool actual = v.label == corpus::Label::malicious;
        if (v.predicted && actual) {
            ++m.tp;
        } else if (v.predicted && !actual) {
            ++m.fp;
        } else if (!v.predicted && actual) {
            ++m.fn;
        } else {
            ++m.tn;
        }
    }
    long long total = m.tp + m.fp + m.tn + m.fn;
    m.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(total);
    if (m.tp + m.fp > 0) {
        m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
    }
    if (m.tp + m.fn > 0) {
        m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    }
    if (m.precision && m.recall && (*m.precision + *m.recall) > 0.0) {
        m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
    }
    return m;
}

RulePrecisionReport per_rule_precision(const std::vector<RuleTally>& tallies) {
    RulePrecisionReport report;
    for (const auto& tally : tallies) {
        std::size_t matched = tally.matched_malicious.size() + tally.matched_legitimate.size();
        if (matched == 0) {
            report.unmatched.push_back(tally.rule_id);
            continue;
        }
        RulePrecision rp;
        rp.rule_id = tally.rule_id;
        rp.matched_count = matched;
        rp.precision = static_cast<double>(tally.matched_malicious.size()) /
                       static_cast<double>(matched);
        report.matched.push_back(std::move(rp));
    }
    std::sort(report.matched.begin(), report.matched.end(),
              [](const RulePrecision& a, const RulePrecision& b) { return a.rule_id < b.rule_id; });
    std::sort(report.unmatched.begin(), report.unmatched.end());
    return report;
}

std::vector<CdfPoint> coverage_cdf(const std::vector<std::size_t>& match_counts) {
    std::vector<CdfPoint> cdf;
    if (match_counts.empty()) {
        return cdf;
    }
    std::vector<std::size_t> sorted = match_counts;
    std::sort(sorted.begin(), sorted.end());
    double n = static_cast<double>(sorted.size());
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) {
            ++j;
        }
        cdf.push_back({sorted[i], static_cast<double>(j) / n});
        i = j;
    }
    return cdf;
}

std::string cdf_to_csv(const std::vector<CdfPoint>& cdf) {
    std::string out = "detected_packages,cumulative_rule_fraction\n";
    for (const auto& point : cdf) {
        out += std::to_string(point.x) + "," + format_fixed(point.y, 6) + "\n";
    }
    return out;
}

double rule_similarity(const Rule& a, const Rule& b) {
    std::string na = normalize_rule_text(a.text);
    std::string nb = normalize_rule_text(b.text);
    constexpr std::size_t kCap = 4000;  // bound the DP for pathological inputs
    if (na.size() > kCap) {
        na.resize(kCap);
    }
    if (nb.size() > kCap) {
        nb.resize(kCap);
    }
    std::size_t longest = std::max(na.size(), nb.size());
    if (longest == 0) {
        return 1.0;
    }
    double dist = static_cast<double>(levenshtein(na, nb));
    return 1.0 - dist / static_cast<double>(longest);
}

OverlapReport rule_overlap(const std::vector<Rule>& set_a, const std::vector<Rule>& set_b,
                           double sim_threshold) {
    OverlapReport report;
    for (const auto& a : set_a) {
        for (const auto& b : set_b) {
            double sim = rule_similarity(a, b);
            if (sim >= sim_threshold) {
                report.pairs.push_back({a.name, b.name, sim});
            }
        }
    }
    std::sort(report.pairs.begin(), report.pairs.end(),
              [](const OverlapPair& x, const OverlapPair& y) {
                  return std::tie(x.a_id, x.b_id) < std::tie(y.a_id, y.b_id);
              });
    report.overlap_count = report.pairs.size();
    return report;
}

// ---------------------------------------------------------------------------
// Taxonomy
// ---------------------------------------------------------------------------

std::size_t Taxonomy::category_count() const {
    std::set<int> ids;
    for (const auto& entry : entries) {
        ids.insert(entry.category_id);
    }
    return ids.size();
}

Taxonomy Taxonomy::from_json_text(std::string_view text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.contains("categories") || !doc["categories"].is_array()) {
        throw Error(ErrorCode::BadTaxonomyFile, "expected a JSON object with a 'categories' array");
    }
    Taxonomy taxonomy;
    for (const auto& item : doc["categories"]) {
        TaxonomyEntry entry;
        entry.category_id = item.value("id", -1);
        entry.category = item.value("category", "");
        entry.subcategory = item.value("subcategory", "");
        if (entry.category_id < 0 || entry.category.empty() || entry.subcategory.empty()) {
            throw Error(ErrorCode::BadTaxonomyFile, "entry missing id/category/subcategory");
        }
        if (item.contains("keywords")) {
            for (const auto& kw : item["keywords"]) {
                entry.keywords.push_back(to_lower(kw.get<std::string>()));
            }
        }
        if (item.contains("patterns")) {
            for (const auto& p : item["patterns"]) {
                std::string pattern = p.get<std::string>();
                try {
                    rex::Pattern::compile(pattern);
                } catch (const rex::ParseError& e) {
                    throw Error(ErrorCode::BadTaxonomyFile,
                                "bad pattern '" + pattern + "': " + e.what());
                }
                entry.patterns.push_back(pattern);
            }
        }
        taxonomy.entries.push_back(std::move(entry));
    }
    if (taxonomy.entries.empty()) {
        throw Error(ErrorCode::BadTaxonomyFile, "no taxonomy entries");
    }
    return taxonomy;
}

Taxonomy Taxonomy::builtin() {
    return from_json_text(data::taxonomy_json());
}

Taxonomy Taxonomy::from_file(const std::filesystem::path& path) {
    return from_json_text(read_file(path));
}

namespace {

// classification corpus: rule name, pattern strings, condition, message —
// meta entries are excluded so generator fields don't trigger tags
std::string classification_text(const Rule& rule) {
    std::string text = rule.name;
    if (rule.yara) {
        for (const auto& s : rule.yara->strings) {
            text += '\n';
            text += s.text;
        }
        text += '\n';
        text += rule.yara->condition_text;
    }
    if (rule.semgrep) {
        text += '\n';
        text += rule.semgrep->message;
        for (const auto& clause : rule.semgrep->clauses) {
            text += '\n';
            text += clause.value;
        }
    }
    return to_lower(text);
}

}  // namespace

std::set<TaxonomyTag> classify_rule(const Rule& rule, const Taxonomy& taxonomy) {
    std::string text = classification_text(rule);
    std::set<TaxonomyTag> tags;
    for (const auto& entry : taxonomy.entries) {
        bool hit = false;
        for (const auto& keyword : entry.keywords) {
            if (!keyword.empty() && text.find(keyword) != std::string::npos) {
                hit = true;
                break;
            }
        }
        if (!hit) {
            for (const auto& pattern : entry.patterns) {
                auto found = rex::Pattern::compile(pattern).search(text);
                if (found && *found) {
                    hit = true;
                    break;
                }
            }
        }
        if (hit) {
            tags.insert({entry.category_id, entry.category, entry.subcategory});
        }
    }
    if (tags.empty()) {
        for (const auto& entry : taxonomy.entries) {
            if (entry.keywords.empty() && entry.patterns.empty()) {
                tags.insert({entry.category_id, entry.category, entry.subcategory});
                break;
            }
        }
        if (tags.empty()) {
            tags.insert({10, "Other", "Unknown or Undetermined"});
        }
    }
    return tags;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::pair<double, double>> cdf_of(std::vector<double> values) {
    std::vector<std::pair<double, double>> cdf;
    if (values.empty()) {
        return cdf;
    }
    std::sort(values.begin(), values.end());
    double n = static_cast<double>(values.size());
    std::size_t i = 0;
    while (i < values.size()) {
        std::size_t j = i;
        while (j < values.size() && values[j] == values[i]) {
            ++j;
        }
        cdf.emplace_back(values[i], static_cast<double>(j) / n);
        i = j;
    }
    return cdf;
}

}  // namespace

ScoreCdfs score_cdf(const std::vector<Rule>& rule_set) {
    ScoreCdfs out;
    std::vector<double> confidence;
    std::vector<double> maliciousness;
    std::vector<double> risk;
    for (const auto& rule : rule_set) {
        if (rule.scores.confidence) {
            confidence.push_back(*rule.scores.confidence);
        } else {
            ++out.absent_confidence;
        }
        if (rule.scores.maliciousness) {
            maliciousness.push_back(*rule.scores.maliciousness);
        } else {
            ++out.absent_maliciousness;
        }
        if (rule.scores.risk) {
            risk.push_back(*rule.scores.risk);
        } else {
            ++out.absent_risk;
        }
    }
    out.confidence = cdf_of(std::move(confidence));
    out.maliciousness = cdf_of(std::move(maliciousness));
    out.risk = cdf_of(std::move(risk));
    return out;
}

std::string score_cdf_to_csv(const std::vector<std::pair<double, double>>& cdf) {
    std::string out = "score,cumulative_fraction\n";
    for (const auto& [score, fraction] : cdf) {
        out += format_fixed(score, 6) + "," + format_fixed(fraction, 6) + "\n";
    }
    return out;
}

Heatmap category_heatmap(const std::vector<std::set<TaxonomyTag>>& tags_per_rule) {
    Heatmap heatmap{};
    for (const auto& tags : tags_per_rule) {
        std::set<int> categories;
        for (const auto& tag : tags) {
            if (tag.category_id >= 0 && tag.category_id < static_cast<int>(kCategoryCount)) {
                categories.insert(tag.category_id);
            }
        }
        for (int a : categories) {
            for (int b : categories) {
                ++heatmap[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
            }
        }
    }
    return heatmap;
}

std::string heatmap_to_csv(const Heatmap& heatmap) {
    std::string out = "category";
    for (std::size_t j = 0; j < kCategoryCount; ++j) {
        out += "," + std::to_string(j);
    }
    out += "\n";
    for (std::size_t i = 0; i < kCategoryCount; ++i) {
        out += std::to_string(i);
        for (std::size_t j = 0; j < kCategoryCount; ++j) {
            out += "," + std::to_string(heatmap[i][j]);
        }
        out += "\n";
    }
    return out;
}

}  // namespace rulegen::analytics
