// SPDX-License-Identifier: Apache-2.0
#include "rulegen/baseline.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "rulegen/embedded_data.hpp"
#include "rulegen/segmenter.hpp"
#include "rulegen/strutil.hpp"
#include "rulegen/util.hpp"
#include "rulegen/yara.hpp"

namespace rulegen::baseline {

namespace {

constexpr std::size_t kMinCandidateLen = 6;

std::string strip_quotes(const std::string& literal) {
    if (literal.size() >= 6 && (literal.starts_with("\"\"\"") || literal.starts_with("'''"))) {
        return literal.substr(3, literal.size() - 6);
    }
    if (literal.size() >= 2 && (literal.front() == '"' || literal.front() == '\'')) {
        return literal.substr(1, literal.size() - 2);
    }
    return literal;
}

}  // namespace

std::vector<std::string> extract_candidate_strings(const std::vector<corpus::SourceFile>& group) {
    std::set<std::string> candidates;
    for (const auto& file : group) {
        auto tokens = seg::tokenize_source(file);
        std::vector<std::size_t> ident_positions;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            const auto& tok = tokens[i];
            if (tok.kind == seg::TokenKind::string_literal) {
                std::string inner = strip_quotes(tok.text);
                if (inner.size() >= kMinCandidateLen && inner.find('\n') == std::string::npos) {
                    candidates.insert(inner);
                }
            } else if (tok.kind == seg::TokenKind::identifier) {
                ident_positions.push_back(i);
            }
        }
        // n-grams over consecutive identifier tokens, sliced from the source so
        // the joining punctuation ("os.getcwd") is preserved
        for (std::size_t a = 0; a < ident_positions.size(); ++a) {
            for (std::size_t n = 1; n <= 3 && a + n <= ident_positions.size(); ++n) {
                if (n > 1 && ident_positions[a + n - 1] != ident_positions[a] + n - 1) {
                    break;  // identifiers must be adjacent in the token stream
                }
                const auto& first = tokens[ident_positions[a]];
                const auto& last = tokens[ident_positions[a + n - 1]];
                std::size_t begin = first.offset;
                std::size_t end = last.offset + last.text.size();
                std::string gram = file.content.substr(begin, end - begin);
                if (gram.size() >= kMinCandidateLen && gram.find('\n') == std::string::npos) {
                    candidates.insert(gram);
                }
            }
        }
    }
    return {candidates.begin(), candidates.end()};
}

double entropy_score(std::string_view s) {
    if (s.empty()) {
        return 0.0;
    }
    std::array<std::size_t, 256> counts{};
    for (unsigned char c : s) {
        ++counts[c];
    }
    std::size_t alphabet = 0;
    double entropy = 0.0;
    for (std::size_t count : counts) {
        if (count == 0) {
            continue;
        }
        ++alphabet;
        double p = static_cast<double>(count) / static_cast<double>(s.size());
        entropy -= p * std::log2(p);
    }
    if (alphabet <= 1) {
        return 0.0;
    }
    double normalized = entropy / std::log2(static_cast<double>(alphabet));
    return std::clamp(normalized, 0.0, 1.0);
}

std::array<double, 4> string_features(std::string_view s) {
    double digits = 0.0;
    double punct = 0.0;
    std::array<std::size_t, 256> counts{};
    for (unsigned char c : s) {
        ++counts[c];
        if (std::isdigit(c)) {
            ++digits;
        } else if (std::ispunct(c)) {
            ++punct;
        }
    }
    double entropy_bits = 0.0;
    if (!s.empty()) {
        for (std::size_t count : counts) {
            if (count == 0) {
                continue;
            }
            double p = static_cast<double>(count) / static_cast<double>(s.size());
            entropy_bits -= p * std::log2(p);
        }
    }
    double len = static_cast<double>(s.size());
    return {len, entropy_bits, s.empty() ? 0.0 : digits / len, s.empty() ? 0.0 : punct / len};
}

namespace {

double harmonic(double n) {
    return std::log(n) + 0.5772156649015329;  // Euler–Mascheroni
}

// average unsuccessful-search path length in a BST of n nodes
double c_factor(std::size_t n) {
    if (n <= 1) {
        return 0.0;
    }
    double dn = static_cast<double>(n);
    return 2.0 * harmonic(dn - 1.0) - 2.0 * (dn - 1.0) / dn;
}

struct IsoNode {
    int attribute = -1;  // -1: leaf
    double split = 0.0;
    std::size_t size = 0;  // leaf population
    int left = -1;
    int right = -1;
};

class IsoTree {
  public:
    IsoTree(const std::vector<std::array<double, 4>>& rows, std::vector<std::size_t> sample,
            std::size_t height_limit, std::mt19937_64& rng) {
        root_ = build(rows, std::move(sample), 0, height_limit, rng);
    }

    double path_length(const std::array<double, 4>& row) const {
        double depth = 0.0;
        int node = root_;
        while (nodes_[static_cast<std::size_t>(node)].attribute >= 0) {
            const IsoNode& n = nodes_[static_cast<std::size_t>(node)];
            node = row[static_cast<std::size_t>(n.attribute)] < n.split ? n.left : n.right;
            depth += 1.0;
        }
        return depth + c_factor(nodes_[static_cast<std::size_t>(node)].size);
    }

  private:
    static double unit_draw(std::mt19937_64& rng) {
        return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
    }

    int build(const std::vector<std::array<double, 4>>& rows, std::vector<std::size_t> sample,
              std::size_t depth, std::size_t height_limit, std::mt19937_64& rng) {
        if (sample.size() <= 1 || depth >= height_limit) {
            return leaf(sample.size());
        }
        // attributes whose sample range is non-degenerate
        std::array<double, 4> lo{};
        std::array<double, 4> hi{};
        for (std::size_t a = 0; a < 4; ++a) {
            lo[a] = hi[a] = rows[sample[0]][a];
        }
        for (std::size_t idx : sample) {
            for (std::size_t a = 0; a < 4; ++a) {
                lo[a] = std::min(lo[a], rows[idx][a]);
                hi[a] = std::max(hi[a], rows[idx][a]);
            }
        }
        std::vector<int> usable;
        for (int a = 0; a < 4; ++a) {
            if (hi[static_cast<std::size_t>(a)] > lo[static_cast<std::size_t>(a)]) {
                usable.push_back(a);
            }
        }
        if (usable.empty()) {
            return leaf(sample.size());  // all points identical
        }
        int attribute = usable[static_cast<std::size_t>(rng() % usable.size())];
        auto a = static_cast<std::size_t>(attribute);
        double split = lo[a] + unit_draw(rng) * (hi[a] - lo[a]);
        std::vector<std::size_t> left_sample;
        std::vector<std::size_t> right_sample;
        for (std::size_t idx : sample) {
            (rows[idx][a] < split ? left_sample : right_sample).push_back(idx);
        }
        if (left_sample.empty() || right_sample.empty()) {
            return leaf(sample.size());
        }
        int left = build(rows, std::move(left_sample), depth + 1, height_limit, rng);
        int right = build(rows, std::move(right_sample), depth + 1, height_limit, rng);
        IsoNode node;
        node.attribute = attribute;
        node.split = split;
        node.left = left;
        node.right = right;
        nodes_.push_back(node);
        return static_cast<int>(nodes_.size() - 1);
    }

    int leaf(std::size_t size) {
        IsoNode node;
        node.size = size;
        nodes_.push_back(node);
        return static_cast<int>(nodes_.size() - 1);
    }

    std::vector<IsoNode> nodes_;
    int root_ = -1;
};

}  // namespace

std::vector<double> isolation_forest_scores(const std::vector<std::array<double, 4>>& rows,
                                            int trees, std::size_t subsample, std::uint64_t seed) {
    if (rows.empty()) {
        return {};
    }
    std::size_t psi = std::min(subsample, rows.size());
    std::size_t height_limit =
        static_cast<std::size_t>(std::ceil(std::log2(std::max<std::size_t>(2, psi))));
    std::mt19937_64 rng(seed);
    std::vector<IsoTree> forest;
    forest.reserve(static_cast<std::size_t>(trees));
    for (int t = 0; t < trees; ++t) {
        // sample psi distinct row indexes (Fisher–Yates prefix)
        std::vector<std::size_t> indexes(rows.size());
        for (std::size_t i = 0; i < indexes.size(); ++i) {
            indexes[i] = i;
        }
        for (std::size_t i = 0; i < psi; ++i) {
            std::size_t j = i + static_cast<std::size_t>(rng() % (indexes.size() - i));
            std::swap(indexes[i], indexes[j]);
        }
        indexes.resize(psi);
        forest.emplace_back(rows, std::move(indexes), height_limit, rng);
    }
    double c = c_factor(psi);
    std::vector<double> scores(rows.size(), 0.5);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        double total = 0.0;
        for (const auto& tree : forest) {
            total += tree.path_length(rows[i]);
        }
        double mean_h = total / static_cast<double>(trees);
        scores[i] = c > 0.0 ? std::pow(2.0, -mean_h / c) : 0.5;
    }
    return scores;
}

std::vector<ScoredString> score_strings(const std::vector<corpus::SourceFile>& mal_group,
                                        const std::vector<corpus::SourceFile>& legit_group,
                                        const ScoringConfig& cfg) {
    if (mal_group.empty() || legit_group.empty()) {
        throw Error(ErrorCode::EmptyInput, "score_strings needs both groups non-empty");
    }
    std::vector<std::string> candidates = extract_candidate_strings(mal_group);
    if (candidates.empty()) {
        throw Error(ErrorCode::DegenerateCorpus, "no candidate strings in the malicious group");
    }

    // documents = files across both groups
    std::vector<const corpus::SourceFile*> union_docs;
    for (const auto& f : mal_group) {
        union_docs.push_back(&f);
    }
    for (const auto& f : legit_group) {
        union_docs.push_back(&f);
    }
    double n_docs = static_cast<double>(union_docs.size());

    std::vector<double> tfidf_raw(candidates.size(), 0.0);
    double max_raw = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const std::string& term = candidates[i];
        std::size_t tf = 0;
        for (const auto& f : mal_group) {
            tf += count_occurrences(f.content, term);
        }
        std::size_t df = 0;
        for (const auto* doc : union_docs) {
            if (doc->content.find(term) != std::string::npos) {
                ++df;
            }
        }
        double idf = df == 0 ? 0.0 : std::log(n_docs / static_cast<double>(df));
        tfidf_raw[i] = static_cast<double>(tf) * idf;
        max_raw = std::max(max_raw, tfidf_raw[i]);
    }
    if (max_raw <= 0.0) {
        throw Error(ErrorCode::DegenerateCorpus, "all idf terms are zero");
    }

    std::vector<std::array<double, 4>> rows;
    rows.reserve(candidates.size());
    for (const auto& term : candidates) {
        rows.push_back(string_features(term));
    }
    std::vector<double> iso =
        isolation_forest_scores(rows, cfg.iso_trees, cfg.iso_subsample, cfg.seed);

    std::vector<ScoredString> scored;
    scored.reserve(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        ScoredString s;
        s.text = candidates[i];
        s.iso_score = iso[i];
        s.tfidf_score = tfidf_raw[i] / max_raw;
        s.entropy_score = entropy_score(candidates[i]);
        s.combined = (cfg.weights.iso * s.iso_score + cfg.weights.tfidf * s.tfidf_score +
                      cfg.weights.entropy * s.entropy_score) /
                     3.0;
        scored.push_back(std::move(s));
    }
    return scored;
}

rules::Rule generate_baseline_rule(const std::vector<ScoredString>& scored,
                                   const TemplateConfig& cfg) {
    std::vector<const ScoredString*> picked;
    for (const auto& s : scored) {
        if (s.combined >= cfg.threshold) {
            picked.push_back(&s);
        }
    }
    if (picked.empty()) {
        throw Error(ErrorCode::NoSignal,
                    "no string scored at or above " + format_fixed(cfg.threshold, 2));
    }
    std::sort(picked.begin(), picked.end(), [](const ScoredString* a, const ScoredString* b) {
        return a->combined != b->combined ? a->combined > b->combined : a->text < b->text;
    });

    std::string strings_block;
    for (std::size_t i = 0; i < picked.size(); ++i) {
        strings_block += "        $s" + std::to_string(i) + " = \"" +
                         yara::escape_literal(picked[i]->text) + "\"\n";
    }
    if (!strings_block.empty()) {
        strings_block.pop_back();  // template adds the newline
    }

    std::string text = cfg.template_text.empty() ? std::string(data::baseline_rule_template())
                                                 : cfg.template_text;
    auto fill = [&](std::string_view slot, const std::string& value) {
        std::string needle = "{" + std::string(slot) + "}";
        std::size_t pos;
        while ((pos = text.find(needle)) != std::string::npos) {
            text.replace(pos, needle.size(), value);
        }
    };
    fill("rule_name", cfg.rule_name);
    fill("date", cfg.date);
    fill("group_id", cfg.group_id);
    fill("strings", strings_block);

    auto outcome = yara::compile_yara(text);
    if (std::holds_alternative<rules::Rule>(outcome)) {
        rules::Rule rule = std::get<rules::Rule>(std::move(outcome));
        rule.provenance.origin = "baseline:" + cfg.group_id;
        return rule;
    }
    const auto& errors = std::get<std::vector<rules::CompileError>>(outcome);
    throw Error(ErrorCode::NoSignal,
                "baseline template output failed to compile: " +
                    (errors.empty() ? "unknown" : errors.front().message));
}

}  // namespace rulegen::baseline
