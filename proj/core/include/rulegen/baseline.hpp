// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rulegen/corpus.hpp"
#include "rulegen/rule.hpp"
#include "rulegen/util.hpp"

namespace rulegen::baseline {

struct ScoredString {
    std::string text;
    double iso_score = 0.0;      // isolation-forest anomaly score, [0,1]
    double tfidf_score = 0.0;    // max-normalized tf-idf, [0,1]
    double entropy_score = 0.0;  // alphabet-normalized Shannon entropy, [0,1]
    double combined = 0.0;       // (1.2*iso + 1.0*tfidf + 0.8*entropy) / 3.0
};

struct Weights {
    double iso = 1.2;
    double tfidf = 1.0;
    double entropy = 0.8;
};

struct ScoringConfig {
    Weights weights;
    int iso_trees = 100;
    std::size_t iso_subsample = 256;  // psi = min(256, N)
    std::uint64_t seed = 42;
};

/// Candidate set: string-literal contents plus identifier n-grams (n = 1..3,
/// sliced from the source so dotted chains like "socket.gethostname" survive),
/// each at least 6 chars, deduplicated, sorted.
std::vector<std::string> extract_candidate_strings(const std::vector<corpus::SourceFile>& group);

/// Shannon entropy of the characters normalized by log2 of the alphabet
/// actually present, clamped to [0,1]. Single-symbol strings score 0.
double entropy_score(std::string_view s);

/// Per-string anomaly scores s(x) = 2^(-E[h(x)] / c(psi)) from an isolation
/// forest over (length, entropy bits, digit ratio, punctuation ratio)
/// feature rows. Deterministic for a fixed seed.
std::vector<double> isolation_forest_scores(const std::vector<std::array<double, 4>>& rows,
                                            int trees, std::size_t subsample, std::uint64_t seed);

std::array<double, 4> string_features(std::string_view s);

/// Scores candidates extracted from the malicious group: tf = occurrences
/// across malicious docs, idf = ln(N/df) over the union corpus (documents =
/// files), product max-normalized per run. Throws Error{EmptyInput} for empty
/// groups and Error{DegenerateCorpus} when every candidate's tf-idf is zero.
std::vector<ScoredString> score_strings(const std::vector<corpus::SourceFile>& mal_group,
                                        const std::vector<corpus::SourceFile>& legit_group,
                                        const ScoringConfig& cfg = {});

struct TemplateConfig {
    std::string rule_name = "baseline_rule";
    std::string group_id = "0";
    std::string date = "1970-01-01";  // fixed by default so runs are bit-stable
    std::string template_text;        // empty: built-in template
    double threshold = 0.9;
};

/// Fills the YARA template with every string scoring >= threshold; the output
/// always compiles under the structural validator. Throws Error{NoSignal}
/// when nothing clears the threshold.
rules::Rule generate_baseline_rule(const std::vector<ScoredString>& scored,
                                   const TemplateConfig& cfg = {});

}  // namespace rulegen::baseline
