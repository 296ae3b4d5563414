// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "rulegen/baseline.hpp"
#include "rulegen/corpus.hpp"
#include "rulegen/matcher.hpp"
#include "rulegen/segmenter.hpp"
#include "rulegen/validator.hpp"

namespace rulegen::config {

/// One structured JSON config file drives every stage; secrets come only from
/// the environment variables named here. All seeds are explicit. See
/// README.md for the key schema.
struct RunConfig {
    // corpus
    std::string malicious_dir;
    std::string legitimate_dir;
    corpus::Ecosystem ecosystem = corpus::Ecosystem::pypi;
    bool allow_network = false;
    corpus::RegistryConfig registry;

    // segmenter
    std::size_t segment_threshold = 512;
    std::size_t unit_char_cap = 4000;
    std::string popular_packages_file;  // empty: built-in starter list
    std::string denylist_file;          // empty: built-in starter list
    seg::AuditConfig audit;

    // embedding
    std::string embed_backend = "local";  // local | remote
    std::size_t embed_dim = 256;
    std::string embed_endpoint;
    std::string embed_api_key_env = "RULEGEN_EMBED_API_KEY";
    std::string aggregate = "mean";  // mean | concat

    // clustering
    std::size_t k = 0;  // 0: max(1, floor(sqrt(N/2)))
    std::uint64_t seed = 42;
    std::size_t max_iter = 500;
    double intra_similarity_threshold = 0.85;
    std::string similarity = "inverse_distance";  // inverse_distance | cosine_mean
    std::size_t representatives = 2;

    // llm
    std::string llm_backend = "replay";  // remote | replay | record
    std::string llm_endpoint;
    std::string llm_model = "gpt-4o";
    std::string llm_api_key_env = "RULEGEN_LLM_API_KEY";
    double llm_temperature = 0.0;
    int llm_max_tokens = 2048;
    std::string replay_file;
    std::string record_file;
    std::string template_dir;

    // validator
    validate::ValidatorConfig validator;

    // matcher
    match::MatcherConfig matcher;

    // baseline
    baseline::ScoringConfig baseline_scoring;
    double baseline_threshold = 0.9;
    std::string baseline_template_file;
    std::string baseline_date = "1970-01-01";

    // analytics
    double overlap_threshold = 0.8;
    std::string taxonomy_file;  // empty: built-in table

    // run
    std::string output_dir = "runs/out";
    std::string format = "both";  // yara | semgrep | both
    unsigned jobs = 1;

    bool want_yara() const { return format == "yara" || format == "both"; }
    bool want_semgrep() const { return format == "semgrep" || format == "both"; }

    /// Throws Error{ConfigError} on unknown keys, wrong types, or invariant
    /// violations (replay mode forbids allow_network).
    static RunConfig load(const std::filesystem::path& path);
    static RunConfig from_json_text(std::string_view text);
    void validate_invariants() const;
    std::string to_json_text() const;
    std::string digest() const;
};

}  // namespace rulegen::config
