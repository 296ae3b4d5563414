// SPDX-License-Identifier: Apache-2.0
#include "rulegen/config.hpp"

#include <nlohmann/json.hpp>
#include <set>

#include "rulegen/digest.hpp"
#include "rulegen/util.hpp"

namespace rulegen::config {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& why) {
    throw Error(ErrorCode::ConfigError, why);
}

template <typename T>
void read_key(const json& section, const char* key, T& slot) {
    if (!section.contains(key)) {
        return;
    }
    try {
        slot = section.at(key).get<T>();
    } catch (const json::exception&) {
        bad(std::string("key '") + key + "' has the wrong type");
    }
}

void check_known_keys(const json& section, const std::set<std::string>& known,
                      const std::string& where) {
    for (auto it = section.begin(); it != section.end(); ++it) {
        if (!known.contains(it.key())) {
            bad("unknown key '" + it.key() + "' in " + where);
        }
    }
}

}  // namespace

RunConfig RunConfig::from_json_text(std::string_view text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) {
        bad("config is not valid JSON");
    }
    if (!doc.is_object()) {
        bad("config root must be an object");
    }
    check_known_keys(doc,
                     {"corpus", "segmenter", "embedding", "cluster", "llm", "validator", "matcher",
                      "baseline", "analytics", "run"},
                     "config root");
    RunConfig cfg;

    if (doc.contains("corpus")) {
        const json& c = doc["corpus"];
        check_known_keys(c,
                         {"malicious_dir", "legitimate_dir", "ecosystem", "allow_network",
                          "registry_endpoint_pypi", "registry_endpoint_npm"},
                         "corpus");
        read_key(c, "malicious_dir", cfg.malicious_dir);
        read_key(c, "legitimate_dir", cfg.legitimate_dir);
        std::string eco = "pypi";
        read_key(c, "ecosystem", eco);
        if (eco == "pypi") {
            cfg.ecosystem = corpus::Ecosystem::pypi;
        } else if (eco == "npm") {
            cfg.ecosystem = corpus::Ecosystem::npm;
        } else {
            bad("corpus.ecosystem must be pypi or npm");
        }
        read_key(c, "allow_network", cfg.allow_network);
        read_key(c, "registry_endpoint_pypi", cfg.registry.pypi_endpoint);
        read_key(c, "registry_endpoint_npm", cfg.registry.npm_endpoint);
    }

    if (doc.contains("segmenter")) {
        const json& s = doc["segmenter"];
        check_known_keys(s,
                         {"segment_threshold", "unit_char_cap", "popular_packages_file",
                          "denylist_file", "typosquat_max_distance", "typosquat_min_length"},
                         "segmenter");
        read_key(s, "segment_threshold", cfg.segment_threshold);
        read_key(s, "unit_char_cap", cfg.unit_char_cap);
        read_key(s, "popular_packages_file", cfg.popular_packages_file);
        read_key(s, "denylist_file", cfg.denylist_file);
        read_key(s, "typosquat_max_distance", cfg.audit.typosquat_max_distance);
        read_key(s, "typosquat_min_length", cfg.audit.typosquat_min_length);
    }

    if (doc.contains("embedding")) {
        const json& e = doc["embedding"];
        check_known_keys(e, {"backend", "dim", "endpoint", "api_key_env", "aggregate"},
                         "embedding");
        read_key(e, "backend", cfg.embed_backend);
        read_key(e, "dim", cfg.embed_dim);
        read_key(e, "endpoint", cfg.embed_endpoint);
        read_key(e, "api_key_env", cfg.embed_api_key_env);
        read_key(e, "aggregate", cfg.aggregate);
    }

    if (doc.contains("cluster")) {
        const json& c = doc["cluster"];
        check_known_keys(c,
                         {"k", "seed", "max_iter", "intra_similarity_threshold", "similarity",
                          "representatives"},
                         "cluster");
        read_key(c, "k", cfg.k);
        read_key(c, "seed", cfg.seed);
        read_key(c, "max_iter", cfg.max_iter);
        read_key(c, "intra_similarity_threshold", cfg.intra_similarity_threshold);
        read_key(c, "similarity", cfg.similarity);
        read_key(c, "representatives", cfg.representatives);
    }

    if (doc.contains("llm")) {
        const json& l = doc["llm"];
        check_known_keys(l,
                         {"backend", "endpoint", "model", "api_key_env", "temperature",
                          "max_tokens", "replay_file", "record_file", "template_dir"},
                         "llm");
        read_key(l, "backend", cfg.llm_backend);
        read_key(l, "endpoint", cfg.llm_endpoint);
        read_key(l, "model", cfg.llm_model);
        read_key(l, "api_key_env", cfg.llm_api_key_env);
        read_key(l, "temperature", cfg.llm_temperature);
        read_key(l, "max_tokens", cfg.llm_max_tokens);
        read_key(l, "replay_file", cfg.replay_file);
        read_key(l, "record_file", cfg.record_file);
        read_key(l, "template_dir", cfg.template_dir);
    }

    if (doc.contains("validator")) {
        const json& v = doc["validator"];
        check_known_keys(v,
                         {"max_fix_attempts", "error_memory", "external_yara_cmd",
                          "external_semgrep_cmd", "crlf_output"},
                         "validator");
        read_key(v, "max_fix_attempts", cfg.validator.max_fix_attempts);
        read_key(v, "error_memory", cfg.validator.error_memory);
        read_key(v, "external_yara_cmd", cfg.validator.external_yara_cmd);
        read_key(v, "external_semgrep_cmd", cfg.validator.external_semgrep_cmd);
        read_key(v, "crlf_output", cfg.validator.crlf_output);
    }

    if (doc.contains("matcher")) {
        const json& m = doc["matcher"];
        check_known_keys(m, {"threshold", "timeout_ms", "external_semgrep_cmd"}, "matcher");
        read_key(m, "threshold", cfg.matcher.threshold);
        read_key(m, "timeout_ms", cfg.matcher.timeout_ms);
        read_key(m, "external_semgrep_cmd", cfg.matcher.external_semgrep_cmd);
    }

    if (doc.contains("baseline")) {
        const json& b = doc["baseline"];
        check_known_keys(b,
                         {"weight_iso", "weight_tfidf", "weight_entropy", "score_threshold",
                          "iso_trees", "iso_subsample", "seed", "template_file", "date"},
                         "baseline");
        read_key(b, "weight_iso", cfg.baseline_scoring.weights.iso);
        read_key(b, "weight_tfidf", cfg.baseline_scoring.weights.tfidf);
        read_key(b, "weight_entropy", cfg.baseline_scoring.weights.entropy);
        read_key(b, "score_threshold", cfg.baseline_threshold);
        read_key(b, "iso_trees", cfg.baseline_scoring.iso_trees);
        read_key(b, "iso_subsample", cfg.baseline_scoring.iso_subsample);
        read_key(b, "seed", cfg.baseline_scoring.seed);
        read_key(b, "template_file", cfg.baseline_template_file);
        read_key(b, "date", cfg.baseline_date);
    }

    if (doc.contains("analytics")) {
        const json& a = doc["analytics"];
        check_known_keys(a, {"overlap_threshold", "taxonomy_file"}, "analytics");
        read_key(a, "overlap_threshold", cfg.overlap_threshold);
        read_key(a, "taxonomy_file", cfg.taxonomy_file);
    }

    if (doc.contains("run")) {
        const json& r = doc["run"];
        check_known_keys(r, {"output_dir", "format", "jobs"}, "run");
        read_key(r, "output_dir", cfg.output_dir);
        read_key(r, "format", cfg.format);
        read_key(r, "jobs", cfg.jobs);
    }

    cfg.validate_invariants();
    return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        bad("config file not found: " + path.string());
    }
    return from_json_text(read_file(path));
}

void RunConfig::validate_invariants() const {
    if (format != "yara" && format != "semgrep" && format != "both") {
        bad("run.format must be yara, semgrep or both");
    }
    if (llm_backend != "remote" && llm_backend != "replay" && llm_backend != "record") {
        bad("llm.backend must be remote, replay or record");
    }
    if (llm_backend == "replay" && allow_network) {
        bad("replay mode forbids allow_network");
    }
    if (llm_backend == "replay" && replay_file.empty()) {
        bad("llm.replay_file is required for the replay backend");
    }
    if (llm_backend == "record" && record_file.empty()) {
        bad("llm.record_file is required for record mode");
    }
    if (embed_backend != "local" && embed_backend != "remote") {
        bad("embedding.backend must be local or remote");
    }
    if (aggregate != "mean" && aggregate != "concat") {
        bad("embedding.aggregate must be mean or concat");
    }
    if (similarity != "inverse_distance" && similarity != "cosine_mean") {
        bad("cluster.similarity must be inverse_distance or cosine_mean");
    }
    if (embed_dim == 0 || segment_threshold == 0 || unit_char_cap == 0) {
        bad("dimensions and thresholds must be positive");
    }
}

std::string RunConfig::to_json_text() const {
    json doc{
        {"corpus",
         {{"malicious_dir", malicious_dir},
          {"legitimate_dir", legitimate_dir},
          {"ecosystem", corpus::to_string(ecosystem)},
          {"allow_network", allow_network},
          {"registry_endpoint_pypi", registry.pypi_endpoint},
          {"registry_endpoint_npm", registry.npm_endpoint}}},
        {"segmenter",
         {{"segment_threshold", segment_threshold},
          {"unit_char_cap", unit_char_cap},
          {"popular_packages_file", popular_packages_file},
          {"denylist_file", denylist_file},
          {"typosquat_max_distance", audit.typosquat_max_distance},
          {"typosquat_min_length", audit.typosquat_min_length}}},
        {"embedding",
         {{"backend", embed_backend},
          {"dim", embed_dim},
          {"endpoint", embed_endpoint},
          {"api_key_env", embed_api_key_env},
          {"aggregate", aggregate}}},
        {"cluster",
         {{"k", k},
          {"seed", seed},
          {"max_iter", max_iter},
          {"intra_similarity_threshold", intra_similarity_threshold},
          {"similarity", similarity},
          {"representatives", representatives}}},
        {"llm",
         {{"backend", llm_backend},
          {"endpoint", llm_endpoint},
          {"model", llm_model},
          {"api_key_env", llm_api_key_env},
          {"temperature", llm_temperature},
          {"max_tokens", llm_max_tokens},
          {"replay_file", replay_file},
          {"record_file", record_file},
          {"template_dir", template_dir}}},
        {"validator",
         {{"max_fix_attempts", validator.max_fix_attempts},
          {"error_memory", validator.error_memory},
          {"external_yara_cmd", validator.external_yara_cmd},
          {"external_semgrep_cmd", validator.external_semgrep_cmd},
          {"crlf_output", validator.crlf_output}}},
        {"matcher",
         {{"threshold", matcher.threshold},
          {"timeout_ms", matcher.timeout_ms},
          {"external_semgrep_cmd", matcher.external_semgrep_cmd}}},
        {"baseline",
         {{"weight_iso", baseline_scoring.weights.iso},
          {"weight_tfidf", baseline_scoring.weights.tfidf},
          {"weight_entropy", baseline_scoring.weights.entropy},
          {"score_threshold", baseline_threshold},
          {"iso_trees", baseline_scoring.iso_trees},
          {"iso_subsample", baseline_scoring.iso_subsample},
          {"seed", baseline_scoring.seed},
          {"template_file", baseline_template_file},
          {"date", baseline_date}}},
        {"analytics", {{"overlap_threshold", overlap_threshold}, {"taxonomy_file", taxonomy_file}}},
        {"run", {{"output_dir", output_dir}, {"format", format}, {"jobs", jobs}}},
    };
    return doc.dump(2) + "\n";
}

std::string RunConfig::digest() const {
    return sha256_hex(to_json_text());
}

}  // namespace rulegen::config
