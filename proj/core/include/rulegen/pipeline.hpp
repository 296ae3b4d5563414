// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "rulegen/clusterer.hpp"
#include "rulegen/config.hpp"
#include "rulegen/corpus.hpp"
#include "rulegen/embedding.hpp"
#include "rulegen/llm.hpp"
#include "rulegen/rule.hpp"
#include "rulegen/segmenter.hpp"

namespace rulegen::pipeline {

/// Artifact layout inside a run directory. Every stage reads the previous
/// stage's files and is independently re-runnable.
struct RunPaths {
    std::filesystem::path root;

    std::filesystem::path records() const { return root / "corpus" / "records.json"; }
    std::filesystem::path extracted() const { return root / "corpus" / "extracted"; }
    std::filesystem::path units() const { return root / "segments" / "units.json"; }
    std::filesystem::path flags() const { return root / "segments" / "flags.json"; }
    std::filesystem::path clusters() const { return root / "clusters" / "clusters.json"; }
    std::filesystem::path rules_dir() const { return root / "rules"; }
    std::filesystem::path rules_index() const { return root / "rules" / "rules.json"; }
    std::filesystem::path failures() const { return root / "rules" / "failures.json"; }
    std::filesystem::path verdicts() const { return root / "scan" / "verdicts.json"; }
    std::filesystem::path findings() const { return root / "scan" / "findings.jsonl"; }
    std::filesystem::path tallies() const { return root / "scan" / "tallies.json"; }
    std::filesystem::path metrics() const { return root / "eval" / "metrics.json"; }
    std::filesystem::path metrics_csv() const { return root / "eval" / "metrics.csv"; }
    std::filesystem::path baseline_dir() const { return root / "baseline"; }
    std::filesystem::path baseline_index() const { return root / "baseline" / "rules.json"; }
    std::filesystem::path analysis_dir() const { return root / "analysis"; }
    std::filesystem::path manifest() const { return root / "manifest.json"; }
};

struct UnitRecord {
    std::string package;
    corpus::Label label = corpus::Label::unknown;
    std::size_t unit_id = 0;  // per package
    seg::BasicUnit unit;
};

struct FlagRecord {
    std::string package;
    corpus::Label label = corpus::Label::unknown;
    std::vector<seg::MetadataFlag> flags;
};

struct ClusterInfo {
    int id = 0;
    double intra_similarity = 0.0;
    bool retained = false;
    std::vector<cluster::MemberRef> members;
    std::vector<cluster::MemberRef> representatives;  // filled for retained clusters
};

// backend factories driven by the config
std::unique_ptr<llm::LlmBackend> make_llm_backend(const config::RunConfig& cfg);
std::unique_ptr<embed::EmbedderBackend> make_embedder(const config::RunConfig& cfg);
llm::PromptTemplates load_templates(const config::RunConfig& cfg);

/// tokenize -> split at the segment threshold -> embed -> mean-aggregate.
embed::CodeVector embed_unit(const seg::BasicUnit& unit, std::size_t segment_threshold,
                             embed::EmbedderBackend& backend);

// stages; each throws Error{StageInputMissing} when its inputs are absent
void stage_ingest(const config::RunConfig& cfg);
void stage_segment(const config::RunConfig& cfg);
void stage_cluster(const config::RunConfig& cfg);
void stage_generate(const config::RunConfig& cfg);
void stage_generate_with(const config::RunConfig& cfg, llm::LlmBackend& backend);
void stage_scan(const config::RunConfig& cfg);
void stage_eval(const config::RunConfig& cfg);
void stage_baseline(const config::RunConfig& cfg);
void stage_analyze(const config::RunConfig& cfg);

/// All stages in order: ingest, segment, cluster, generate, scan, eval,
/// baseline, analyze.
void run_pipeline(const config::RunConfig& cfg);
void run_pipeline_with(const config::RunConfig& cfg, llm::LlmBackend& backend);

// artifact loaders (shared by stages, the CLI, and tests)
std::vector<UnitRecord> load_units(const std::filesystem::path& path);
std::vector<FlagRecord> load_flags(const std::filesystem::path& path);
std::vector<ClusterInfo> load_clusters(const std::filesystem::path& path);
std::vector<rules::Rule> load_rules_index(const std::filesystem::path& path);

}  // namespace rulegen::pipeline
