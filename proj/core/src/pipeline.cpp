// SPDX-License-Identifier: Apache-2.0
#include "rulegen/pipeline.hpp"

#include <algorithm>
#include <map>
#include <nlohmann/json.hpp>
#include <set>

#include "rulegen/analytics.hpp"
#include "rulegen/baseline.hpp"
#include "rulegen/embedded_data.hpp"
#include "rulegen/matcher.hpp"
#include "rulegen/semgrep.hpp"
#include "rulegen/strutil.hpp"
#include "rulegen/util.hpp"
#include "rulegen/validator.hpp"
#include "rulegen/yara.hpp"

namespace rulegen::pipeline {

using nlohmann::json;
using rules::Rule;
using rules::RuleFormat;

namespace {

RunPaths paths_of(const config::RunConfig& cfg) {
    return RunPaths{std::filesystem::path(cfg.output_dir)};
}

void require(const std::filesystem::path& path, const std::string& producer) {
    if (!std::filesystem::exists(path)) {
        throw Error(ErrorCode::StageInputMissing,
                    path.string() + " is missing; run `" + producer + "` first");
    }
}

void update_manifest(const RunPaths& paths, const config::RunConfig& cfg,
                     const std::string& stage, const json& summary) {
    json manifest;
    if (std::filesystem::exists(paths.manifest())) {
        manifest = json::parse(read_file(paths.manifest()));
    } else {
        manifest = json{{"config", json::parse(cfg.to_json_text())},
                        {"config_digest", cfg.digest()},
                        {"stages", json::object()}};
    }
    manifest["stages"][stage] = summary;
    write_file(paths.manifest(), manifest.dump(2) + "\n");
}

std::vector<std::string> load_name_list(const std::string& file, std::string_view builtin) {
    std::string text = file.empty() ? std::string(builtin) : read_file(file);
    std::vector<std::string> names;
    for (const auto& line : split_lines(text)) {
        std::string name = trim(line);
        if (!name.empty() && name.front() != '#') {
            names.push_back(name);
        }
    }
    return names;
}

corpus::Label label_from_string(const std::string& s) {
    if (s == "malicious") {
        return corpus::Label::malicious;
    }
    if (s == "legitimate") {
        return corpus::Label::legitimate;
    }
    return corpus::Label::unknown;
}

json scores_to_json(const rules::RuleScores& scores) {
    json j;
    j["confidence"] = scores.confidence ? json(*scores.confidence) : json(nullptr);
    j["maliciousness"] = scores.maliciousness ? json(*scores.maliciousness) : json(nullptr);
    j["risk"] = scores.risk ? json(*scores.risk) : json(nullptr);
    return j;
}

rules::RuleScores scores_from_json(const json& j) {
    rules::RuleScores scores;
    if (j.contains("confidence") && j["confidence"].is_number()) {
        scores.confidence = j["confidence"].get<double>();
    }
    if (j.contains("maliciousness") && j["maliciousness"].is_number()) {
        scores.maliciousness = j["maliciousness"].get<double>();
    }
    if (j.contains("risk") && j["risk"].is_number()) {
        scores.risk = j["risk"].get<double>();
    }
    return scores;
}

}  // namespace

std::unique_ptr<llm::LlmBackend> make_llm_backend(const config::RunConfig& cfg) {
    if (cfg.llm_backend == "replay") {
        return std::make_unique<llm::ReplayBackend>(cfg.replay_file);
    }
    auto remote = std::make_unique<llm::RemoteChatBackend>(
        cfg.llm_endpoint, cfg.llm_model, cfg.llm_temperature, cfg.llm_max_tokens,
        cfg.llm_api_key_env);
    if (cfg.llm_backend == "record") {
        // record wraps the remote backend; the wrapper owns nothing
        struct Owning : llm::LlmBackend {
            std::unique_ptr<llm::LlmBackend> inner;
            std::unique_ptr<llm::RecordBackend> recorder;
            std::string id() const override { return recorder->id(); }
            std::string complete_text(const llm::Prompt& p) override {
                return recorder->complete_text(p);
            }
        };
        auto owning = std::make_unique<Owning>();
        owning->inner = std::move(remote);
        owning->recorder = std::make_unique<llm::RecordBackend>(*owning->inner, cfg.record_file);
        return owning;
    }
    return remote;
}

std::unique_ptr<embed::EmbedderBackend> make_embedder(const config::RunConfig& cfg) {
    if (cfg.embed_backend == "remote") {
        return std::make_unique<embed::RemoteEmbedder>(cfg.embed_endpoint, cfg.embed_dim,
                                                       cfg.embed_api_key_env);
    }
    return std::make_unique<embed::HashedBagEmbedder>(cfg.embed_dim);
}

llm::PromptTemplates load_templates(const config::RunConfig& cfg) {
    if (!cfg.template_dir.empty()) {
        return llm::PromptTemplates::from_dir(cfg.template_dir);
    }
    return llm::PromptTemplates::builtin();
}

embed::CodeVector embed_unit(const seg::BasicUnit& unit, std::size_t segment_threshold,
                             embed::EmbedderBackend& backend) {
    corpus::SourceFile pseudo;
    pseudo.relative_path = unit.file;
    pseudo.content = unit.text;
    auto tokens = seg::tokenize_source(pseudo);
    if (tokens.empty()) {
        // whitespace-only unit: zero vector keeps indexes aligned
        embed::CodeVector zero;
        zero.values.assign(backend.dim(), 0.0);
        zero.source = unit.file;
        return zero;
    }
    auto segments = seg::split_segments(tokens, unit.file, segment_threshold);
    std::vector<embed::CodeVector> vectors;
    vectors.reserve(segments.size());
    for (const auto& segment : segments) {
        vectors.push_back(embed::embed_segment(segment, backend));
    }
    return embed::aggregate_vectors(vectors, embed::AggregateMode::mean);
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

void stage_ingest(const config::RunConfig& cfg) {
    RunPaths paths = paths_of(cfg);
    std::vector<std::pair<std::filesystem::path, corpus::Label>> archives;
    auto collect = [&](const std::string& dir, corpus::Label label) {
        if (dir.empty()) {
            return;
        }
        if (!std::filesystem::exists(dir)) {
            throw Error(ErrorCode::ConfigError, "corpus directory not found: " + dir);
        }
        std::vector<std::filesystem::path> found;
        for (const auto& entry : std::filesystem::directory_iterator(dir)) {
            if (entry.is_regular_file()) {
                found.push_back(entry.path());
            }
        }
        std::sort(found.begin(), found.end());
        for (auto& p : found) {
            archives.emplace_back(std::move(p), label);
        }
    };
    collect(cfg.malicious_dir, corpus::Label::malicious);
    collect(cfg.legitimate_dir, corpus::Label::legitimate);
    if (archives.empty()) {
        throw Error(ErrorCode::ConfigError, "no archives found under the corpus directories");
    }

    std::vector<corpus::PackageRecord> records;
    json dropped = json::array();
    for (const auto& [path, label] : archives) {
        corpus::PackageArchive archive{path, cfg.ecosystem, label};
        try {
            auto record =
                corpus::unpack_package(archive, paths.extracted() / path.stem().stem().string());
            try {
                record.metadata = corpus::extract_metadata(record, cfg.registry);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::NoMetadataFound) {
                    throw;
                }
                record.metadata.name = corpus::package_name_from_stem(record.archive_stem);
            }
            records.push_back(std::move(record));
        } catch (const Error& e) {
            // hostile or broken archive: drop this package, keep the corpus
            dropped.push_back({{"archive", path.filename().string()}, {"error", e.what()}});
        }
    }
    std::size_t before = records.size();
    records = corpus::dedup_corpus(records);

    // disambiguate duplicate names so downstream keys stay unique
    std::map<std::string, int> seen;
    for (auto& record : records) {
        int n = ++seen[record.metadata.name];
        if (n > 1) {
            record.metadata.name += "~" + std::to_string(n);
        }
    }
    corpus::save_records(paths.records(), records);

    std::size_t malicious = 0;
    for (const auto& r : records) {
        malicious += r.label == corpus::Label::malicious ? 1 : 0;
    }
    update_manifest(paths, cfg, "ingest",
                    json{{"archives", archives.size()},
                         {"unpacked", before},
                         {"after_dedup", records.size()},
                         {"malicious", malicious},
                         {"dropped", dropped}});
}

// ---------------------------------------------------------------------------
// segment
// ---------------------------------------------------------------------------

void stage_segment(const config::RunConfig& cfg) {
    RunPaths paths = paths_of(cfg);
    require(paths.records(), "ingest");
    auto records = corpus::load_records(paths.records());

    auto popular = load_name_list(cfg.popular_packages_file, data::popular_packages());
    auto denylist = load_name_list(cfg.denylist_file, data::dependency_denylist());

    json units = json::array();
    json flags = json::array();
    std::size_t unit_count = 0;
    std::size_t flagged_packages = 0;
    for (const auto& record : records) {
        std::size_t unit_id = 0;
        for (const auto& file : record.files) {
            for (const auto& unit : seg::extract_basic_units(file, cfg.unit_char_cap)) {
                units.push_back({{"package", record.metadata.name},
                                 {"label", corpus::to_string(record.label)},
                                 {"unit_id", unit_id},
                                 {"file", unit.file},
                                 {"kind", seg::to_string(unit.kind)},
                                 {"start_line", unit.start_line},
                                 {"end_line", unit.end_line},
                                 {"char_len", unit.char_len},
                                 {"text", unit.text}});
                ++unit_id;
                ++unit_count;
            }
        }
        auto package_flags = seg::audit_metadata(record.metadata, popular, denylist, cfg.audit);
        json flag_list = json::array();
        for (const auto& f : package_flags) {
            flag_list.push_back({{"kind", seg::to_string(f.kind)}, {"evidence", f.evidence}});
        }
        flagged_packages += package_flags.empty() ? 0 : 1;
        flags.push_back({{"package", record.metadata.name},
                         {"label", corpus::to_string(record.label)},
                         {"flags", flag_list}});
    }
    write_file(paths.units(), units.dump(2) + "\n");
    write_file(paths.flags(), flags.dump(2) + "\n");
    update_manifest(paths, cfg, "segment",
                    json{{"packages", records.size()},
                         {"units", unit_count},
                         {"flagged_packages", flagged_packages}});
}

std::vector<UnitRecord> load_units(const std::filesystem::path& path) {
    json doc = json::parse(read_file(path));
    std::vector<UnitRecord> out;
    for (const auto& j : doc) {
        UnitRecord record;
        record.package = j.at("package").get<std::string>();
        record.label = label_from_string(j.value("label", "unknown"));
        record.unit_id = j.at("unit_id").get<std::size_t>();
        record.unit.file = j.at("file").get<std::string>();
        record.unit.text = j.at("text").get<std::string>();
        record.unit.start_line = j.value("start_line", std::size_t{0});
        record.unit.end_line = j.value("end_line", std::size_t{0});
        record.unit.char_len = j.value("char_len", record.unit.text.size());
        std::string kind = j.value("kind", "module_prelude");
        for (auto k : {seg::UnitKind::module_prelude, seg::UnitKind::function,
                       seg::UnitKind::class_def, seg::UnitKind::control_block,
                       seg::UnitKind::overflow_chunk}) {
            if (kind == seg::to_string(k)) {
                record.unit.kind = k;
            }
        }
        out.push_back(std::move(record));
    }
    return out;
}

std::vector<FlagRecord> load_flags(const std::filesystem::path& path) {
    json doc = json::parse(read_file(path));
    std::vector<FlagRecord> out;
    for (const auto& j : doc) {
        FlagRecord record;
        record.package = j.at("package").get<std::string>();
        record.label = label_from_string(j.value("label", "unknown"));
        for (const auto& f : j.at("flags")) {
            seg::MetadataFlag flag;
            std::string kind = f.at("kind").get<std::string>();
            for (auto k : {seg::FlagKind::empty_information, seg::FlagKind::release_zero,
                           seg::FlagKind::typosquatting, seg::FlagKind::malicious_dependency}) {
                if (kind == seg::to_string(k)) {
                    flag.kind = k;
                }
            }
            flag.evidence = f.at("evidence").get<std::string>();
            record.flags.push_back(std::move(flag));
        }
        out.push_back(std::move(record));
    }
    return out;
}

// ---------------------------------------------------------------------------
// cluster
// ---------------------------------------------------------------------------

namespace {

struct UnitVectors {
    std::vector<embed::CodeVector> vectors;
    std::vector<cluster::MemberRef> refs;
    std::vector<std::size_t> unit_indexes;  // into the loaded unit list
};

UnitVectors vectorize_units(const std::vector<UnitRecord>& units, corpus::Label wanted,
                            const config::RunConfig& cfg, embed::EmbedderBackend& backend) {
    UnitVectors out;
    for (std::size_t i = 0; i < units.size(); ++i) {
        if (units[i].label != wanted) {
            continue;
        }
        out.vectors.push_back(embed_unit(units[i].unit, cfg.segment_threshold, backend));
        out.refs.push_back({units[i].package, units[i].unit.file, units[i].unit_id});
        out.unit_indexes.push_back(i);
    }
    return out;
}

cluster::SimilarityKind similarity_kind(const config::RunConfig& cfg) {
    return cfg.similarity == "cosine_mean" ? cluster::SimilarityKind::cosine_mean
                                           : cluster::SimilarityKind::inverse_distance;
}

}  // namespace

void stage_cluster(const config::RunConfig& cfg) {
    RunPaths paths = paths_of(cfg);
    require(paths.units(), "segment");
    auto units = load_units(paths.units());
    auto backend = make_embedder(cfg);
    UnitVectors mal = vectorize_units(units, corpus::Label::malicious, cfg, *backend);
    if (mal.vectors.empty()) {
        throw Error(ErrorCode::EmptyInput, "no malicious units to cluster");
    }
    std::size_t k = cfg.k != 0 ? cfg.k : cluster::default_k(mal.vectors.size());
    k = std::min(k, mal.vectors.size());
    auto clusters =
        cluster::kmeans(mal.vectors, k, cfg.seed, cfg.max_iter, similarity_kind(cfg));

    json cluster_list = json::array();
    std::size_t retained_count = 0;
    for (const auto& c : clusters) {
        bool retained = c.intra_similarity >= cfg.intra_similarity_threshold;
        retained_count += retained ? 1 : 0;
        json members = json::array();
        for (std::size_t idx : c.member_indexes) {
            members.push_back({{"package", mal.refs[idx].package},
                               {"file", mal.refs[idx].file},
                               {"unit_id", mal.refs[idx].unit_id}});
        }
        json representatives = json::array();
        if (retained) {
            for (std::size_t idx :
                 cluster::select_representatives(c, mal.vectors, mal.refs, cfg.representatives)) {
                representatives.push_back({{"package", mal.refs[idx].package},
                                           {"file", mal.refs[idx].file},
                                           {"unit_id", mal.refs[idx].unit_id}});
            }
        }
        cluster_list.push_back({{"id", c.id},
                                {"intra_similarity", c.intra_similarity},
                                {"retained", retained},
                                {"members", members},
                                {"representatives", representatives}});
    }
    json doc{{"k", k},
             {"seed", cfg.seed},
             {"max_iter", cfg.max_iter},
             {"similarity", cfg.similarity},
             {"threshold", cfg.intra_similarity_threshold},
             {"embedder", backend->id()},
             {"clusters", cluster_list}};
    write_file(paths.clusters(), doc.dump(2) + "\n");
    update_manifest(paths, cfg, "cluster",
                    json{{"unit_vectors", mal.vectors.size()},
                         {"k", k},
                         {"clusters", clusters.size()},
                         {"retained", retained_count},
                         {"embedder", backend->id()}});
}

std::vector<ClusterInfo> load_clusters(const std::filesystem::path& path) {
    json doc = json::parse(read_file(path));
    std::vector<ClusterInfo> out;
    for (const auto& j : doc.at("clusters")) {
        ClusterInfo info;
        info.id = j.at("id").get<int>();
        info.intra_similarity = j.at("intra_similarity").get<double>();
        info.retained = j.at("retained").get<bool>();
        for (const auto& m : j.at("members")) {
            info.members.push_back({m.at("package").get<std::string>(),
                                    m.at("file").get<std::string>(),
                                    m.at("unit_id").get<std::size_t>()});
        }
        for (const auto& m : j.at("representatives")) {
            info.representatives.push_back({m.at("package").get<std::string>(),
                                            m.at("file").get<std::string>(),
                                            m.at("unit_id").get<std::size_t>()});
        }
        out.push_back(std::move(info));
    }
    return out;
}

// ---------------------------------------------------------------------------
// generate (craft -> refine -> align)
// ---------------------------------------------------------------------------

namespace {

struct GenerateState {
    json rule_entries = json::array();
    json failure_entries = json::array();
    std::set<std::string> used_names;
    std::size_t crafted = 0;
    std::size_t aligned = 0;
};

std::string unique_rule_name(Rule& rule, GenerateState& state) {
    std::string name = rule.name;
    int suffix = 1;
    while (state.used_names.contains(name)) {
        ++suffix;
        name = rule.name + "_" + std::to_string(suffix);
    }
    if (name != rule.name) {
        if (rule.yara) {
            rule.yara->name = name;
            rule.text = yara::to_text(*rule.yara);
        } else if (rule.semgrep) {
            rule.semgrep->id = name;
            rule.text = semgrep::to_text(*rule.semgrep);
        }
        rule.name = name;
    }
    state.used_names.insert(name);
    return name;
}

void emit_rule(Rule rule, const config::RunConfig& cfg, const RunPaths& paths,
               GenerateState& state) {
    std::string name = unique_rule_name(rule, state);
    bool yara_fmt = rule.format == RuleFormat::yara;
    std::filesystem::path file = paths.rules_dir() / (yara_fmt ? "yara" : "semgrep") /
                                 (name + (yara_fmt ? ".yar" : ".yaml"));
    write_file(file, validate::render_rule_file(rule.text, cfg.validator));
    state.rule_entries.push_back({{"name", name},
                                  {"format", rules::to_string(rule.format)},
                                  {"file", file.lexically_relative(paths.root).string()},
                                  {"provenance",
                                   {{"origin", rule.provenance.origin},
                                    {"detail", rule.provenance.detail},
                                    {"attempts", rule.provenance.attempts}}},
                                  {"scores", scores_to_json(rule.scores)},
                                  {"text", rule.text}});
    ++state.aligned;
}

void record_failure(const validate::AlignmentFailure& failure, GenerateState& state) {
    json history = json::array();
    for (const auto& errors : failure.history) {
        json list = json::array();
        for (const auto& e : errors) {
            list.push_back({{"code", rules::to_string(e.code)}, {"message", e.message}});
        }
        history.push_back(list);
    }
    state.failure_entries.push_back({{"origin", failure.draft.provenance.origin},
                                     {"format", rules::to_string(failure.draft.rule_format)},
                                     {"attempts", failure.attempts},
                                     {"history", history},
                                     {"last_rule_text", failure.last_rule_text}});
}

// craft -> refine -> align for one prompt; returns false when the craft or
// refine response had no parsable rule
bool run_chain(const llm::Prompt& craft_prompt, const rules::Provenance& provenance,
               RuleFormat format, llm::LlmBackend& backend, const llm::PromptTemplates& templates,
               const config::RunConfig& cfg, const RunPaths& paths, GenerateState& state) {
    llm::RuleDraft draft;
    try {
        draft = llm::parse_rule_output(llm::complete(craft_prompt, backend), format);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NoRuleFound) {
            throw;
        }
        state.failure_entries.push_back({{"origin", provenance.origin},
                                         {"format", rules::to_string(format)},
                                         {"attempts", 0},
                                         {"history", json::array()},
                                         {"last_rule_text", ""},
                                         {"error", "craft produced no rule"}});
        return false;
    }
    draft.provenance = provenance;
    ++state.crafted;

    // refine; an unusable refine response keeps the craft draft
    try {
        std::string analysis = draft.analysis_text.empty() ? "(none)" : draft.analysis_text;
        llm::Prompt refine_prompt =
            llm::build_refine_prompt(analysis, draft.rule_text, format, templates);
        llm::RuleDraft refined =
            llm::parse_rule_output(llm::complete(refine_prompt, backend), format);
        draft.rule_text = refined.rule_text;
        if (!refined.analysis_text.empty()) {
            draft.analysis_text = refined.analysis_text;
        }
        if (refined.scores.confidence) {
            draft.scores.confidence = refined.scores.confidence;
        }
        if (refined.scores.maliciousness) {
            draft.scores.maliciousness = refined.scores.maliciousness;
        }
        if (refined.scores.risk) {
            draft.scores.risk = refined.scores.risk;
        }
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NoRuleFound) {
            throw;
        }
    }

    auto result = validate::align_rule(draft, backend, templates, cfg.validator);
    if (std::holds_alternative<Rule>(result)) {
        emit_rule(std::get<Rule>(std::move(result)), cfg, paths, state);
        return true;
    }
    record_failure(std::get<validate::AlignmentFailure>(result), state);
    return false;
}

}  // namespace

void stage_generate_with(const config::RunConfig& cfg, llm::LlmBackend& backend) {
    RunPaths paths = paths_of(cfg);
    require(paths.units(), "segment");
    require(paths.flags(), "segment");
    require(paths.clusters(), "cluster");
    require(paths.records(), "ingest");

    auto units = load_units(paths.units());
    auto flags = load_flags(paths.flags());
    auto clusters = load_clusters(paths.clusters());
    auto records = corpus::load_records(paths.records());
    llm::PromptTemplates templates = load_templates(cfg);

    std::map<std::pair<std::string, std::size_t>, const UnitRecord*> unit_index;
    for (const auto& u : units) {
        unit_index[{u.package, u.unit_id}] = &u;
    }
    std::map<std::string, const corpus::PackageRecord*> record_index;
    for (const auto& r : records) {
        record_index[r.metadata.name] = &r;
    }

    std::vector<RuleFormat> formats;
    if (cfg.want_yara()) {
        formats.push_back(RuleFormat::yara);
    }
    if (cfg.want_semgrep()) {
        formats.push_back(RuleFormat::semgrep);
    }

    GenerateState state;

    // code rules: one chain per retained cluster and format
    for (const auto& info : clusters) {
        if (!info.retained || info.representatives.empty()) {
            continue;
        }
        std::vector<seg::BasicUnit> rep_units;
        std::string detail;
        for (const auto& ref : info.representatives) {
            auto it = unit_index.find({ref.package, ref.unit_id});
            if (it == unit_index.end()) {
                continue;
            }
            rep_units.push_back(it->second->unit);
            if (!detail.empty()) {
                detail += ",";
            }
            detail += ref.package + ":" + ref.file + "#" + std::to_string(ref.unit_id);
        }
        if (rep_units.empty()) {
            continue;
        }
        for (RuleFormat format : formats) {
            rules::Provenance provenance;
            provenance.origin = "cluster:" + std::to_string(info.id);
            provenance.detail = detail;
            llm::Prompt prompt = llm::build_craft_prompt(rep_units, format, templates);
            run_chain(prompt, provenance, format, backend, templates, cfg, paths, state);
        }
    }

    // metadata rules: one chain per flagged malicious package and format
    for (const auto& flag_record : flags) {
        if (flag_record.label != corpus::Label::malicious || flag_record.flags.empty()) {
            continue;
        }
        auto it = record_index.find(flag_record.package);
        if (it == record_index.end()) {
            continue;
        }
        std::string detail;
        for (const auto& f : flag_record.flags) {
            if (!detail.empty()) {
                detail += ",";
            }
            detail += seg::to_string(f.kind);
        }
        for (RuleFormat format : formats) {
            rules::Provenance provenance;
            provenance.origin = "metadata:" + flag_record.package;
            provenance.detail = detail;
            llm::Prompt prompt = llm::build_craft_prompt(it->second->metadata, flag_record.flags,
                                                         format, templates);
            run_chain(prompt, provenance, format, backend, templates, cfg, paths, state);
        }
    }

    write_file(paths.rules_index(), state.rule_entries.dump(2) + "\n");
    write_file(paths.failures(), state.failure_entries.dump(2) + "\n");
    update_manifest(paths, cfg, "generate",
                    json{{"backend", backend.id()},
                         {"crafted", state.crafted},
                         {"emitted", state.rule_entries.size()},
                         {"failures", state.failure_entries.size()}});
}

void stage_generate(const config::RunConfig& cfg) {
    auto backend = make_llm_backend(cfg);
    stage_generate_with(cfg, *backend);
}

std::vector<Rule> load_rules_index(const std::filesystem::path& path) {
    json doc = json::parse(read_file(path));
    std::vector<Rule> out;
    for (const auto& j : doc) {
        std::string text = j.at("text").get<std::string>();
        RuleFormat format = j.at("format").get<std::string>() == "yara" ? RuleFormat::yara
                                                                        : RuleFormat::semgrep;
        auto outcome = validate::compile_rule(text, format);
        if (!std::holds_alternative<Rule>(outcome)) {
            throw Error(ErrorCode::IoError,
                        "rule index entry no longer compiles: " + j.at("name").get<std::string>());
        }
        Rule rule = std::get<Rule>(std::move(outcome));
        rule.scores = scores_from_json(j.at("scores"));
        rule.provenance.origin = j.at("provenance").value("origin", "");
        rule.provenance.detail = j.at("provenance").value("detail", "");
        rule.provenance.attempts = j.at("provenance").value("attempts", 0);
        out.push_back(std::move(rule));
    }
    return out;
}

// ---------------------------------------------------------------------------
// scan / eval
// ---------------------------------------------------------------------------

namespace {

json run_scan(const std::vector<Rule>& rule_set, const std::vector<corpus::PackageRecord>& records,
              const config::RunConfig& cfg, const std::filesystem::path& verdicts_path,
              const std::filesystem::path& findings_path,
              const std::filesystem::path& tallies_path) {
    match::CorpusScan scan = match::scan_corpus(rule_set, records, cfg.matcher, cfg.jobs);

    json verdicts = json::array();
    for (const auto& v : scan.verdicts) {
        verdicts.push_back({{"package", v.package},
                            {"matched_rules", std::vector<std::string>(v.matched_rules.begin(),
                                                                       v.matched_rules.end())},
                            {"matched_count", v.matched_count},
                            {"predicted", v.predicted},
                            {"label", corpus::to_string(v.label)}});
    }
    write_file(verdicts_path, verdicts.dump(2) + "\n");

    std::string findings;
    for (const auto& f : scan.findings) {
        findings += json{{"rule", f.rule_id},
                         {"package", f.package},
                         {"file", f.file},
                         {"offsets", f.offsets}}
                        .dump() +
                    "\n";
    }
    write_file(findings_path, findings);

    std::map<std::string, corpus::Label> labels;
    for (const auto& r : records) {
        labels[r.metadata.name] = r.label;
    }
    json tallies = json::object();
    for (const auto& rule : rule_set) {
        json mal = json::array();
        json legit = json::array();
        auto it = scan.rule_matches.find(rule.name);
        if (it != scan.rule_matches.end()) {
            for (const auto& package : it->second) {
                if (labels[package] == corpus::Label::malicious) {
                    mal.push_back(package);
                } else {
                    legit.push_back(package);
                }
            }
        }
        tallies[rule.name] = {{"malicious", mal}, {"legitimate", legit}};
    }
    write_file(tallies_path, tallies.dump(2) + "\n");

    return json{{"rules", rule_set.size()},
                {"packages", records.size()},
                {"findings", scan.findings.size()},
                {"timeouts", scan.stats.timeouts},
                {"approximate_semgrep", scan.stats.approximate_semgrep},
                {"threshold", cfg.matcher.threshold}};
}

std::vector<match::PackageVerdict> load_verdicts(const std::filesystem::path& path) {
    json doc = json::parse(read_file(path));
    std::vector<match::PackageVerdict> out;
    for (const auto& j : doc) {
        match::PackageVerdict v;
        v.package = j.at("package").get<std::string>();
        for (const auto& r : j.at("matched_rules")) {
            v.matched_rules.insert(r.get<std::string>());
        }
        v.matched_count = j.at("matched_count").get<std::size_t>();
        v.predicted = j.at("predicted").get<bool>();
        v.label = label_from_string(j.at("label").get<std::string>());
        out.push_back(std::move(v));
    }
    return out;
}

json metrics_to_json(const analytics::Metrics& m) {
    json j{{"tp", m.tp}, {"fp", m.fp}, {"tn", m.tn}, {"fn", m.fn}, {"accuracy", m.accuracy}};
    j["precision"] = m.precision ? json(*m.precision) : json(nullptr);
    j["recall"] = m.recall ? json(*m.recall) : json(nullptr);
    j["f1"] = m.f1 ? json(*m.f1) : json(nullptr);
    j["accuracy_pct"] = analytics::Metrics::percent(m.accuracy);
    j["precision_pct"] = analytics::Metrics::percent(m.precision);
    j["recall_pct"] = analytics::Metrics::percent(m.recall);
    j["f1_pct"] = analytics::Metrics::percent(m.f1);
    return j;
}

}  // namespace

void stage_scan(const config::RunConfig& cfg) {
    RunPaths paths = paths_of(cfg);
    require(paths.rules_index(), "generate");
    require(paths.records(), "ingest");
    auto rule_set = load_rules_index(paths.rules_index());
    auto records = corpus::load_records(paths.records());
    json summary =
        run_scan(rule_set, records, cfg, paths.verdicts(), paths.findings(), paths.tallies());
    update_manifest(paths, cfg, "scan", summary);
}

void stage_eval(const config::RunConfig& cfg) {
    RunPaths paths = paths_of(cfg);
    require(paths.verdicts(), "scan");
    auto verdicts = load_verdicts(paths.verdicts());
    analytics::Metrics metrics = analytics::confusion_metrics(verdicts);
    write_file(paths.metrics(), metrics_to_json(metrics).dump(2) + "\n");
    std::string csv = "metric,value\n";
    csv += "accuracy," + analytics::Metrics::percent(metrics.accuracy) + "\n";
    csv += "precision," + analytics::Metrics::percent(metrics.precision) + "\n";
    csv += "recall," + analytics::Metrics::percent(metrics.recall) + "\n";
    csv += "f1," + analytics::Metrics::percent(metrics.f1) + "\n";
    write_file(paths.metrics_csv(), csv);
    update_manifest(paths, cfg, "eval", metrics_to_json(metrics));
}

// ---------------------------------------------------------------------------
// baseline
// ---------------------------------------------------------------------------

void stage_baseline(const config::RunConfig& cfg) {
    RunPaths paths = paths_of(cfg);
    require(paths.units(), "segment");
    require(paths.records(), "ingest");
    auto units = load_units(paths.units());
    auto records = corpus::load_records(paths.records());
    auto backend = make_embedder(cfg);

    std::map<std::pair<std::string, std::string>, const corpus::SourceFile*> file_index;
    for (const auto& r : records) {
        for (const auto& f : r.files) {
            file_index[{r.metadata.name, f.relative_path}] = &f;
        }
    }

    auto cluster_label = [&](corpus::Label label) {
        UnitVectors uv = vectorize_units(units, label, cfg, *backend);
        std::vector<cluster::CodeCluster> kept;
        if (uv.vectors.empty()) {
            return std::pair{uv, kept};
        }
        std::size_t k = cfg.k != 0 ? cfg.k : cluster::default_k(uv.vectors.size());
        k = std::min(k, uv.vectors.size());
        auto clusters =
            cluster::kmeans(uv.vectors, k, cfg.baseline_scoring.seed, cfg.max_iter,
                            similarity_kind(cfg));
        kept = cluster::filter_clusters(clusters, cfg.intra_similarity_threshold);
        return std::pair{uv, kept};
    };
    auto [mal_units, mal_clusters] = cluster_label(corpus::Label::malicious);
    auto [legit_units, legit_clusters] = cluster_label(corpus::Label::legitimate);

    json rule_entries = json::array();
    json skipped = json::array();
    std::vector<Rule> baseline_rules;
    auto files_of = [&](const UnitVectors& uv, const cluster::CodeCluster& c) {
        std::set<std::pair<std::string, std::string>> keys;
        for (std::size_t idx : c.member_indexes) {
            keys.insert({uv.refs[idx].package, uv.refs[idx].file});
        }
        std::vector<corpus::SourceFile> files;
        for (const auto& key : keys) {
            auto it = file_index.find(key);
            if (it != file_index.end()) {
                files.push_back(*it->second);
            }
        }
        return files;
    };

    for (const auto& mc : mal_clusters) {
        for (const auto& lc : legit_clusters) {
            std::string group_id = std::to_string(mc.id) + "_" + std::to_string(lc.id);
            try {
                auto scored = baseline::score_strings(files_of(mal_units, mc),
                                                      files_of(legit_units, lc),
                                                      cfg.baseline_scoring);
                baseline::TemplateConfig tpl;
                tpl.rule_name = "baseline_" + group_id;
                tpl.group_id = group_id;
                tpl.date = cfg.baseline_date;
                tpl.threshold = cfg.baseline_threshold;
                if (!cfg.baseline_template_file.empty()) {
                    tpl.template_text = read_file(cfg.baseline_template_file);
                }
                Rule rule = baseline::generate_baseline_rule(scored, tpl);
                std::filesystem::path file = paths.baseline_dir() / (rule.name + ".yar");
                write_file(file, validate::render_rule_file(rule.text, cfg.validator));
                rule_entries.push_back({{"name", rule.name},
                                        {"format", "yara"},
                                        {"file", file.lexically_relative(paths.root).string()},
                                        {"provenance",
                                         {{"origin", rule.provenance.origin},
                                          {"detail", ""},
                                          {"attempts", 0}}},
                                        {"scores", scores_to_json(rule.scores)},
                                        {"text", rule.text}});
                baseline_rules.push_back(std::move(rule));
            } catch (const Error& e) {
                if (e.code() == ErrorCode::NoSignal || e.code() == ErrorCode::DegenerateCorpus) {
                    skipped.push_back({{"group", group_id}, {"reason", e.what()}});
                } else {
                    throw;
                }
            }
        }
    }
    write_file(paths.baseline_index(), rule_entries.dump(2) + "\n");

    json scan_summary = json();
    if (!baseline_rules.empty()) {
        scan_summary = run_scan(baseline_rules, records, cfg,
                                paths.baseline_dir() / "verdicts.json",
                                paths.baseline_dir() / "findings.jsonl",
                                paths.baseline_dir() / "tallies.json");
        auto verdicts = load_verdicts(paths.baseline_dir() / "verdicts.json");
        analytics::Metrics metrics = analytics::confusion_metrics(verdicts);
        write_file(paths.baseline_dir() / "metrics.json", metrics_to_json(metrics).dump(2) + "\n");
    }
    update_manifest(paths, cfg, "baseline",
                    json{{"mal_clusters", mal_clusters.size()},
                         {"legit_clusters", legit_clusters.size()},
                         {"rules", rule_entries.size()},
                         {"skipped", skipped},
                         {"scan", scan_summary}});
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

void stage_analyze(const config::RunConfig& cfg) {
    RunPaths paths = paths_of(cfg);
    require(paths.rules_index(), "generate");
    require(paths.tallies(), "scan");
    auto rule_set = load_rules_index(paths.rules_index());
    json tallies_doc = json::parse(read_file(paths.tallies()));

    std::vector<analytics::RuleTally> tallies;
    std::map<std::string, std::size_t> malicious_coverage;
    for (const auto& rule : rule_set) {
        analytics::RuleTally tally;
        tally.rule_id = rule.name;
        if (tallies_doc.contains(rule.name)) {
            for (const auto& p : tallies_doc[rule.name]["malicious"]) {
                tally.matched_malicious.insert(p.get<std::string>());
            }
            for (const auto& p : tallies_doc[rule.name]["legitimate"]) {
                tally.matched_legitimate.insert(p.get<std::string>());
            }
        }
        malicious_coverage[rule.name] = tally.matched_malicious.size();
        tallies.push_back(std::move(tally));
    }

    // per-rule precision
    auto precision_report = analytics::per_rule_precision(tallies);
    std::string precision_csv = "rule_id,bucket,matched_count,precision\n";
    for (const auto& rp : precision_report.matched) {
        precision_csv += rp.rule_id + ",matched," + std::to_string(rp.matched_count) + "," +
                         format_fixed(*rp.precision, 6) + "\n";
    }
    for (const auto& name : precision_report.unmatched) {
        precision_csv += name + ",unmatched,0,\n";
    }
    write_file(paths.analysis_dir() / "per_rule_precision.csv", precision_csv);

    // coverage CDFs per format
    auto coverage_for = [&](RuleFormat format) {
        std::vector<std::size_t> counts;
        for (const auto& rule : rule_set) {
            if (rule.format == format) {
                counts.push_back(malicious_coverage[rule.name]);
            }
        }
        return analytics::coverage_cdf(counts);
    };
    write_file(paths.analysis_dir() / "coverage_cdf_yara.csv",
               analytics::cdf_to_csv(coverage_for(RuleFormat::yara)));
    write_file(paths.analysis_dir() / "coverage_cdf_semgrep.csv",
               analytics::cdf_to_csv(coverage_for(RuleFormat::semgrep)));

    // taxonomy tags, subcategory counts, heatmap
    analytics::Taxonomy taxonomy = cfg.taxonomy_file.empty()
                                       ? analytics::Taxonomy::builtin()
                                       : analytics::Taxonomy::from_file(cfg.taxonomy_file);
    std::vector<std::set<analytics::TaxonomyTag>> tags_per_rule;
    std::string taxonomy_csv = "rule_id,category_id,category,subcategory\n";
    std::map<std::pair<int, std::string>, std::size_t> subcategory_counts;
    std::size_t total_tags = 0;
    for (const auto& rule : rule_set) {
        auto tags = analytics::classify_rule(rule, taxonomy);
        for (const auto& tag : tags) {
            taxonomy_csv += rule.name + "," + std::to_string(tag.category_id) + "," +
                            tag.category + "," + tag.subcategory + "\n";
            ++subcategory_counts[{tag.category_id, tag.subcategory}];
            ++total_tags;
        }
        tags_per_rule.push_back(std::move(tags));
    }
    write_file(paths.analysis_dir() / "taxonomy.csv", taxonomy_csv);
    std::string counts_csv = "category_id,subcategory,count\n";
    for (const auto& [key, count] : subcategory_counts) {
        counts_csv += std::to_string(key.first) + "," + key.second + "," + std::to_string(count) +
                      "\n";
    }
    write_file(paths.analysis_dir() / "subcategory_counts.csv", counts_csv);
    write_file(paths.analysis_dir() / "heatmap.csv",
               analytics::heatmap_to_csv(analytics::category_heatmap(tags_per_rule)));

    // rule score CDFs
    auto cdfs = analytics::score_cdf(rule_set);
    write_file(paths.analysis_dir() / "score_cdf_confidence.csv",
               analytics::score_cdf_to_csv(cdfs.confidence));
    write_file(paths.analysis_dir() / "score_cdf_maliciousness.csv",
               analytics::score_cdf_to_csv(cdfs.maliciousness));
    write_file(paths.analysis_dir() / "score_cdf_risk.csv", analytics::score_cdf_to_csv(cdfs.risk));

    // overlap vs the baseline rule set, when present
    json overlap_json;
    if (std::filesystem::exists(paths.baseline_index())) {
        auto baseline_rules = load_rules_index(paths.baseline_index());
        std::vector<Rule> yara_rules;
        for (const auto& r : rule_set) {
            if (r.format == RuleFormat::yara) {
                yara_rules.push_back(r);
            }
        }
        auto report = analytics::rule_overlap(yara_rules, baseline_rules, cfg.overlap_threshold);
        json pairs = json::array();
        for (const auto& p : report.pairs) {
            pairs.push_back(
                {{"a", p.a_id}, {"b", p.b_id}, {"similarity", p.similarity}});
        }
        overlap_json = json{{"against", "baseline"},
                            {"threshold", cfg.overlap_threshold},
                            {"overlap_count", report.overlap_count},
                            {"pairs", pairs}};
        write_file(paths.analysis_dir() / "overlap.json", overlap_json.dump(2) + "\n");
    }

    json summary{{"rules", rule_set.size()},
                 {"tags_total", total_tags},
                 {"unmatched_rules", precision_report.unmatched.size()},
                 {"absent_scores",
                  {{"confidence", cdfs.absent_confidence},
                   {"maliciousness", cdfs.absent_maliciousness},
                   {"risk", cdfs.absent_risk}}}};
    if (!overlap_json.is_null()) {
        summary["overlap_count"] = overlap_json["overlap_count"];
    }
    write_file(paths.analysis_dir() / "summary.json", summary.dump(2) + "\n");
    update_manifest(paths, cfg, "analyze", summary);
}

// ---------------------------------------------------------------------------

void run_pipeline_with(const config::RunConfig& cfg, llm::LlmBackend& backend) {
    stage_ingest(cfg);
    stage_segment(cfg);
    stage_cluster(cfg);
    stage_generate_with(cfg, backend);
    stage_scan(cfg);
    stage_eval(cfg);
    stage_baseline(cfg);
    stage_analyze(cfg);
}

void run_pipeline(const config::RunConfig& cfg) {
    auto backend = make_llm_backend(cfg);
    run_pipeline_with(cfg, *backend);
}

}  // namespace rulegen::pipeline
