// SPDX-License-Identifier: Apache-2.0
//
// rulegen — pipeline front-end. Stages write their artifacts into the run
// directory from the config; each stage reads the previous stage's files and
// can be re-run independently.
#include <CLI11.hpp>
#include <iostream>
#include <nlohmann/json.hpp>

#include "rulegen/config.hpp"
#include "rulegen/pipeline.hpp"
#include "rulegen/strutil.hpp"
#include "rulegen/util.hpp"
#include "rulegen/validator.hpp"

using nlohmann::json;
using rulegen::Error;
using rulegen::ErrorCode;

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<unsigned> jobs;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> format;
    std::optional<std::size_t> threshold;
    std::optional<std::string> llm_backend;
    std::optional<std::string> record_fixtures;
    bool allow_network = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file")->required();
    cmd->add_option("--jobs", flags.jobs, "worker thread bound");
    cmd->add_option("--seed", flags.seed, "clustering seed override");
    cmd->add_option("--format", flags.format, "rule format: yara|semgrep|both");
    cmd->add_option("--threshold", flags.threshold, "matched-rule count for a positive verdict");
    cmd->add_option("--llm-backend", flags.llm_backend, "llm backend: remote|replay|record");
    cmd->add_option("--record-fixtures", flags.record_fixtures,
                    "record LLM responses to this JSONL file (switches backend to record)");
    cmd->add_flag("--allow-network", flags.allow_network, "permit registry fetches");
}

rulegen::config::RunConfig resolve(const CommonFlags& flags) {
    auto cfg = rulegen::config::RunConfig::load(flags.config_path);
    if (flags.jobs) {
        cfg.jobs = *flags.jobs;
    }
    if (flags.seed) {
        cfg.seed = *flags.seed;
    }
    if (flags.format) {
        cfg.format = *flags.format;
    }
    if (flags.threshold) {
        cfg.matcher.threshold = *flags.threshold;
    }
    if (flags.llm_backend) {
        cfg.llm_backend = *flags.llm_backend;
    }
    if (flags.record_fixtures) {
        cfg.llm_backend = "record";
        cfg.record_file = *flags.record_fixtures;
    }
    if (flags.allow_network) {
        cfg.allow_network = true;
    }
    cfg.validate_invariants();
    return cfg;
}

int fail(const Error& e) {
    json out{{"error", rulegen::error_code_name(e.code())}, {"detail", e.what()}};
    std::cerr << out.dump() << "\n";
    switch (e.code()) {
        case ErrorCode::ConfigError: return 2;
        case ErrorCode::StageInputMissing: return 3;
        default: return 1;
    }
}

int validate_files(const std::vector<std::string>& files, const std::string& format_hint) {
    int exit_code = 0;
    for (const auto& file : files) {
        rulegen::rules::RuleFormat format;
        if (format_hint == "yara") {
            format = rulegen::rules::RuleFormat::yara;
        } else if (format_hint == "semgrep") {
            format = rulegen::rules::RuleFormat::semgrep;
        } else {
            std::string lowered = rulegen::to_lower(file);
            format = lowered.ends_with(".yaml") || lowered.ends_with(".yml")
                         ? rulegen::rules::RuleFormat::semgrep
                         : rulegen::rules::RuleFormat::yara;
        }
        auto outcome = rulegen::validate::compile_rule(rulegen::read_file(file), format);
        if (std::holds_alternative<rulegen::rules::Rule>(outcome)) {
            const auto& rule = std::get<rulegen::rules::Rule>(outcome);
            std::cout << json{{"file", file}, {"ok", true}, {"name", rule.name}}.dump() << "\n";
        } else {
            exit_code = 1;
            json errors = json::array();
            for (const auto& e : std::get<std::vector<rulegen::rules::CompileError>>(outcome)) {
                errors.push_back(
                    {{"code", rulegen::rules::to_string(e.code)}, {"message", e.message}});
            }
            std::cout << json{{"file", file}, {"ok", false}, {"errors", errors}}.dump() << "\n";
        }
    }
    return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"YARA/Semgrep rule generation pipeline for malicious-package corpora"};
    app.require_subcommand(1);

    struct StageCmd {
        const char* name;
        const char* help;
        void (*fn)(const rulegen::config::RunConfig&);
    };
    const StageCmd stages[] = {
        {"ingest", "unpack archives, extract metadata, dedup", rulegen::pipeline::stage_ingest},
        {"segment", "tokenize, extract basic units, audit metadata",
         rulegen::pipeline::stage_segment},
        {"cluster", "embed units and run seeded k-means", rulegen::pipeline::stage_cluster},
        {"generate", "craft -> refine -> align rules through the LLM backend",
         rulegen::pipeline::stage_generate},
        {"scan", "match generated rules over the corpus", rulegen::pipeline::stage_scan},
        {"eval", "confusion metrics from scan verdicts", rulegen::pipeline::stage_eval},
        {"baseline", "score-based baseline rules (isolation forest + tf-idf + entropy)",
         rulegen::pipeline::stage_baseline},
        {"analyze", "per-rule precision, coverage CDFs, taxonomy, overlap, score CDFs",
         rulegen::pipeline::stage_analyze},
        {"pipeline", "all stages in order", rulegen::pipeline::run_pipeline},
    };

    std::map<std::string, CommonFlags> flag_store;
    std::map<std::string, const StageCmd*> stage_by_name;
    for (const auto& stage : stages) {
        CLI::App* cmd = app.add_subcommand(stage.name, stage.help);
        add_common(cmd, flag_store[stage.name]);
        stage_by_name[stage.name] = &stage;
    }

    // validate: standalone rule-file checking, no config needed
    std::vector<std::string> validate_inputs;
    std::string validate_format = "auto";
    CLI::App* validate_cmd =
        app.add_subcommand("validate", "structurally compile rule files (.yar/.yaml)");
    validate_cmd->add_option("files", validate_inputs, "rule files")->required();
    validate_cmd->add_option("--format", validate_format, "yara|semgrep|auto");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate_cmd->parsed()) {
            return validate_files(validate_inputs, validate_format);
        }
        for (const auto& [name, stage] : stage_by_name) {
            CLI::App* cmd = app.get_subcommand(name);
            if (cmd->parsed()) {
                stage->fn(resolve(flag_store[name]));
                std::cout << json{{"stage", name}, {"ok", true}}.dump() << "\n";
                return 0;
            }
        }
    } catch (const Error& e) {
        return fail(e);
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "Unhandled"}, {"detail", e.what()}}.dump() << "\n";
        return 1;
    }
    return 0;
}
