// SPDX-License-Identifier: Apache-2.0
//
// rulegen-fixtures — builds the synthetic demo corpus, records a replay
// fixture against the scripted backend, and writes a ready-to-run config:
//
//   rulegen-fixtures --out demo
//   rulegen pipeline --config demo/config.json
#include <CLI11.hpp>
#include <iostream>

#include "fixture_support/fixture_corpus.hpp"
#include "fixture_support/scripted_backend.hpp"
#include "rulegen/pipeline.hpp"
#include "rulegen/util.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Builds the demo corpus and replay fixtures"};
    std::string out_dir = "demo";
    app.add_option("--out", out_dir, "output directory");
    CLI11_PARSE(app, argc, argv);

    try {
        std::filesystem::path root(out_dir);
        auto corpus = rulegen::fixtures::make_demo_corpus(root / "corpus");
        rulegen::fixtures::make_dedup_corpus(root / "corpus");

        std::filesystem::path replay = root / "replay.jsonl";
        std::filesystem::remove(replay);

        // record pass: scripted backend stands in for the remote service
        auto cfg = rulegen::fixtures::demo_config(corpus, root / "run-record", replay);
        rulegen::fixtures::ScriptedBackend scripted;
        rulegen::llm::RecordBackend recorder(scripted, replay);
        rulegen::pipeline::run_pipeline_with(cfg, recorder);

        // shipped config replays the recorded responses into a fresh run dir
        auto replay_cfg = rulegen::fixtures::demo_config(corpus, root / "run", replay);
        rulegen::write_file(root / "config.json", replay_cfg.to_json_text());

        std::cout << "fixtures ready under " << root.string() << "\n"
                  << "  corpus:  " << corpus.malicious_dir.string() << " (+legitimate, +dedup)\n"
                  << "  replay:  " << replay.string() << "\n"
                  << "  config:  " << (root / "config.json").string() << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "fixture generation failed: " << e.what() << "\n";
        return 1;
    }
}
