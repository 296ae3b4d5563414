// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "rulegen/config.hpp"
#include "rulegen/util.hpp"

using namespace rulegen;
using config::RunConfig;

TEST_CASE("defaults round trip through json") {
    RunConfig cfg;
    cfg.replay_file = "replay.jsonl";
    auto text = cfg.to_json_text();
    RunConfig loaded = RunConfig::from_json_text(text);
    CHECK(loaded.seed == 42);
    CHECK(loaded.embed_dim == 256);
    CHECK(loaded.segment_threshold == 512);
    CHECK(loaded.intra_similarity_threshold == doctest::Approx(0.85));
    CHECK(loaded.baseline_scoring.weights.iso == doctest::Approx(1.2));
    CHECK(loaded.baseline_scoring.weights.tfidf == doctest::Approx(1.0));
    CHECK(loaded.baseline_scoring.weights.entropy == doctest::Approx(0.8));
    CHECK(loaded.baseline_threshold == doctest::Approx(0.9));
    CHECK(loaded.matcher.threshold == 1);
    CHECK(loaded.validator.max_fix_attempts == 5);
    CHECK(loaded.validator.error_memory == 2);
    CHECK(loaded.overlap_threshold == doctest::Approx(0.8));
    CHECK(loaded.to_json_text() == text);
    CHECK(loaded.digest() == cfg.digest());
}

TEST_CASE("unknown keys and wrong types are rejected") {
    CHECK_THROWS_AS((void)RunConfig::from_json_text("{\"bogus\": {}}"), Error);
    CHECK_THROWS_AS((void)RunConfig::from_json_text("{\"cluster\": {\"sed\": 1}}"), Error);
    CHECK_THROWS_AS((void)RunConfig::from_json_text("{\"cluster\": {\"seed\": \"forty-two\"}}"),
                    Error);
    CHECK_THROWS_AS((void)RunConfig::from_json_text("not json"), Error);
}

TEST_CASE("invariants") {
    RunConfig cfg;
    cfg.replay_file = "r.jsonl";

    SUBCASE("replay forbids network") {
        cfg.allow_network = true;
        CHECK_THROWS_AS(cfg.validate_invariants(), Error);
    }
    SUBCASE("replay needs a fixture file") {
        cfg.replay_file.clear();
        CHECK_THROWS_AS(cfg.validate_invariants(), Error);
    }
    SUBCASE("record needs an output file") {
        cfg.llm_backend = "record";
        CHECK_THROWS_AS(cfg.validate_invariants(), Error);
    }
    SUBCASE("format names checked") {
        cfg.format = "prolog";
        CHECK_THROWS_AS(cfg.validate_invariants(), Error);
    }
    SUBCASE("remote mode may use the network") {
        cfg.llm_backend = "remote";
        cfg.allow_network = true;
        CHECK_NOTHROW(cfg.validate_invariants());
    }
}
