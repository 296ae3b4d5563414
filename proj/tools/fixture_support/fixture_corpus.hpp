// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rulegen/config.hpp"

namespace rulegen::fixtures {

/// The synthetic demo corpus: 12 pypi packages, 8 malicious. Seven are
/// near-duplicate variants of one beaconing family (for variant-detection
/// checks) and one is a typosquat with hostile metadata; four are small clean
/// libraries.
struct DemoCorpus {
    std::filesystem::path malicious_dir;
    std::filesystem::path legitimate_dir;
    std::vector<std::string> variant_packages;  // the near-duplicate family
    std::string typosquat_package;
};

/// Builds the demo archives under root/{malicious,legitimate}. Deterministic:
/// re-running produces byte-identical archives.
DemoCorpus make_demo_corpus(const std::filesystem::path& root);

/// Ten archives where four are byte-duplicates of others (6 unique signature
/// groups), for dedup checks. Returns the directory.
std::filesystem::path make_dedup_corpus(const std::filesystem::path& root);

/// Config wired to the demo corpus with the replay backend.
config::RunConfig demo_config(const DemoCorpus& corpus, const std::filesystem::path& run_dir,
                              const std::filesystem::path& replay_file);

}  // namespace rulegen::fixtures
