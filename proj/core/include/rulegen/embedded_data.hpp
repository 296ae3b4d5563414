// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>

// Built-in copies of the files under core/data/, embedded at build time so
// the pipeline runs without any install-prefix lookups. The files remain the
// single source of truth; pass explicit paths in the config to override.
namespace rulegen::data {

std::string_view taxonomy_json();
std::string_view popular_packages();
std::string_view dependency_denylist();
std::string_view baseline_rule_template();
std::string_view craft_system_template();
std::string_view craft_user_template();
std::string_view refine_system_template();
std::string_view refine_user_template();
std::string_view fix_system_template();
std::string_view fix_user_template();
std::string_view fewshot_yara();
std::string_view fewshot_semgrep();

}  // namespace rulegen::data
