// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

namespace rulegen {

/// SHA-256, lowercase hex. Fixed project-wide: package signatures and prompt
/// digests both rely on this being stable across runs and platforms.
std::string sha256_hex(std::string_view data);

}  // namespace rulegen
