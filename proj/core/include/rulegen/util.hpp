// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rulegen {

/// Error codes shared across pipeline stages. Stage code catches these per
/// work item (package, rule, ...) and keeps the run going where the contract
/// says so.
enum class ErrorCode {
    UnsupportedFormat,
    CorruptArchive,
    PathTraversal,
    NoMetadataFound,
    BackendUnavailable,
    ReplayMiss,
    NoRuleFound,
    UnitTooLarge,
    DimensionMismatch,
    EmptyInput,
    KTooLarge,
    ClusterTooSmall,
    DegenerateCorpus,
    NoSignal,
    BadTaxonomyFile,
    ConfigError,
    StageInputMissing,
    IoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Results must be written
/// to pre-sized slots indexed by i so the outcome is independent of schedule.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

/// Fixed-format float for CSV/report output ("%.6f"); keeps goldens stable.
std::string format_fixed(double value, int decimals = 6);

}  // namespace rulegen
