// SPDX-License-Identifier: Apache-2.0
#include "rulegen/util.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

namespace rulegen {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
        case ErrorCode::CorruptArchive: return "CorruptArchive";
        case ErrorCode::PathTraversal: return "PathTraversal";
        case ErrorCode::NoMetadataFound: return "NoMetadataFound";
        case ErrorCode::BackendUnavailable: return "BackendUnavailable";
        case ErrorCode::ReplayMiss: return "ReplayMiss";
        case ErrorCode::NoRuleFound: return "NoRuleFound";
        case ErrorCode::UnitTooLarge: return "UnitTooLarge";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::KTooLarge: return "KTooLarge";
        case ErrorCode::ClusterTooSmall: return "ClusterTooSmall";
        case ErrorCode::DegenerateCorpus: return "DegenerateCorpus";
        case ErrorCode::NoSignal: return "NoSignal";
        case ErrorCode::BadTaxonomyFile: return "BadTaxonomyFile";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::StageInputMissing: return "StageInputMissing";
        case ErrorCode::IoError: return "IoError";
    }
    return "UnknownError";
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + path.string());
    }
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return content;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
    if (n == 0) {
        return;
    }
    if (jobs <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    unsigned workers = std::min<unsigned>(jobs, static_cast<unsigned>(n));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) {
                    return;
                }
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) {
                        first_error = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

std::string format_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

}  // namespace rulegen
