// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rulegen::archive {

struct Entry {
    std::string name;     // path inside the archive, '/' separated
    std::string content;  // regular-file bytes
};

/// True if the entry name escapes the extraction root: absolute, drive-prefixed,
/// or containing a ".." component ('/' and '\\' both treated as separators).
bool is_hostile_path(std::string_view name);

/// Reads .tar.gz/.tgz/.zip/.whl archives into memory. Directories are skipped.
/// Throws Error{UnsupportedFormat|CorruptArchive|PathTraversal}.
std::vector<Entry> read_archive(const std::filesystem::path& path);

std::vector<Entry> read_tar(std::string_view data);
std::vector<Entry> read_zip(std::string_view data);

std::string gzip_compress(std::string_view data);
std::string gzip_decompress(std::string_view data);

// Writers produce bit-stable output for fixed inputs (fixture corpora rely on
// this): tar mtime and zip timestamps are parameters, not wall clock.
std::string make_tar(const std::vector<Entry>& entries, std::uint64_t mtime = 0);
void write_tar_gz(const std::filesystem::path& path, const std::vector<Entry>& entries,
                  std::uint64_t mtime = 0);
void write_zip(const std::filesystem::path& path, const std::vector<Entry>& entries,
               std::uint16_t dos_time = 0, std::uint16_t dos_date = 0x0021);

}  // namespace rulegen::archive
