// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace rulegen::corpus {

enum class Ecosystem { pypi, npm };
enum class Label { malicious, legitimate, unknown };

/// Which extraction method produced a metadata record.
enum class MetadataSource { none, pkg_info, setup_file, egg_info, registry_api };

const char* to_string(Ecosystem e);
const char* to_string(Label l);
const char* to_string(MetadataSource s);

struct PackageArchive {
    std::filesystem::path path;
    Ecosystem ecosystem = Ecosystem::pypi;
    Label label = Label::unknown;
};

struct Dependency {
    std::string name;
    std::string version_spec;  // may be empty
};

struct PackageMetadata {
    std::string name;
    std::string version;
    std::string description;
    std::string author;
    std::string author_email;
    std::vector<Dependency> dependencies;
    std::vector<std::string> urls;
    MetadataSource source = MetadataSource::none;
};

struct SourceFile {
    std::string relative_path;
    std::string content;  // best-effort UTF-8, invalid bytes replaced with U+FFFD
    std::size_t byte_len = 0;
    std::size_t loc = 0;  // newline count + 1 for non-empty content
};

struct PackageRecord {
    PackageMetadata metadata;
    std::vector<SourceFile> files;  // source files + install scripts, sorted by path
    std::string signature;          // hex digest over the sorted multiset of file digests
    Label label = Label::unknown;
    Ecosystem ecosystem = Ecosystem::pypi;
    std::filesystem::path root;     // extraction directory
    std::string archive_stem;       // archive filename without extensions
};

struct RegistryConfig {
    bool allow_network = false;
    std::string pypi_endpoint = "https://pypi.org/pypi/{package_name}/json";
    std::string npm_endpoint = "https://registry.npmjs.org/{package_name}";
};

/// Decodes bytes as UTF-8, replacing invalid sequences with U+FFFD.
std::string decode_utf8_lossy(std::string_view bytes);

/// Signature over the multiset of file contents; invariant to file order and names.
std::string corpus_signature(const std::vector<SourceFile>& files);

/// Unpacks a supported archive (.tar.gz/.tgz/.zip/.whl) into dest, collects
/// source files and install scripts, and computes the record signature.
/// Throws Error{UnsupportedFormat|CorruptArchive|PathTraversal}.
PackageRecord unpack_package(const PackageArchive& archive, const std::filesystem::path& dest);

/// Tries PKG-INFO / *.egg-info parsing, then static setup.py keyword scanning,
/// then (only with cfg.allow_network) the registry endpoint. First method that
/// yields a non-empty name wins. Throws Error{NoMetadataFound} when every
/// method comes back empty; callers keep the record with the archive-stem name.
PackageMetadata extract_metadata(const PackageRecord& record, const RegistryConfig& cfg);

/// One record per distinct signature, keeping the lexicographically smallest
/// package name; relative input order of kept records is preserved.
std::vector<PackageRecord> dedup_corpus(const std::vector<PackageRecord>& records);

// RFC-822-style key:value metadata text (PKG-INFO / METADATA / *.egg-info).
PackageMetadata parse_pkg_info(std::string_view text);

// Static scan of setup(...) keyword arguments; never executes the file.
PackageMetadata parse_setup_py(std::string_view text);

// Registry JSON payloads (exposed for offline tests against a local server).
PackageMetadata parse_registry_json(std::string_view body, Ecosystem ecosystem);

/// Strips a trailing "-<version>" from an archive stem ("foo-1.0.3" -> "foo").
std::string package_name_from_stem(std::string_view stem);

void save_records(const std::filesystem::path& path, const std::vector<PackageRecord>& records);
std::vector<PackageRecord> load_records(const std::filesystem::path& path);

}  // namespace rulegen::corpus
