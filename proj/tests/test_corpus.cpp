// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "fixture_support/fixture_corpus.hpp"
#include "rulegen/archive.hpp"
#include "rulegen/corpus.hpp"
#include "rulegen/digest.hpp"
#include "rulegen/util.hpp"

using namespace rulegen;
using archive::Entry;

namespace {

std::filesystem::path temp_dir(const char* tag) {
    auto dir = std::filesystem::temp_directory_path() / "rulegen-test" / tag;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

corpus::PackageRecord unpack_entries(const std::filesystem::path& dir, const char* archive_name,
                                     const std::vector<Entry>& entries,
                                     corpus::Label label = corpus::Label::unknown) {
    archive::write_tar_gz(dir / archive_name, entries);
    corpus::PackageArchive arc{dir / archive_name, corpus::Ecosystem::pypi, label};
    return corpus::unpack_package(arc, dir / "x" / archive_name);
}

}  // namespace

TEST_CASE("utf8 lossy decoding never fails") {
    CHECK(corpus::decode_utf8_lossy("plain") == "plain");
    CHECK(corpus::decode_utf8_lossy("caf\xC3\xA9") == "caf\xC3\xA9");
    std::string bad = "a\xFF\xFE b";
    std::string decoded = corpus::decode_utf8_lossy(bad);
    CHECK(decoded.find("\xEF\xBF\xBD") != std::string::npos);
    CHECK(decoded.substr(0, 1) == "a");
    // truncated multi-byte sequence at end
    CHECK(corpus::decode_utf8_lossy("x\xC3") == "x\xEF\xBF\xBD");
}

TEST_CASE("unpack computes the documented signature") {
    auto dir = temp_dir("sig");
    auto record = unpack_entries(dir, "p-1.0.tar.gz",
                                 {{"p/a.py", "aa\n"}, {"p/b.py", "bb\n"}, {"p/readme.txt", "no"}});
    REQUIRE(record.files.size() == 2);  // .txt excluded

    // signature = digest over the sorted per-file content digests
    std::vector<std::string> digests{sha256_hex("aa\n"), sha256_hex("bb\n")};
    std::sort(digests.begin(), digests.end());
    std::string joined = digests[0] + "\n" + digests[1] + "\n";
    CHECK(record.signature == sha256_hex(joined));
}

TEST_CASE("signature is invariant under member order and archive timestamps") {
    auto dir = temp_dir("sig-perm");
    std::vector<Entry> forward{{"p/a.py", "alpha"}, {"p/b.py", "beta"}};
    std::vector<Entry> backward{{"p/b.py", "beta"}, {"p/a.py", "alpha"}};
    archive::write_tar_gz(dir / "f.tar.gz", forward, 0);
    archive::write_tar_gz(dir / "r.tar.gz", backward, 99999);
    auto rec_f = corpus::unpack_package({dir / "f.tar.gz", corpus::Ecosystem::pypi,
                                         corpus::Label::unknown},
                                        dir / "xf");
    auto rec_r = corpus::unpack_package({dir / "r.tar.gz", corpus::Ecosystem::pypi,
                                         corpus::Label::unknown},
                                        dir / "xr");
    CHECK(rec_f.signature == rec_r.signature);
}

TEST_CASE("loc and byte_len accounting") {
    auto dir = temp_dir("loc");
    auto record = unpack_entries(dir, "p-1.tar.gz", {{"p/a.py", "x = 1\ny = 2\n"}, {"p/e.py", ""}});
    REQUIRE(record.files.size() == 2);
    CHECK(record.files[0].loc == 3);  // two newlines + 1 (non-empty)
    CHECK(record.files[0].byte_len == 12);
    CHECK(record.files[1].loc == 0);
}

TEST_CASE("pkg-info parsing") {
    auto meta = corpus::parse_pkg_info(
        "Name: foo\nVersion: 0.0.0\nSummary: does things\nAuthor: someone\n"
        "Author-email: a@b.c\nRequires-Dist: requests (>=2.0)\nHome-page: https://x.example\n");
    CHECK(meta.name == "foo");
    CHECK(meta.version == "0.0.0");
    CHECK(meta.description == "does things");
    CHECK(meta.author == "someone");
    CHECK(meta.author_email == "a@b.c");
    REQUIRE(meta.dependencies.size() == 1);
    CHECK(meta.dependencies[0].name == "requests");
    CHECK(meta.dependencies[0].version_spec == ">=2.0");
    REQUIRE(meta.urls.size() == 1);
}

TEST_CASE("setup.py static extraction without execution") {
    std::string setup_text =
        "from setuptools import setup\n"
        "setup(name='reqests', version='0.0.0', install_requires=['requests', 'flask>=2'],\n"
        "      description='', author='x')\n";
    auto meta = corpus::parse_setup_py(setup_text);
    CHECK(meta.name == "reqests");
    CHECK(meta.version == "0.0.0");
    REQUIRE(meta.dependencies.size() == 2);
    CHECK(meta.dependencies[0].name == "requests");
    CHECK(meta.dependencies[1].name == "flask");
    CHECK(meta.dependencies[1].version_spec == ">=2");
    CHECK(meta.source == corpus::MetadataSource::setup_file);

    // dynamic values stay empty rather than being evaluated
    auto dynamic = corpus::parse_setup_py("setup(name=get_name(), version=VERSION)\n");
    CHECK(dynamic.name == "");
    CHECK(dynamic.version == "");
}

TEST_CASE("extract_metadata method order and fallback") {
    auto dir = temp_dir("meta");
    corpus::RegistryConfig no_network;

    SUBCASE("pkg-info wins over setup.py") {
        auto record = unpack_entries(
            dir, "a-1.0.tar.gz",
            {{"a/PKG-INFO", "Name: frominfo\nVersion: 1.0\nSummary: s\n"},
             {"a/setup.py", "setup(name='fromsetup')\n"}});
        auto meta = corpus::extract_metadata(record, no_network);
        CHECK(meta.name == "frominfo");
        CHECK(meta.source == corpus::MetadataSource::pkg_info);
    }

    SUBCASE("egg-info source recorded") {
        auto record = unpack_entries(
            dir, "b-1.0.tar.gz",
            {{"b/b.egg-info/PKG-INFO", "Name: fromegg\nVersion: 2.0\n"}, {"b/m.py", "pass\n"}});
        auto meta = corpus::extract_metadata(record, no_network);
        CHECK(meta.name == "fromegg");
        CHECK(meta.source == corpus::MetadataSource::egg_info);
    }

    SUBCASE("setup.py fallback") {
        auto record = unpack_entries(dir, "c-1.0.tar.gz", {{"c/setup.py", "setup(name='c3')\n"}});
        auto meta = corpus::extract_metadata(record, no_network);
        CHECK(meta.name == "c3");
        CHECK(meta.source == corpus::MetadataSource::setup_file);
    }

    SUBCASE("all methods empty raises NoMetadataFound") {
        auto record = unpack_entries(dir, "d-1.0.tar.gz", {{"d/m.py", "x = 1\n"}});
        CHECK_THROWS_AS((void)corpus::extract_metadata(record, no_network), Error);
        CHECK(corpus::package_name_from_stem("d-1.0") == "d");
    }
}

TEST_CASE("metadata extraction never executes package code") {
    auto dir = temp_dir("sentinel");
    std::filesystem::path sentinel = dir / "SENTINEL";
    std::string hostile_setup =
        "with open('" + sentinel.string() + "', 'w') as fh:\n"
        "    fh.write('executed')\n"
        "setup(name='hostile')\n";
    auto record = unpack_entries(dir, "h-1.0.tar.gz", {{"h/setup.py", hostile_setup}});
    auto meta = corpus::extract_metadata(record, corpus::RegistryConfig{});
    CHECK(meta.name == "hostile");
    CHECK_FALSE(std::filesystem::exists(sentinel));
}

TEST_CASE("registry payload parsing") {
    std::string pypi = R"({"info": {"name": "demo", "version": "3.1", "summary": "S",
        "author": "A", "author_email": "a@e.x", "requires_dist": ["left >=1", "right"],
        "home_page": "https://h.example"}})";
    auto meta = corpus::parse_registry_json(pypi, corpus::Ecosystem::pypi);
    CHECK(meta.name == "demo");
    CHECK(meta.version == "3.1");
    REQUIRE(meta.dependencies.size() == 2);
    CHECK(meta.dependencies[0].name == "left");

    std::string npm = R"({"name": "pkg", "description": "D",
        "dist-tags": {"latest": "2.0.0"},
        "versions": {"2.0.0": {"author": {"name": "N", "email": "n@e.x"},
                               "dependencies": {"lodash": "^4"}, "homepage": "https://n"}}})";
    auto npm_meta = corpus::parse_registry_json(npm, corpus::Ecosystem::npm);
    CHECK(npm_meta.name == "pkg");
    CHECK(npm_meta.version == "2.0.0");
    REQUIRE(npm_meta.dependencies.size() == 1);
    CHECK(npm_meta.dependencies[0].name == "lodash");
    CHECK(npm_meta.dependencies[0].version_spec == "^4");
}

TEST_CASE("dedup keeps one record per signature") {
    corpus::PackageRecord a;
    a.signature = "s1";
    a.metadata.name = "bbb";
    corpus::PackageRecord b;
    b.signature = "s1";
    b.metadata.name = "aaa";  // lexicographically smallest name wins
    corpus::PackageRecord c;
    c.signature = "s2";
    c.metadata.name = "ccc";

    auto out = corpus::dedup_corpus({a, b, c});
    REQUIRE(out.size() == 2);
    CHECK(out[0].metadata.name == "aaa");
    CHECK(out[1].metadata.name == "ccc");

    // idempotent
    auto again = corpus::dedup_corpus(out);
    REQUIRE(again.size() == 2);
    CHECK(again[0].metadata.name == out[0].metadata.name);

    CHECK(corpus::dedup_corpus({}).empty());
}

TEST_CASE("dedup fixture corpus goes 10 -> 6") {
    auto root = temp_dir("dedup-fixture");
    auto dir = fixtures::make_dedup_corpus(root);
    std::vector<corpus::PackageRecord> records;
    std::vector<std::filesystem::path> archives;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        archives.push_back(entry.path());
    }
    std::sort(archives.begin(), archives.end());
    REQUIRE(archives.size() == 10);
    for (const auto& path : archives) {
        corpus::PackageArchive arc{path, corpus::Ecosystem::pypi, corpus::Label::malicious};
        auto record = corpus::unpack_package(arc, root / "x" / path.stem().stem().string());
        record.metadata.name = corpus::package_name_from_stem(record.archive_stem);
        records.push_back(std::move(record));
    }
    auto deduped = corpus::dedup_corpus(records);
    CHECK(deduped.size() == 6);
    CHECK(corpus::dedup_corpus(deduped).size() == 6);
}

TEST_CASE("records save/load round trip") {
    auto dir = temp_dir("records-io");
    auto record = unpack_entries(dir, "p-1.0.tar.gz", {{"p/a.py", "x = 1\n"}},
                                 corpus::Label::malicious);
    record.metadata.name = "p";
    corpus::save_records(dir / "records.json", {record});
    auto loaded = corpus::load_records(dir / "records.json");
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].metadata.name == "p");
    CHECK(loaded[0].signature == record.signature);
    CHECK(loaded[0].label == corpus::Label::malicious);
    REQUIRE(loaded[0].files.size() == 1);
    CHECK(loaded[0].files[0].content == "x = 1\n");
}
