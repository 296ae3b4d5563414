// SPDX-License-Identifier: Apache-2.0
#include "rulegen/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <map>
#include <nlohmann/json.hpp>

#include "rulegen/archive.hpp"
#include "rulegen/digest.hpp"
#include "rulegen/http.hpp"
#include "rulegen/strutil.hpp"
#include "rulegen/util.hpp"

namespace rulegen::corpus {

using nlohmann::json;

const char* to_string(Ecosystem e) {
    return e == Ecosystem::pypi ? "pypi" : "npm";
}

const char* to_string(Label l) {
    switch (l) {
        case Label::malicious: return "malicious";
        case Label::legitimate: return "legitimate";
        default: return "unknown";
    }
}

const char* to_string(MetadataSource s) {
    switch (s) {
        case MetadataSource::pkg_info: return "pkg_info";
        case MetadataSource::setup_file: return "setup_file";
        case MetadataSource::egg_info: return "egg_info";
        case MetadataSource::registry_api: return "registry_api";
        default: return "none";
    }
}

std::string decode_utf8_lossy(std::string_view bytes) {
    static const char* replacement = "\xEF\xBF\xBD";
    std::string out;
    out.reserve(bytes.size());
    std::size_t i = 0;
    while (i < bytes.size()) {
        unsigned char c = static_cast<unsigned char>(bytes[i]);
        std::size_t len = 0;
        if (c < 0x80) {
            len = 1;
        } else if ((c & 0xE0) == 0xC0 && c >= 0xC2) {
            len = 2;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
        } else if ((c & 0xF8) == 0xF0 && c <= 0xF4) {
            len = 4;
        } else {
            out.append(replacement);
            ++i;
            continue;
        }
        if (i + len > bytes.size()) {
            out.append(replacement);
            ++i;
            continue;
        }
        bool valid = true;
        for (std::size_t k = 1; k < len; ++k) {
            if ((static_cast<unsigned char>(bytes[i + k]) & 0xC0) != 0x80) {
                valid = false;
                break;
            }
        }
        if (!valid) {
            out.append(replacement);
            ++i;
            continue;
        }
        out.append(bytes.substr(i, len));
        i += len;
    }
    return out;
}

std::string corpus_signature(const std::vector<SourceFile>& files) {
    std::vector<std::string> digests;
    digests.reserve(files.size());
    for (const auto& f : files) {
        digests.push_back(sha256_hex(f.content));
    }
    std::sort(digests.begin(), digests.end());
    std::string joined;
    for (const auto& d : digests) {
        joined += d;
        joined += '\n';
    }
    return sha256_hex(joined);
}

namespace {

bool is_install_script(const std::string& basename) {
    return basename == "setup.py" || basename == "setup.cfg" || basename == "pyproject.toml" ||
           basename == "package.json";
}

std::string basename_of(const std::string& path) {
    std::size_t slash = path.find_last_of('/');
    return slash == std::string::npos ? path : path.substr(slash + 1);
}

bool wanted_file(const std::string& name, Ecosystem eco) {
    std::string base = basename_of(name);
    if (is_install_script(base)) {
        return true;
    }
    const char* ext = eco == Ecosystem::pypi ? ".py" : ".js";
    return name.size() > std::strlen(ext) && name.ends_with(ext);
}

SourceFile make_source_file(const archive::Entry& entry) {
    SourceFile f;
    f.relative_path = entry.name;
    f.byte_len = entry.content.size();
    f.content = decode_utf8_lossy(entry.content);
    f.loc = f.content.empty()
                ? 0
                : static_cast<std::size_t>(std::count(f.content.begin(), f.content.end(), '\n')) + 1;
    return f;
}

std::string archive_stem(const std::filesystem::path& path) {
    std::string name = path.filename().string();
    for (const char* suffix : {".tar.gz", ".tgz", ".zip", ".whl", ".tar"}) {
        if (name.size() > std::strlen(suffix) && to_lower(name).ends_with(suffix)) {
            return name.substr(0, name.size() - std::strlen(suffix));
        }
    }
    return path.stem().string();
}

}  // namespace

std::string package_name_from_stem(std::string_view stem) {
    // "foo-1.0.3" -> "foo"; wheels add more dash-separated platform tags
    std::size_t dash = stem.find('-');
    while (dash != std::string_view::npos) {
        if (dash + 1 < stem.size() && std::isdigit(static_cast<unsigned char>(stem[dash + 1]))) {
            return std::string(stem.substr(0, dash));
        }
        dash = stem.find('-', dash + 1);
    }
    return std::string(stem);
}

PackageRecord unpack_package(const PackageArchive& archive_in, const std::filesystem::path& dest) {
    auto entries = archive::read_archive(archive_in.path);
    std::filesystem::create_directories(dest);
    PackageRecord record;
    record.label = archive_in.label;
    record.ecosystem = archive_in.ecosystem;
    record.root = dest;
    record.archive_stem = archive_stem(archive_in.path);
    for (const auto& entry : entries) {
        std::filesystem::path target = dest / entry.name;
        write_file(target, entry.content);
        if (wanted_file(entry.name, archive_in.ecosystem)) {
            record.files.push_back(make_source_file(entry));
        }
    }
    std::sort(record.files.begin(), record.files.end(),
              [](const SourceFile& a, const SourceFile& b) {
                  return a.relative_path < b.relative_path;
              });
    record.signature = corpus_signature(record.files);
    return record;
}

PackageMetadata parse_pkg_info(std::string_view text) {
    PackageMetadata meta;
    for (const auto& raw_line : split_lines(text)) {
        std::size_t colon = raw_line.find(':');
        if (colon == std::string::npos) {
            if (raw_line.empty()) {
                break;  // RFC-822 body separator: description payload follows
            }
            continue;
        }
        std::string key = to_lower(trim(raw_line.substr(0, colon)));
        std::string value = trim(raw_line.substr(colon + 1));
        if (key == "name") {
            meta.name = value;
        } else if (key == "version") {
            meta.version = value;
        } else if (key == "summary" || key == "description") {
            if (meta.description.empty()) {
                meta.description = value;
            }
        } else if (key == "author") {
            meta.author = value;
        } else if (key == "author-email") {
            meta.author_email = value;
        } else if (key == "requires-dist" || key == "requires") {
            std::string dep = value;
            std::size_t semi = dep.find(';');
            if (semi != std::string::npos) {
                dep = trim(dep.substr(0, semi));
            }
            std::size_t spec = dep.find_first_of("<>=!~ (");
            Dependency d;
            d.name = trim(spec == std::string::npos ? dep : dep.substr(0, spec));
            if (spec != std::string::npos) {
                std::string rest = trim(dep.substr(spec));
                if (!rest.empty() && rest.front() == '(' && rest.back() == ')') {
                    rest = rest.substr(1, rest.size() - 2);
                }
                d.version_spec = rest;
            }
            if (!d.name.empty()) {
                meta.dependencies.push_back(std::move(d));
            }
        } else if (key == "home-page" || key == "project-url" || key == "download-url") {
            if (!value.empty()) {
                meta.urls.push_back(value);
            }
        }
    }
    return meta;
}

namespace {

// Finds `key` used as a keyword argument and returns the quoted string that
// follows, or empty when the value is not a plain literal.
std::string setup_kwarg_string(std::string_view text, std::string_view key) {
    std::size_t pos = 0;
    while ((pos = text.find(key, pos)) != std::string_view::npos) {
        std::size_t after = pos + key.size();
        // must look like `key =` with optional spaces
        std::size_t eq = after;
        while (eq < text.size() && (text[eq] == ' ' || text[eq] == '\t')) {
            ++eq;
        }
        if (eq >= text.size() || text[eq] != '=' || (eq + 1 < text.size() && text[eq + 1] == '=')) {
            pos = after;
            continue;
        }
        if (pos > 0) {
            char before = text[pos - 1];
            if (std::isalnum(static_cast<unsigned char>(before)) || before == '_' || before == '.') {
                pos = after;
                continue;
            }
        }
        std::size_t v = eq + 1;
        while (v < text.size() && (text[v] == ' ' || text[v] == '\t')) {
            ++v;
        }
        if (v < text.size() && (text[v] == '"' || text[v] == '\'')) {
            char quote = text[v];
            std::size_t end = text.find(quote, v + 1);
            if (end != std::string_view::npos) {
                return std::string(text.substr(v + 1, end - v - 1));
            }
        }
        return {};  // dynamic value: leave empty rather than execute anything
    }
    return {};
}

std::vector<std::string> setup_kwarg_string_list(std::string_view text, std::string_view key) {
    std::vector<std::string> items;
    std::size_t pos = text.find(key);
    while (pos != std::string_view::npos) {
        std::size_t eq = text.find('=', pos + key.size());
        if (eq == std::string_view::npos) {
            return items;
        }
        std::size_t open = text.find_first_not_of(" \t\r\n", eq + 1);
        if (open == std::string_view::npos || text[open] != '[') {
            pos = text.find(key, pos + key.size());
            continue;
        }
        std::size_t close = text.find(']', open);
        if (close == std::string_view::npos) {
            return items;
        }
        std::string_view body = text.substr(open + 1, close - open - 1);
        std::size_t i = 0;
        while (i < body.size()) {
            if (body[i] == '"' || body[i] == '\'') {
                char quote = body[i];
                std::size_t end = body.find(quote, i + 1);
                if (end == std::string_view::npos) {
                    break;
                }
                items.emplace_back(body.substr(i + 1, end - i - 1));
                i = end + 1;
            } else {
                ++i;
            }
        }
        return items;
    }
    return items;
}

}  // namespace

PackageMetadata parse_setup_py(std::string_view text) {
    PackageMetadata meta;
    meta.name = setup_kwarg_string(text, "name");
    meta.version = setup_kwarg_string(text, "version");
    meta.description = setup_kwarg_string(text, "description");
    meta.author = setup_kwarg_string(text, "author");
    meta.author_email = setup_kwarg_string(text, "author_email");
    std::string url = setup_kwarg_string(text, "url");
    if (!url.empty()) {
        meta.urls.push_back(url);
    }
    for (const auto& dep : setup_kwarg_string_list(text, "install_requires")) {
        std::size_t spec = dep.find_first_of("<>=!~ ");
        Dependency d;
        d.name = trim(spec == std::string::npos ? dep : dep.substr(0, spec));
        d.version_spec = spec == std::string::npos ? "" : trim(dep.substr(spec));
        if (!d.name.empty()) {
            meta.dependencies.push_back(std::move(d));
        }
    }
    meta.source = MetadataSource::setup_file;
    return meta;
}

PackageMetadata parse_registry_json(std::string_view body, Ecosystem ecosystem) {
    PackageMetadata meta;
    json doc = json::parse(body, nullptr, false);
    if (doc.is_discarded()) {
        return meta;
    }
    auto str = [](const json& j, const char* key) -> std::string {
        if (j.contains(key) && j[key].is_string()) {
            return j[key].get<std::string>();
        }
        return {};
    };
    if (ecosystem == Ecosystem::pypi) {
        if (!doc.contains("info")) {
            return meta;
        }
        const json& info = doc["info"];
        meta.name = str(info, "name");
        meta.version = str(info, "version");
        meta.description = str(info, "summary");
        meta.author = str(info, "author");
        meta.author_email = str(info, "author_email");
        if (info.contains("requires_dist") && info["requires_dist"].is_array()) {
            for (const auto& item : info["requires_dist"]) {
                if (!item.is_string()) {
                    continue;
                }
                std::string dep = item.get<std::string>();
                std::size_t spec = dep.find_first_of("<>=!~ ;(");
                Dependency d;
                d.name = trim(spec == std::string::npos ? dep : dep.substr(0, spec));
                if (!d.name.empty()) {
                    meta.dependencies.push_back(std::move(d));
                }
            }
        }
        std::string home = str(info, "home_page");
        if (!home.empty()) {
            meta.urls.push_back(home);
        }
    } else {
        meta.name = str(doc, "name");
        meta.description = str(doc, "description");
        std::string latest;
        if (doc.contains("dist-tags")) {
            latest = str(doc["dist-tags"], "latest");
        }
        meta.version = latest;
        if (!latest.empty() && doc.contains("versions") && doc["versions"].contains(latest)) {
            const json& v = doc["versions"][latest];
            if (v.contains("author") && v["author"].is_object()) {
                meta.author = str(v["author"], "name");
                meta.author_email = str(v["author"], "email");
            }
            if (v.contains("dependencies") && v["dependencies"].is_object()) {
                for (auto it = v["dependencies"].begin(); it != v["dependencies"].end(); ++it) {
                    Dependency d;
                    d.name = it.key();
                    if (it.value().is_string()) {
                        d.version_spec = it.value().get<std::string>();
                    }
                    meta.dependencies.push_back(std::move(d));
                }
            }
            std::string home = str(v, "homepage");
            if (!home.empty()) {
                meta.urls.push_back(home);
            }
        }
    }
    meta.source = MetadataSource::registry_api;
    return meta;
}

PackageMetadata extract_metadata(const PackageRecord& record, const RegistryConfig& cfg) {
    // 1) PKG-INFO / METADATA / *.egg-info trees in the extracted root
    std::vector<std::filesystem::path> info_files;
    if (!record.root.empty() && std::filesystem::exists(record.root)) {
        for (const auto& e : std::filesystem::recursive_directory_iterator(record.root)) {
            if (!e.is_regular_file()) {
                continue;
            }
            std::string base = e.path().filename().string();
            if (base == "PKG-INFO" || base == "METADATA") {
                info_files.push_back(e.path());
            }
        }
        std::sort(info_files.begin(), info_files.end());
    }
    for (const auto& p : info_files) {
        PackageMetadata meta = parse_pkg_info(decode_utf8_lossy(read_file(p)));
        if (!meta.name.empty()) {
            meta.source = p.string().find(".egg-info") != std::string::npos
                              ? MetadataSource::egg_info
                              : MetadataSource::pkg_info;
            return meta;
        }
    }

    // 2) static setup.py scan
    for (const auto& f : record.files) {
        if (basename_of(f.relative_path) == "setup.py") {
            PackageMetadata meta = parse_setup_py(f.content);
            if (!meta.name.empty()) {
                return meta;
            }
        }
    }

    // 3) registry endpoint, only when the caller opted into network access
    if (cfg.allow_network) {
        std::string guess = package_name_from_stem(record.archive_stem);
        const std::string& tmpl =
            record.ecosystem == Ecosystem::pypi ? cfg.pypi_endpoint : cfg.npm_endpoint;
        std::string url = tmpl;
        std::size_t slot = url.find("{package_name}");
        if (slot != std::string::npos) {
            url.replace(slot, std::strlen("{package_name}"), guess);
        }
        auto response = http_get(url);
        if (response && response->status == 200) {
            PackageMetadata meta = parse_registry_json(response->body, record.ecosystem);
            if (!meta.name.empty()) {
                return meta;
            }
        }
    }
    throw Error(ErrorCode::NoMetadataFound,
                "no metadata in " + record.archive_stem + " by any extraction method");
}

std::vector<PackageRecord> dedup_corpus(const std::vector<PackageRecord>& records) {
    std::map<std::string, std::size_t> keep;  // signature -> index of kept record
    for (std::size_t i = 0; i < records.size(); ++i) {
        auto [it, inserted] = keep.emplace(records[i].signature, i);
        if (!inserted) {
            const auto& incumbent = records[it->second];
            if (records[i].metadata.name < incumbent.metadata.name) {
                it->second = i;
            }
        }
    }
    std::vector<std::size_t> kept_indexes;
    kept_indexes.reserve(keep.size());
    for (const auto& [sig, idx] : keep) {
        kept_indexes.push_back(idx);
    }
    std::sort(kept_indexes.begin(), kept_indexes.end());
    std::vector<PackageRecord> out;
    out.reserve(kept_indexes.size());
    for (std::size_t idx : kept_indexes) {
        out.push_back(records[idx]);
    }
    return out;
}

namespace {

json metadata_to_json(const PackageMetadata& m) {
    json deps = json::array();
    for (const auto& d : m.dependencies) {
        deps.push_back({{"name", d.name}, {"version_spec", d.version_spec}});
    }
    return json{{"name", m.name},
                {"version", m.version},
                {"description", m.description},
                {"author", m.author},
                {"author_email", m.author_email},
                {"dependencies", deps},
                {"urls", m.urls},
                {"source", to_string(m.source)}};
}

PackageMetadata metadata_from_json(const json& j) {
    PackageMetadata m;
    m.name = j.value("name", "");
    m.version = j.value("version", "");
    m.description = j.value("description", "");
    m.author = j.value("author", "");
    m.author_email = j.value("author_email", "");
    if (j.contains("dependencies")) {
        for (const auto& d : j["dependencies"]) {
            m.dependencies.push_back({d.value("name", ""), d.value("version_spec", "")});
        }
    }
    if (j.contains("urls")) {
        m.urls = j["urls"].get<std::vector<std::string>>();
    }
    std::string src = j.value("source", "none");
    for (auto s : {MetadataSource::pkg_info, MetadataSource::setup_file, MetadataSource::egg_info,
                   MetadataSource::registry_api}) {
        if (src == to_string(s)) {
            m.source = s;
        }
    }
    return m;
}

}  // namespace

void save_records(const std::filesystem::path& path, const std::vector<PackageRecord>& records) {
    json arr = json::array();
    for (const auto& r : records) {
        json files = json::array();
        for (const auto& f : r.files) {
            files.push_back({{"relative_path", f.relative_path},
                             {"content", f.content},
                             {"byte_len", f.byte_len},
                             {"loc", f.loc}});
        }
        arr.push_back({{"metadata", metadata_to_json(r.metadata)},
                       {"files", files},
                       {"signature", r.signature},
                       {"label", to_string(r.label)},
                       {"ecosystem", to_string(r.ecosystem)},
                       {"root", r.root.string()},
                       {"archive_stem", r.archive_stem}});
    }
    write_file(path, arr.dump(2) + "\n");
}

std::vector<PackageRecord> load_records(const std::filesystem::path& path) {
    json arr = json::parse(read_file(path));
    std::vector<PackageRecord> records;
    for (const auto& j : arr) {
        PackageRecord r;
        r.metadata = metadata_from_json(j.at("metadata"));
        for (const auto& f : j.at("files")) {
            SourceFile sf;
            sf.relative_path = f.value("relative_path", "");
            sf.content = f.value("content", "");
            sf.byte_len = f.value("byte_len", std::size_t{0});
            sf.loc = f.value("loc", std::size_t{0});
            r.files.push_back(std::move(sf));
        }
        r.signature = j.value("signature", "");
        std::string label = j.value("label", "unknown");
        r.label = label == "malicious"    ? Label::malicious
                  : label == "legitimate" ? Label::legitimate
                                          : Label::unknown;
        r.ecosystem = j.value("ecosystem", "pypi") == std::string("npm") ? Ecosystem::npm
                                                                         : Ecosystem::pypi;
        r.root = j.value("root", "");
        r.archive_stem = j.value("archive_stem", "");
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace rulegen::corpus
