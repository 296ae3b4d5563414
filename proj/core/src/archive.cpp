// SPDX-License-Identifier: Apache-2.0
#include "rulegen/archive.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cstring>

#include "rulegen/strutil.hpp"
#include "rulegen/util.hpp"

namespace rulegen::archive {

namespace {

constexpr std::size_t kTarBlock = 512;

[[noreturn]] void corrupt(const std::string& why) {
    throw Error(ErrorCode::CorruptArchive, why);
}

std::uint64_t parse_octal(const char* field, std::size_t len) {
    std::uint64_t value = 0;
    bool seen = false;
    for (std::size_t i = 0; i < len; ++i) {
        char c = field[i];
        if (c == ' ' || c == '\0') {
            if (seen) {
                break;
            }
            continue;
        }
        if (c < '0' || c > '7') {
            corrupt("bad octal field in tar header");
        }
        value = value * 8 + static_cast<std::uint64_t>(c - '0');
        seen = true;
    }
    return value;
}

void put_octal(char* field, std::size_t len, std::uint64_t value) {
    // len-1 digits, NUL terminated
    for (std::size_t i = 0; i + 1 < len; ++i) {
        field[len - 2 - i] = static_cast<char>('0' + (value & 7));
        value >>= 3;
    }
    field[len - 1] = '\0';
}

std::uint32_t read_le32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_le16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void append_le16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void append_le32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::string inflate_raw(std::string_view data, std::size_t expected_size) {
    z_stream zs{};
    if (inflateInit2(&zs, -15) != Z_OK) {
        corrupt("inflate init failed");
    }
    std::string out;
    out.reserve(expected_size);
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    zs.avail_in = static_cast<uInt>(data.size());
    std::array<char, 1 << 15> buf;
    int ret = Z_OK;
    do {
        zs.next_out = reinterpret_cast<Bytef*>(buf.data());
        zs.avail_out = static_cast<uInt>(buf.size());
        ret = inflate(&zs, Z_NO_FLUSH);
        if (ret != Z_OK && ret != Z_STREAM_END) {
            inflateEnd(&zs);
            corrupt("deflate stream is corrupt");
        }
        out.append(buf.data(), buf.size() - zs.avail_out);
    } while (ret != Z_STREAM_END && (zs.avail_in > 0 || zs.avail_out == 0));
    inflateEnd(&zs);
    if (ret != Z_STREAM_END) {
        corrupt("truncated deflate stream");
    }
    return out;
}

}  // namespace

bool is_hostile_path(std::string_view name) {
    if (name.empty()) {
        return false;
    }
    if (name.front() == '/' || name.front() == '\\') {
        return true;
    }
    if (name.size() >= 2 && name[1] == ':') {  // windows drive prefix
        return true;
    }
    std::size_t start = 0;
    for (std::size_t i = 0; i <= name.size(); ++i) {
        if (i == name.size() || name[i] == '/' || name[i] == '\\') {
            if (name.substr(start, i - start) == "..") {
                return true;
            }
            start = i + 1;
        }
    }
    return false;
}

std::vector<Entry> read_tar(std::string_view data) {
    std::vector<Entry> entries;
    std::size_t off = 0;
    std::string pending_longname;
    while (off + kTarBlock <= data.size()) {
        const char* hdr = data.data() + off;
        bool all_zero = std::all_of(hdr, hdr + kTarBlock, [](char c) { return c == '\0'; });
        if (all_zero) {
            break;  // end-of-archive marker
        }
        char name_field[101] = {0};
        std::memcpy(name_field, hdr, 100);
        std::string name = pending_longname.empty() ? std::string(name_field) : pending_longname;
        pending_longname.clear();

        std::uint64_t size = parse_octal(hdr + 124, 12);
        char typeflag = hdr[156];
        std::size_t data_off = off + kTarBlock;
        std::size_t padded = (static_cast<std::size_t>(size) + kTarBlock - 1) / kTarBlock * kTarBlock;
        if (data_off + size > data.size()) {
            corrupt("tar entry extends past end of archive");
        }
        if (typeflag == 'L') {
            // GNU longname: payload is the real name of the next entry
            pending_longname = std::string(data.substr(data_off, size));
            while (!pending_longname.empty() && pending_longname.back() == '\0') {
                pending_longname.pop_back();
            }
        } else if (typeflag == '0' || typeflag == '\0') {
            if (is_hostile_path(name)) {
                throw Error(ErrorCode::PathTraversal, "hostile tar entry: " + name);
            }
            entries.push_back(Entry{name, std::string(data.substr(data_off, size))});
        } else if (typeflag == '5') {
            if (is_hostile_path(name)) {
                throw Error(ErrorCode::PathTraversal, "hostile tar entry: " + name);
            }
            // directory, nothing to extract
        }
        off = data_off + padded;
    }
    return entries;
}

std::vector<Entry> read_zip(std::string_view data) {
    // locate end-of-central-directory record
    const std::uint32_t kEocd = 0x06054b50;
    const std::uint32_t kCentral = 0x02014b50;
    const std::uint32_t kLocal = 0x04034b50;
    if (data.size() < 22) {
        corrupt("zip too small");
    }
    std::size_t eocd = std::string_view::npos;
    std::size_t scan_floor = data.size() >= 22 + 65535 ? data.size() - 22 - 65535 : 0;
    for (std::size_t i = data.size() - 22 + 1; i-- > scan_floor;) {
        if (read_le32(reinterpret_cast<const unsigned char*>(data.data() + i)) == kEocd) {
            eocd = i;
            break;
        }
    }
    if (eocd == std::string_view::npos) {
        corrupt("zip end-of-central-directory not found");
    }
    const unsigned char* e = reinterpret_cast<const unsigned char*>(data.data() + eocd);
    std::uint16_t total_entries = read_le16(e + 10);
    std::uint32_t cd_offset = read_le32(e + 16);

    std::vector<Entry> entries;
    std::size_t pos = cd_offset;
    for (std::uint16_t n = 0; n < total_entries; ++n) {
        if (pos + 46 > data.size()) {
            corrupt("zip central directory truncated");
        }
        const unsigned char* c = reinterpret_cast<const unsigned char*>(data.data() + pos);
        if (read_le32(c) != kCentral) {
            corrupt("bad zip central directory signature");
        }
        std::uint16_t method = read_le16(c + 10);
        std::uint32_t comp_size = read_le32(c + 20);
        std::uint32_t uncomp_size = read_le32(c + 24);
        std::uint16_t name_len = read_le16(c + 28);
        std::uint16_t extra_len = read_le16(c + 30);
        std::uint16_t comment_len = read_le16(c + 32);
        std::uint32_t local_off = read_le32(c + 42);
        if (pos + 46 + name_len > data.size()) {
            corrupt("zip entry name truncated");
        }
        std::string name(data.substr(pos + 46, name_len));
        pos += 46u + name_len + extra_len + comment_len;

        if (!name.empty() && name.back() == '/') {
            continue;  // directory entry
        }
        if (is_hostile_path(name)) {
            throw Error(ErrorCode::PathTraversal, "hostile zip entry: " + name);
        }
        if (local_off + 30 > data.size()) {
            corrupt("zip local header out of range");
        }
        const unsigned char* l = reinterpret_cast<const unsigned char*>(data.data() + local_off);
        if (read_le32(l) != kLocal) {
            corrupt("bad zip local header signature");
        }
        std::uint16_t l_name = read_le16(l + 26);
        std::uint16_t l_extra = read_le16(l + 28);
        std::size_t data_off = local_off + 30u + l_name + l_extra;
        if (data_off + comp_size > data.size()) {
            corrupt("zip data out of range");
        }
        std::string_view payload = data.substr(data_off, comp_size);
        if (method == 0) {
            if (comp_size != uncomp_size) {
                corrupt("stored zip entry with mismatched sizes");
            }
            entries.push_back(Entry{name, std::string(payload)});
        } else if (method == 8) {
            entries.push_back(Entry{name, inflate_raw(payload, uncomp_size)});
        } else {
            corrupt("unsupported zip compression method " + std::to_string(method));
        }
    }
    return entries;
}

std::string gzip_decompress(std::string_view data) {
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 32) != Z_OK) {  // auto-detect gzip/zlib wrapper
        corrupt("inflate init failed");
    }
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    zs.avail_in = static_cast<uInt>(data.size());
    std::string out;
    std::array<char, 1 << 15> buf;
    int ret = Z_OK;
    do {
        zs.next_out = reinterpret_cast<Bytef*>(buf.data());
        zs.avail_out = static_cast<uInt>(buf.size());
        ret = inflate(&zs, Z_NO_FLUSH);
        if (ret != Z_OK && ret != Z_STREAM_END) {
            inflateEnd(&zs);
            corrupt("gzip stream is corrupt");
        }
        out.append(buf.data(), buf.size() - zs.avail_out);
    } while (ret != Z_STREAM_END);
    inflateEnd(&zs);
    return out;
}

std::string gzip_compress(std::string_view data) {
    z_stream zs{};
    if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
        corrupt("deflate init failed");
    }
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    zs.avail_in = static_cast<uInt>(data.size());
    std::string out;
    std::array<char, 1 << 15> buf;
    int ret = Z_OK;
    do {
        zs.next_out = reinterpret_cast<Bytef*>(buf.data());
        zs.avail_out = static_cast<uInt>(buf.size());
        ret = deflate(&zs, Z_FINISH);
        out.append(buf.data(), buf.size() - zs.avail_out);
    } while (ret != Z_STREAM_END);
    deflateEnd(&zs);
    return out;
}

std::string make_tar(const std::vector<Entry>& entries, std::uint64_t mtime) {
    std::string out;
    for (const auto& entry : entries) {
        if (entry.name.size() > 100) {
            throw Error(ErrorCode::UnsupportedFormat, "tar writer: name longer than 100 chars");
        }
        char hdr[kTarBlock] = {0};
        std::memcpy(hdr, entry.name.data(), entry.name.size());
        put_octal(hdr + 100, 8, 0644);
        put_octal(hdr + 108, 8, 0);
        put_octal(hdr + 116, 8, 0);
        put_octal(hdr + 124, 12, entry.content.size());
        put_octal(hdr + 136, 12, mtime);
        hdr[156] = '0';
        std::memcpy(hdr + 257, "ustar", 5);
        hdr[263] = '0';
        hdr[264] = '0';
        std::memset(hdr + 148, ' ', 8);
        unsigned int checksum = 0;
        for (unsigned char c : hdr) {
            checksum += c;
        }
        put_octal(hdr + 148, 7, checksum);
        hdr[155] = ' ';
        out.append(hdr, kTarBlock);
        out.append(entry.content);
        std::size_t pad = (kTarBlock - entry.content.size() % kTarBlock) % kTarBlock;
        out.append(pad, '\0');
    }
    out.append(kTarBlock * 2, '\0');
    return out;
}

void write_tar_gz(const std::filesystem::path& path, const std::vector<Entry>& entries,
                  std::uint64_t mtime) {
    write_file(path, gzip_compress(make_tar(entries, mtime)));
}

void write_zip(const std::filesystem::path& path, const std::vector<Entry>& entries,
               std::uint16_t dos_time, std::uint16_t dos_date) {
    std::string out;
    struct Central {
        std::string name;
        std::uint32_t crc;
        std::uint32_t size;
        std::uint32_t offset;
    };
    std::vector<Central> centrals;
    for (const auto& entry : entries) {
        std::uint32_t crc = static_cast<std::uint32_t>(
            crc32(0L, reinterpret_cast<const Bytef*>(entry.content.data()),
                  static_cast<uInt>(entry.content.size())));
        Central c{entry.name, crc, static_cast<std::uint32_t>(entry.content.size()),
                  static_cast<std::uint32_t>(out.size())};
        append_le32(out, 0x04034b50);
        append_le16(out, 20);        // version needed
        append_le16(out, 0);         // flags
        append_le16(out, 0);         // method: stored
        append_le16(out, dos_time);
        append_le16(out, dos_date);
        append_le32(out, crc);
        append_le32(out, c.size);
        append_le32(out, c.size);
        append_le16(out, static_cast<std::uint16_t>(entry.name.size()));
        append_le16(out, 0);  // extra len
        out.append(entry.name);
        out.append(entry.content);
        centrals.push_back(std::move(c));
    }
    std::uint32_t cd_start = static_cast<std::uint32_t>(out.size());
    for (const auto& c : centrals) {
        append_le32(out, 0x02014b50);
        append_le16(out, 20);  // version made by
        append_le16(out, 20);  // version needed
        append_le16(out, 0);
        append_le16(out, 0);   // method: stored
        append_le16(out, dos_time);
        append_le16(out, dos_date);
        append_le32(out, c.crc);
        append_le32(out, c.size);
        append_le32(out, c.size);
        append_le16(out, static_cast<std::uint16_t>(c.name.size()));
        append_le16(out, 0);
        append_le16(out, 0);
        append_le16(out, 0);
        append_le16(out, 0);
        append_le32(out, 0);
        append_le32(out, c.offset);
        out.append(c.name);
    }
    std::uint32_t cd_size = static_cast<std::uint32_t>(out.size()) - cd_start;
    append_le32(out, 0x06054b50);
    append_le16(out, 0);
    append_le16(out, 0);
    append_le16(out, static_cast<std::uint16_t>(centrals.size()));
    append_le16(out, static_cast<std::uint16_t>(centrals.size()));
    append_le32(out, cd_size);
    append_le32(out, cd_start);
    append_le16(out, 0);
    write_file(path, out);
}

std::vector<Entry> read_archive(const std::filesystem::path& path) {
    std::string ext = to_lower(path.extension().string());
    std::string stem_ext = to_lower(std::filesystem::path(path.stem()).extension().string());
    std::string data = read_file(path);
    if (ext == ".zip" || ext == ".whl") {
        return read_zip(data);
    }
    if (ext == ".tgz" || (ext == ".gz" && stem_ext == ".tar")) {
        return read_tar(gzip_decompress(data));
    }
    if (ext == ".tar") {
        return read_tar(data);
    }
    throw Error(ErrorCode::UnsupportedFormat, "unsupported archive format: " + path.string());
}

}  // namespace rulegen::archive
