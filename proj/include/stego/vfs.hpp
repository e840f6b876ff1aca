#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stego/bytes.hpp"
#include "stego/crc32.hpp"
#include "stego/error.hpp"
#include "stego/payload.hpp"

// Portable virtual disk image: 512-byte sectors grouped into clusters, a
// FAT-like allocation table, hierarchical file paths, and named alternate
// streams. Deleting a file only frees its table entries; cluster content
// survives until overwritten, which is what makes slack-space hiding and
// recovery meaningful.
//
// File layout (all integers little-endian):
//   superblock  magic "VFS1", version, sector size, sectors/cluster,
//               cluster count, then u64 offsets: allocation table, file
//               table, file table length, data region
//   allocation  4 bytes per cluster: 0xFFFFFFFF free, 0xFFFFFFFE end of
//               chain, otherwise next cluster index
//   file table  length-prefixed records (path, size, first cluster, streams)
//   data        cluster_count * cluster_bytes raw bytes

namespace stego {

enum class SlackKind { ram_slack, file_slack };

struct SlackExtent {
    std::string path;
    std::uint32_t cluster = 0;
    std::uint32_t offset = 0; // byte offset within the cluster
    std::uint32_t length = 0;
    SlackKind kind = SlackKind::file_slack;
};

struct SlackSelection {
    enum class Mode { dumb, random, intelligent };
    Mode mode = Mode::dumb;
    std::uint64_t seed = 0; // random mode only
};

struct SlackObfuscation {
    enum class Mode : std::uint8_t { none = 0, random_key = 1, xor_file = 2 };
    Mode mode = Mode::none;
    std::uint64_t seed = 0; // random_key: keystream seed (keystream is stored)
    Bytes key;              // xor_file: key bytes, deliberately NOT stored

    static SlackObfuscation plain() { return {}; }
    static SlackObfuscation with_random_key(std::uint64_t seed) {
        SlackObfuscation o;
        o.mode = Mode::random_key;
        o.seed = seed;
        return o;
    }
    static SlackObfuscation with_xor_file(Bytes key) {
        SlackObfuscation o;
        o.mode = Mode::xor_file;
        o.key = std::move(key);
        return o;
    }
};

struct StreamEntry {
    std::string name;
    std::uint32_t size = 0;
    std::uint32_t first_cluster = 0xFFFFFFFF;
};

struct FileEntry {
    std::string path;
    std::uint32_t size = 0;
    std::uint32_t first_cluster = 0xFFFFFFFF;
    std::vector<StreamEntry> streams;
};

struct AdsEntry {
    std::string path;
    std::string stream;
    std::uint32_t size = 0;
};

// streams.exe-style listing line.
inline std::string format_ads_entry(const AdsEntry& e) {
    return e.path + ":" + e.stream + ":$DATA " + std::to_string(e.size);
}

struct ExportResult {
    Bytes main;
    std::vector<std::pair<std::string, Bytes>> streams; // include_streams only
    std::vector<std::string> dropped;                   // names lost otherwise
};

struct SlackHideResult {
    Bytes metadata;
    std::size_t chunk_count = 0;
};

class DiskImage {
public:
    static constexpr std::uint32_t kSectorSize = 512;
    static constexpr std::uint32_t kFree = 0xFFFFFFFF;
    static constexpr std::uint32_t kEndOfChain = 0xFFFFFFFE;
    static constexpr std::uint32_t kNoCluster = 0xFFFFFFFF;

    static DiskImage format(std::uint32_t cluster_count, std::uint32_t sectors_per_cluster) {
        if (cluster_count == 0 || cluster_count > (1u << 20))
            throw UsageError("cluster count must be between 1 and 1048576");
        if (sectors_per_cluster == 0 || sectors_per_cluster > 128 ||
            (sectors_per_cluster & (sectors_per_cluster - 1)) != 0)
            throw UsageError("sectors per cluster must be a power of two between 1 and 128");
        DiskImage d;
        d.sectors_per_cluster_ = sectors_per_cluster;
        d.alloc_.assign(cluster_count, kFree);
        d.data_.assign(static_cast<std::size_t>(cluster_count) * sectors_per_cluster *
                           kSectorSize,
                       0);
        return d;
    }

    std::uint32_t cluster_bytes() const { return sectors_per_cluster_ * kSectorSize; }
    std::uint32_t cluster_count() const { return static_cast<std::uint32_t>(alloc_.size()); }
    std::uint32_t sectors_per_cluster() const { return sectors_per_cluster_; }
    const std::vector<FileEntry>& files() const { return files_; }

    std::uint32_t free_clusters() const {
        return static_cast<std::uint32_t>(std::count(alloc_.begin(), alloc_.end(), kFree));
    }

    // Paths are '/'-separated; ':' is reserved for stream syntax in the CLI.
    static std::string normalize_path(std::string_view raw) {
        std::string out;
        std::size_t i = 0;
        while (i < raw.size()) {
            while (i < raw.size() && raw[i] == '/') ++i;
            std::size_t j = i;
            while (j < raw.size() && raw[j] != '/') ++j;
            if (j > i) {
                const std::string_view seg = raw.substr(i, j - i);
                if (seg == "." || seg == "..")
                    throw UsageError("'.' and '..' path segments are not supported");
                if (seg.find(':') != std::string_view::npos)
                    throw UsageError("':' is not allowed in paths");
                if (!out.empty()) out += '/';
                out += seg;
            }
            i = j;
        }
        if (out.empty()) throw UsageError("empty path");
        return out;
    }

    void write_file(std::string_view raw_path, const Bytes& content) {
        const std::string path = normalize_path(raw_path);
        if (find_file(path)) throw UsageError("file already exists: " + path);
        FileEntry entry;
        entry.path = path;
        entry.size = checked_size(content.size());
        entry.first_cluster = store_content(content);
        files_.push_back(std::move(entry));
        sort_files();
    }

    Bytes read_file(std::string_view raw_path) const {
        const FileEntry& f = require_file(normalize_path(raw_path));
        return read_chain(f.first_cluster, f.size);
    }

    // Frees the table entry and the chain; cluster content is deliberately
    // left in place (recoverable through read_raw until reused).
    void delete_file(std::string_view raw_path) {
        const std::string path = normalize_path(raw_path);
        for (std::size_t i = 0; i < files_.size(); ++i) {
            if (files_[i].path != path) continue;
            free_chain(files_[i].first_cluster);
            for (const StreamEntry& s : files_[i].streams) free_chain(s.first_cluster);
            files_.erase(files_.begin() + static_cast<std::ptrdiff_t>(i));
            return;
        }
        throw UsageError("no such file: " + path);
    }

    Bytes read_raw(std::uint32_t cluster) const {
        if (cluster >= cluster_count())
            throw UsageError("cluster index " + std::to_string(cluster) + " out of range");
        const std::size_t off = static_cast<std::size_t>(cluster) * cluster_bytes();
        return Bytes(data_.begin() + off, data_.begin() + off + cluster_bytes());
    }

    std::vector<SlackExtent> slack_map(std::string_view root = "/", int levels = 1 << 20) const {
        const std::string scope = normalize_root(root);
        require_scope(scope);
        std::vector<SlackExtent> extents;
        for (const FileEntry& f : files_) {
            if (!in_scope(f.path, scope, levels)) continue;
            append_slack_extents(f, extents);
        }
        return extents; // files_ is path-sorted, extents per file are by offset
    }

    SlackHideResult slack_hide(const Bytes& payload, const Passphrase& pass,
                               const SlackSelection& selection,
                               const SlackObfuscation& obfuscation,
                               std::string_view root = "/", int levels = 1 << 20) {
        if (pass.text.empty()) throw UsageError("empty passphrase");
        if (obfuscation.mode == SlackObfuscation::Mode::xor_file && obfuscation.key.empty())
            throw UsageError("xor-file obfuscation needs a non-empty key file");

        // Hiding uses file slack only; RAM slack is zeroed on write by honest
        // file systems, so payload there would not survive.
        std::vector<SlackExtent> extents;
        for (const SlackExtent& e : slack_map(root, levels))
            if (e.kind == SlackKind::file_slack) extents.push_back(e);

        switch (selection.mode) {
        case SlackSelection::Mode::dumb:
            break; // path order
        case SlackSelection::Mode::random: {
            SplitMix64 rng(selection.seed);
            for (std::size_t i = extents.size(); i > 1; --i)
                std::swap(extents[i - 1], extents[rng.next_below(i)]);
            break;
        }
        case SlackSelection::Mode::intelligent:
            std::stable_sort(extents.begin(), extents.end(),
                             [](const SlackExtent& a, const SlackExtent& b) {
                                 return a.length > b.length;
                             });
            break;
        }

        std::uint64_t available = 0;
        for (const SlackExtent& e : extents) available += e.length;
        if (payload.size() > available)
            throw CapacityError("capacity exceeded: needed " + std::to_string(payload.size()) +
                                " bytes of file slack, available " + std::to_string(available));

        // Obfuscate the whole payload up front.
        Bytes obfuscated = payload;
        Bytes keystream;
        if (obfuscation.mode == SlackObfuscation::Mode::random_key) {
            SplitMix64 rng(obfuscation.seed);
            keystream.resize(payload.size());
            for (std::size_t i = 0; i < payload.size(); ++i) {
                keystream[i] = rng.next_byte();
                obfuscated[i] ^= keystream[i];
            }
        } else if (obfuscation.mode == SlackObfuscation::Mode::xor_file) {
            for (std::size_t i = 0; i < payload.size(); ++i)
                obfuscated[i] ^= obfuscation.key[i % obfuscation.key.size()];
        }

        // Chunk records, in reassembly order.
        Bytes blob = {'S', 'L', 'K', '1'};
        blob.push_back(1); // version
        blob.push_back(static_cast<std::uint8_t>(obfuscation.mode));
        put_u32le(blob, checked_size(payload.size()));
        put_u32le(blob, crc32(payload));
        put_u32le(blob, checked_size(keystream.size()));
        blob.insert(blob.end(), keystream.begin(), keystream.end());

        std::size_t cursor = 0;
        std::size_t chunk_count = 0;
        Bytes records;
        for (const SlackExtent& e : extents) {
            if (cursor >= obfuscated.size()) break;
            const auto len = static_cast<std::uint32_t>(
                std::min<std::size_t>(e.length, obfuscated.size() - cursor));
            const std::size_t dst = static_cast<std::size_t>(e.cluster) * cluster_bytes() +
                                    e.offset;
            std::copy_n(obfuscated.begin() + static_cast<std::ptrdiff_t>(cursor), len,
                        data_.begin() + static_cast<std::ptrdiff_t>(dst));
            const Bytes stored(obfuscated.begin() + static_cast<std::ptrdiff_t>(cursor),
                               obfuscated.begin() + static_cast<std::ptrdiff_t>(cursor + len));
            if (e.path.size() > 0xFFFF) throw UsageError("path too long for metadata");
            put_u16le(records, static_cast<std::uint16_t>(e.path.size()));
            records.insert(records.end(), e.path.begin(), e.path.end());
            put_u32le(records, e.cluster);
            put_u32le(records, e.offset);
            put_u32le(records, len);
            put_u32le(records, crc32(stored));
            cursor += len;
            ++chunk_count;
        }
        put_u32le(blob, static_cast<std::uint32_t>(chunk_count));
        blob.insert(blob.end(), records.begin(), records.end());

        SlackHideResult result;
        result.chunk_count = chunk_count;
        result.metadata = frame_payload(blob, "", pass);
        return result;
    }

    Bytes slack_restore(const Bytes& metadata, const Passphrase& pass,
                        const std::optional<Bytes>& xor_key = std::nullopt) const {
        const Bytes blob = parse_frame(metadata, Passphrase{pass.text}).body;
        std::size_t pos = 0;
        auto need = [&](std::size_t n) {
            if (blob.size() - pos < n) throw FormatError("slack metadata truncated");
        };
        need(14);
        if (blob[0] != 'S' || blob[1] != 'L' || blob[2] != 'K' || blob[3] != '1')
            throw FormatError("not slack metadata (bad magic)");
        if (blob[4] != 1) throw FormatError("unsupported slack metadata version");
        const auto mode = static_cast<SlackObfuscation::Mode>(blob[5]);
        const std::uint32_t payload_len = get_u32le(blob.data() + 6);
        const std::uint32_t payload_crc = get_u32le(blob.data() + 10);
        pos = 14;
        need(4);
        const std::uint32_t key_len = get_u32le(blob.data() + pos);
        pos += 4;
        need(key_len);
        const Bytes keystream(blob.begin() + static_cast<std::ptrdiff_t>(pos),
                              blob.begin() + static_cast<std::ptrdiff_t>(pos + key_len));
        pos += key_len;
        need(4);
        const std::uint32_t chunk_count = get_u32le(blob.data() + pos);
        pos += 4;

        if (mode == SlackObfuscation::Mode::xor_file && (!xor_key || xor_key->empty()))
            throw UsageError("restoring xor-file obfuscated payload needs the key file");
        if (mode == SlackObfuscation::Mode::random_key && key_len != payload_len)
            throw FormatError("slack metadata keystream length mismatch");

        Bytes assembled;
        assembled.reserve(payload_len);
        for (std::uint32_t c = 0; c < chunk_count; ++c) {
            need(2);
            const std::uint16_t path_len = get_u16le(blob.data() + pos);
            pos += 2;
            need(path_len + 16u);
            const std::string path(blob.begin() + static_cast<std::ptrdiff_t>(pos),
                                   blob.begin() + static_cast<std::ptrdiff_t>(pos + path_len));
            pos += path_len;
            const std::uint32_t cluster = get_u32le(blob.data() + pos);
            const std::uint32_t offset = get_u32le(blob.data() + pos + 4);
            const std::uint32_t length = get_u32le(blob.data() + pos + 8);
            const std::uint32_t stored_crc = get_u32le(blob.data() + pos + 12);
            pos += 16;

            if (cluster >= cluster_count() ||
                static_cast<std::uint64_t>(offset) + length > cluster_bytes())
                throw FormatError("slack metadata chunk out of range");
            const std::size_t src = static_cast<std::size_t>(cluster) * cluster_bytes() + offset;
            const Bytes stored(data_.begin() + static_cast<std::ptrdiff_t>(src),
                               data_.begin() + static_cast<std::ptrdiff_t>(src + length));
            if (crc32(stored) != stored_crc)
                throw IntegrityError("slack chunk CRC mismatch (carrier rewritten?): " + path);
            assembled.insert(assembled.end(), stored.begin(), stored.end());
        }
        if (assembled.size() != payload_len)
            throw FormatError("slack metadata length mismatch");

        if (mode == SlackObfuscation::Mode::random_key) {
            for (std::size_t i = 0; i < assembled.size(); ++i) assembled[i] ^= keystream[i];
        } else if (mode == SlackObfuscation::Mode::xor_file) {
            for (std::size_t i = 0; i < assembled.size(); ++i)
                assembled[i] ^= (*xor_key)[i % xor_key->size()];
        }
        if (crc32(assembled) != payload_crc)
            throw IntegrityError("restored payload CRC mismatch (wrong xor key file?)");
        return assembled;
    }

    void ads_attach(std::string_view raw_path, std::string_view stream_name,
                    const Bytes& content) {
        FileEntry& f = require_file_mut(normalize_path(raw_path));
        validate_stream_name(stream_name);
        for (const StreamEntry& s : f.streams)
            if (s.name == stream_name)
                throw UsageError("stream already exists: " + f.path + ":" +
                                 std::string(stream_name));
        StreamEntry s;
        s.name = std::string(stream_name);
        s.size = checked_size(content.size());
        s.first_cluster = store_content(content);
        f.streams.push_back(std::move(s));
        std::sort(f.streams.begin(), f.streams.end(),
                  [](const StreamEntry& a, const StreamEntry& b) { return a.name < b.name; });
    }

    Bytes ads_read(std::string_view raw_path, std::string_view stream_name) const {
        const FileEntry& f = require_file(normalize_path(raw_path));
        for (const StreamEntry& s : f.streams)
            if (s.name == stream_name) return read_chain(s.first_cluster, s.size);
        throw UsageError("no such stream: " + f.path + ":" + std::string(stream_name));
    }

    void ads_remove(std::string_view raw_path, std::string_view stream_name) {
        FileEntry& f = require_file_mut(normalize_path(raw_path));
        for (std::size_t i = 0; i < f.streams.size(); ++i) {
            if (f.streams[i].name != stream_name) continue;
            free_chain(f.streams[i].first_cluster);
            f.streams.erase(f.streams.begin() + static_cast<std::ptrdiff_t>(i));
            return;
        }
        throw UsageError("no such stream: " + f.path + ":" + std::string(stream_name));
    }

    std::vector<AdsEntry> ads_scan(std::string_view root = "/", int levels = 1 << 20) const {
        const std::string scope = normalize_root(root);
        require_scope(scope);
        std::vector<AdsEntry> out;
        for (const FileEntry& f : files_) {
            if (!in_scope(f.path, scope, levels)) continue;
            for (const StreamEntry& s : f.streams) out.push_back({f.path, s.name, s.size});
        }
        return out; // files_ path-sorted, streams name-sorted
    }

    ExportResult export_file(std::string_view raw_path, bool include_streams) const {
        const FileEntry& f = require_file(normalize_path(raw_path));
        ExportResult result;
        result.main = read_chain(f.first_cluster, f.size);
        for (const StreamEntry& s : f.streams) {
            if (include_streams)
                result.streams.emplace_back(s.name, read_chain(s.first_cluster, s.size));
            else
                result.dropped.push_back(s.name);
        }
        return result;
    }

    Bytes save() const {
        Bytes ftable;
        put_u32le(ftable, static_cast<std::uint32_t>(files_.size()));
        for (const FileEntry& f : files_) {
            put_u16le(ftable, static_cast<std::uint16_t>(f.path.size()));
            ftable.insert(ftable.end(), f.path.begin(), f.path.end());
            put_u32le(ftable, f.size);
            put_u32le(ftable, f.first_cluster);
            put_u16le(ftable, static_cast<std::uint16_t>(f.streams.size()));
            for (const StreamEntry& s : f.streams) {
                put_u16le(ftable, static_cast<std::uint16_t>(s.name.size()));
                ftable.insert(ftable.end(), s.name.begin(), s.name.end());
                put_u32le(ftable, s.size);
                put_u32le(ftable, s.first_cluster);
            }
        }

        Bytes out = {'V', 'F', 'S', '1'};
        put_u32le(out, 1); // format version
        put_u32le(out, kSectorSize);
        put_u32le(out, sectors_per_cluster_);
        put_u32le(out, cluster_count());
        const std::uint64_t alloc_off = 52;
        const std::uint64_t ft_off = alloc_off + 4ull * cluster_count();
        const std::uint64_t data_off = ft_off + ftable.size();
        put_u64le(out, alloc_off);
        put_u64le(out, ft_off);
        put_u64le(out, ftable.size());
        put_u64le(out, data_off);
        for (std::uint32_t a : alloc_) put_u32le(out, a);
        out.insert(out.end(), ftable.begin(), ftable.end());
        out.insert(out.end(), data_.begin(), data_.end());
        return out;
    }

    static DiskImage load(const Bytes& file) {
        if (file.size() < 52 || file[0] != 'V' || file[1] != 'F' || file[2] != 'S' ||
            file[3] != '1')
            throw FormatError("not a VFS image (bad magic)");
        if (get_u32le(file.data() + 4) != 1)
            throw FormatError("unsupported VFS image version");
        if (get_u32le(file.data() + 8) != kSectorSize)
            throw FormatError("unsupported VFS sector size");
        const std::uint32_t spc = get_u32le(file.data() + 12);
        const std::uint32_t clusters = get_u32le(file.data() + 16);
        const std::uint64_t alloc_off = get_u64le(file.data() + 20);
        const std::uint64_t ft_off = get_u64le(file.data() + 28);
        const std::uint64_t ft_len = get_u64le(file.data() + 36);
        const std::uint64_t data_off = get_u64le(file.data() + 44);

        DiskImage d = format(clusters, spc); // validates spc/cluster count
        const std::uint64_t expect_size =
            data_off + static_cast<std::uint64_t>(clusters) * d.cluster_bytes();
        if (alloc_off != 52 || ft_off != alloc_off + 4ull * clusters ||
            data_off != ft_off + ft_len || file.size() != expect_size)
            throw FormatError("corrupt VFS image: bad section offsets");

        for (std::uint32_t c = 0; c < clusters; ++c)
            d.alloc_[c] = get_u32le(file.data() + alloc_off + 4ull * c);
        std::copy_n(file.begin() + static_cast<std::ptrdiff_t>(data_off), d.data_.size(),
                    d.data_.begin());

        std::size_t pos = ft_off;
        const std::size_t ft_end = ft_off + ft_len;
        auto need = [&](std::size_t n) {
            if (ft_end - pos < n) throw FormatError("corrupt VFS image: truncated file table");
        };
        need(4);
        const std::uint32_t file_count = get_u32le(file.data() + pos);
        pos += 4;
        auto read_str = [&](std::size_t len) {
            need(len);
            std::string s(file.begin() + static_cast<std::ptrdiff_t>(pos),
                          file.begin() + static_cast<std::ptrdiff_t>(pos + len));
            pos += len;
            return s;
        };
        for (std::uint32_t i = 0; i < file_count; ++i) {
            need(2);
            const std::uint16_t path_len = get_u16le(file.data() + pos);
            pos += 2;
            FileEntry f;
            f.path = read_str(path_len);
            need(10);
            f.size = get_u32le(file.data() + pos);
            f.first_cluster = get_u32le(file.data() + pos + 4);
            const std::uint16_t stream_count = get_u16le(file.data() + pos + 8);
            pos += 10;
            for (std::uint16_t s = 0; s < stream_count; ++s) {
                need(2);
                const std::uint16_t name_len = get_u16le(file.data() + pos);
                pos += 2;
                StreamEntry se;
                se.name = read_str(name_len);
                need(8);
                se.size = get_u32le(file.data() + pos);
                se.first_cluster = get_u32le(file.data() + pos + 4);
                pos += 8;
                f.streams.push_back(std::move(se));
            }
            d.files_.push_back(std::move(f));
        }
        if (pos != ft_end) throw FormatError("corrupt VFS image: file table length mismatch");
        d.validate();
        return d;
    }

    // Structural invariants: chains acyclic and exactly sized, no cluster in
    // two chains, no used-but-unowned clusters.
    void validate() const {
        std::vector<char> owned(cluster_count(), 0);
        auto walk = [&](std::uint32_t first, std::uint32_t size, const std::string& what) {
            const std::uint32_t expected =
                size == 0 ? 0 : (size + cluster_bytes() - 1) / cluster_bytes();
            std::uint32_t n = 0;
            std::uint32_t c = first;
            if (expected == 0) {
                if (first != kNoCluster)
                    throw FormatError("corrupt image: empty " + what + " owns clusters");
                return;
            }
            while (true) {
                if (c >= cluster_count())
                    throw FormatError("corrupt image: " + what + " chain leaves the disk");
                if (owned[c])
                    throw FormatError("corrupt image: cluster " + std::to_string(c) +
                                      " owned twice (" + what + ")");
                owned[c] = 1;
                ++n;
                if (n > expected)
                    throw FormatError("corrupt image: " + what + " chain too long");
                const std::uint32_t next = alloc_[c];
                if (next == kFree)
                    throw FormatError("corrupt image: " + what + " chain enters a free cluster");
                if (next == kEndOfChain) break;
                c = next;
            }
            if (n != expected)
                throw FormatError("corrupt image: " + what + " chain length mismatch");
        };
        for (const FileEntry& f : files_) {
            walk(f.first_cluster, f.size, f.path);
            for (const StreamEntry& s : f.streams)
                walk(s.first_cluster, s.size, f.path + ":" + s.name);
        }
        for (std::uint32_t c = 0; c < cluster_count(); ++c)
            if (!owned[c] && alloc_[c] != kFree)
                throw FormatError("corrupt image: cluster " + std::to_string(c) +
                                  " used but unowned");
    }

private:
    static std::uint32_t checked_size(std::size_t n) {
        if (n > 0xFFFFFFFFull) throw UsageError("content larger than 4 GiB");
        return static_cast<std::uint32_t>(n);
    }

    static void validate_stream_name(std::string_view name) {
        if (name.empty()) throw UsageError("empty stream name");
        if (name.find(':') != std::string_view::npos ||
            name.find('/') != std::string_view::npos)
            throw UsageError("stream names must not contain ':' or '/'");
    }

    static std::string normalize_root(std::string_view root) {
        if (root.empty() || root == "/") return std::string();
        return normalize_path(root);
    }

    void require_scope(const std::string& scope) const {
        if (scope.empty()) return;
        for (const FileEntry& f : files_)
            if (f.path == scope || (f.path.size() > scope.size() &&
                                    f.path.compare(0, scope.size(), scope) == 0 &&
                                    f.path[scope.size()] == '/'))
                return;
        throw UsageError("no such path in image: " + scope);
    }

    static bool in_scope(const std::string& path, const std::string& scope, int levels) {
        std::string_view rel = path;
        if (!scope.empty()) {
            if (path == scope) return levels >= 0;
            if (path.size() <= scope.size() || path.compare(0, scope.size(), scope) != 0 ||
                path[scope.size()] != '/')
                return false;
            rel = std::string_view(path).substr(scope.size() + 1);
        }
        const auto depth = static_cast<int>(std::count(rel.begin(), rel.end(), '/'));
        return depth <= levels;
    }

    const FileEntry* find_file(const std::string& path) const {
        for (const FileEntry& f : files_)
            if (f.path == path) return &f;
        return nullptr;
    }

    const FileEntry& require_file(const std::string& path) const {
        if (const FileEntry* f = find_file(path)) return *f;
        throw UsageError("no such file: " + path);
    }

    FileEntry& require_file_mut(const std::string& path) {
        for (FileEntry& f : files_)
            if (f.path == path) return f;
        throw UsageError("no such file: " + path);
    }

    void sort_files() {
        std::sort(files_.begin(), files_.end(),
                  [](const FileEntry& a, const FileEntry& b) { return a.path < b.path; });
    }

    // Allocates ceil(size / cluster_bytes) clusters first-fit and copies the
    // content in. The tail of the final sector is zeroed (RAM slack), the
    // remaining sectors of the final cluster are left untouched (file slack).
    std::uint32_t store_content(const Bytes& content) {
        if (content.empty()) return kNoCluster;
        const std::uint32_t cb = cluster_bytes();
        const auto needed =
            static_cast<std::uint32_t>((content.size() + cb - 1) / cb);

        std::vector<std::uint32_t> clusters;
        for (std::uint32_t c = 0; c < cluster_count() && clusters.size() < needed; ++c)
            if (alloc_[c] == kFree) clusters.push_back(c);
        if (clusters.size() < needed)
            throw CapacityError("disk full: need " + std::to_string(needed) +
                                " clusters, only " + std::to_string(clusters.size()) +
                                " free");

        for (std::size_t i = 0; i < clusters.size(); ++i)
            alloc_[clusters[i]] =
                (i + 1 < clusters.size()) ? clusters[i + 1] : kEndOfChain;

        std::size_t remaining = content.size();
        const std::uint8_t* src = content.data();
        for (std::uint32_t c : clusters) {
            const std::size_t n = std::min<std::size_t>(remaining, cb);
            std::uint8_t* dst = data_.data() + static_cast<std::size_t>(c) * cb;
            std::copy_n(src, n, dst);
            if (n < cb) {
                const std::size_t sector_end = ((n + kSectorSize - 1) / kSectorSize) * kSectorSize;
                std::fill(dst + n, dst + sector_end, 0);
            }
            src += n;
            remaining -= n;
        }
        return clusters.front();
    }

    Bytes read_chain(std::uint32_t first, std::uint32_t size) const {
        Bytes out;
        out.reserve(size);
        std::uint32_t c = first;
        std::size_t remaining = size;
        while (remaining > 0) {
            if (c >= cluster_count())
                throw FormatError("corrupt image: chain leaves the disk");
            const std::size_t n = std::min<std::size_t>(remaining, cluster_bytes());
            const std::size_t off = static_cast<std::size_t>(c) * cluster_bytes();
            out.insert(out.end(), data_.begin() + static_cast<std::ptrdiff_t>(off),
                       data_.begin() + static_cast<std::ptrdiff_t>(off + n));
            remaining -= n;
            if (remaining > 0) c = alloc_[c];
        }
        return out;
    }

    void free_chain(std::uint32_t first) {
        std::uint32_t c = first;
        while (c != kNoCluster && c != kEndOfChain) {
            if (c >= cluster_count()) return;
            const std::uint32_t next = alloc_[c];
            alloc_[c] = kFree;
            c = next;
        }
    }

    void append_slack_extents(const FileEntry& f, std::vector<SlackExtent>& out) const {
        if (f.size == 0) return;
        const std::uint32_t cb = cluster_bytes();
        // Last cluster of the chain and the bytes used within it.
        std::uint32_t last = f.first_cluster;
        while (alloc_[last] != kEndOfChain) last = alloc_[last];
        const std::uint32_t used = ((f.size - 1) % cb) + 1;
        const std::uint32_t sector_end = ((used + kSectorSize - 1) / kSectorSize) * kSectorSize;
        if (used < sector_end)
            out.push_back({f.path, last, used, sector_end - used, SlackKind::ram_slack});
        if (sector_end < cb)
            out.push_back({f.path, last, sector_end, cb - sector_end, SlackKind::file_slack});
    }

    std::uint32_t sectors_per_cluster_ = 1;
    std::vector<std::uint32_t> alloc_;
    std::vector<FileEntry> files_;
    Bytes data_;
};

} // namespace stego
