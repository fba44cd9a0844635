// sieve_cache.hpp
// On-disk cache of SieveWindow segments.
//
// File layout (host byte order):
//   magic[8] = "QPSIEVE\0", u32 version, u32 reserved, u64 lo, u64 hi,
//   bit-packed prime flags (LSB first, ceil((hi-lo)/8) bytes),
//   (hi-lo) doubles of Λ.
// A file is only used when its header echoes the requested (lo, hi) and
// its size matches exactly. Anything else is deleted with a warning.

#pragma once

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "sieve.hpp"

namespace qprog {

namespace fs = std::filesystem;

struct CacheEntry {
    fs::path path;
    u64 lo = 0;
    u64 hi = 0;
    std::uintmax_t bytes = 0;
};

struct CacheReport {
    std::vector<CacheEntry> segments;
    std::vector<std::string> warnings;
    std::size_t removed = 0;
    std::size_t written = 0;
};

class SieveCache {
public:
    static constexpr char kMagic[8] = {'Q', 'P', 'S', 'I', 'E', 'V', 'E', '\0'};
    static constexpr std::uint32_t kVersion = 1;
    static constexpr std::size_t kHeaderBytes = 8 + 4 + 4 + 8 + 8;

    explicit SieveCache(fs::path dir) : dir_(std::move(dir)) {}

    const fs::path& dir() const { return dir_; }

    fs::path path_for(u64 lo, u64 hi) const {
        return dir_ / ("sieve_" + std::to_string(lo) + "_" + std::to_string(hi) + ".bin");
    }

    static std::uintmax_t expected_bytes(u64 lo, u64 hi) {
        const u64 n = hi - lo;
        return kHeaderBytes + (n + 7) / 8 + n * sizeof(double);
    }

    void store(const SieveWindow& w) const {
        fs::create_directories(dir_);
        const auto path = path_for(w.lo, w.hi);
        const auto tmp = fs::path(path.string() + ".tmp");
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw std::runtime_error("cache: cannot write " + tmp.string());
            write_window(out, w);
            if (!out) throw std::runtime_error("cache: write failed for " + tmp.string());
        }
        fs::rename(tmp, path);
    }

    /// Returns the cached window for (lo, hi), or nullopt. Invalid files are
    /// removed and a warning is appended.
    std::optional<SieveWindow> load(u64 lo, u64 hi, std::vector<std::string>* warnings = nullptr) const {
        const auto path = path_for(lo, hi);
        if (!fs::exists(path)) return std::nullopt;
        std::string why;
        if (auto w = read_window(path, &why)) {
            if (w->lo == lo && w->hi == hi) return w;
            why = "header does not echo requested range";
        }
        std::error_code ec;
        fs::remove(path, ec);
        if (warnings) warnings->push_back("removed corrupt cache file " + path.string() + ": " + why);
        return std::nullopt;
    }

    SieveWindow get_or_compute(u64 lo, u64 hi, const PrimeTable& table,
                               std::vector<std::string>* warnings = nullptr) const {
        if (auto w = load(lo, hi, warnings)) return *std::move(w);
        SieveWindow w = sieve_window(lo, hi, table);
        store(w);
        return w;
    }

    CacheReport stat() const {
        CacheReport report;
        if (!fs::exists(dir_)) return report;
        for (const auto& entry : fs::directory_iterator(dir_)) {
            if (!is_cache_file(entry.path())) continue;
            std::string why;
            auto header = read_header(entry.path(), &why);
            if (!header) {
                report.warnings.push_back("skipped corrupt cache file " + entry.path().string() + ": " + why);
                continue;
            }
            report.segments.push_back({entry.path(), header->first, header->second, entry.file_size()});
        }
        std::sort(report.segments.begin(), report.segments.end(),
                  [](const CacheEntry& a, const CacheEntry& b) { return a.lo < b.lo; });
        return report;
    }

    CacheReport clear() const {
        CacheReport report;
        if (!fs::exists(dir_)) return report;
        std::vector<fs::path> victims;
        for (const auto& entry : fs::directory_iterator(dir_))
            if (is_cache_file(entry.path())) victims.push_back(entry.path());
        for (const auto& p : victims)
            if (fs::remove(p)) ++report.removed;
        return report;
    }

    /// Pre-sieves [lo, hi) in segments of at most `segment` integers.
    CacheReport warm(u64 lo, u64 hi, u64 segment = u64{1} << 20) const {
        if (lo < 2 || hi <= lo) throw std::invalid_argument("cache warm: require 2 <= lo < hi");
        CacheReport report;
        const PrimeTable table = primes_up_to(std::max<u64>(2, integer_sqrt(hi)));
        for (u64 a = lo; a < hi; a += segment) {
            const u64 b = std::min(hi, a + segment);
            if (load(a, b, &report.warnings)) continue;
            store(sieve_window(a, b, table));
            ++report.written;
        }
        auto listing = stat();
        report.segments = std::move(listing.segments);
        return report;
    }

private:
    static bool is_cache_file(const fs::path& p) {
        const auto name = p.filename().string();
        return name.rfind("sieve_", 0) == 0 && p.extension() == ".bin";
    }

    static void write_window(std::ostream& out, const SieveWindow& w) {
        const std::uint32_t version = kVersion, reserved = 0;
        out.write(kMagic, sizeof kMagic);
        out.write(reinterpret_cast<const char*>(&version), sizeof version);
        out.write(reinterpret_cast<const char*>(&reserved), sizeof reserved);
        out.write(reinterpret_cast<const char*>(&w.lo), sizeof w.lo);
        out.write(reinterpret_cast<const char*>(&w.hi), sizeof w.hi);
        std::vector<unsigned char> bits((w.size() + 7) / 8, 0);
        for (u64 i = 0; i < w.size(); ++i)
            if (w.prime_flags[i]) bits[i / 8] |= static_cast<unsigned char>(1u << (i % 8));
        out.write(reinterpret_cast<const char*>(bits.data()), static_cast<std::streamsize>(bits.size()));
        out.write(reinterpret_cast<const char*>(w.lambda.data()),
                  static_cast<std::streamsize>(w.lambda.size() * sizeof(double)));
    }

    static std::optional<std::pair<u64, u64>> read_header(const fs::path& path, std::string* why) {
        std::ifstream in(path, std::ios::binary);
        char magic[8];
        std::uint32_t version = 0, reserved = 0;
        u64 lo = 0, hi = 0;
        in.read(magic, sizeof magic);
        in.read(reinterpret_cast<char*>(&version), sizeof version);
        in.read(reinterpret_cast<char*>(&reserved), sizeof reserved);
        in.read(reinterpret_cast<char*>(&lo), sizeof lo);
        in.read(reinterpret_cast<char*>(&hi), sizeof hi);
        if (!in) return *why = "truncated header", std::nullopt;
        if (std::memcmp(magic, kMagic, sizeof magic) != 0) return *why = "bad magic", std::nullopt;
        if (version != kVersion) return *why = "unsupported version", std::nullopt;
        if (lo < 2 || hi <= lo) return *why = "invalid range in header", std::nullopt;
        std::error_code ec;
        if (fs::file_size(path, ec) != expected_bytes(lo, hi)) return *why = "size mismatch", std::nullopt;
        return std::pair{lo, hi};
    }

    static std::optional<SieveWindow> read_window(const fs::path& path, std::string* why) {
        auto header = read_header(path, why);
        if (!header) return std::nullopt;
        SieveWindow w;
        w.lo = header->first;
        w.hi = header->second;
        std::ifstream in(path, std::ios::binary);
        in.seekg(static_cast<std::streamoff>(kHeaderBytes));
        std::vector<unsigned char> bits((w.size() + 7) / 8);
        in.read(reinterpret_cast<char*>(bits.data()), static_cast<std::streamsize>(bits.size()));
        w.lambda.resize(w.size());
        in.read(reinterpret_cast<char*>(w.lambda.data()), static_cast<std::streamsize>(w.size() * sizeof(double)));
        if (!in) return *why = "truncated body", std::nullopt;
        w.prime_flags.resize(w.size());
        for (u64 i = 0; i < w.size(); ++i) w.prime_flags[i] = (bits[i / 8] >> (i % 8)) & 1u;
        return w;
    }

    fs::path dir_;
};

}  // namespace qprog
