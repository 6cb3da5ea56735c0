#include "amite/poly.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <mutex>
#include <numeric>

namespace amite::poly {

// File layout (all integers little-endian):
//   magic "AMTMNC01"
//   u32 chunk count, then per chunk: u32 j, u64 offset, u64 length
//   chunk body: u32 records; per record: u16 parts, u16 part..., u32 bytes, magnitude bytes (big-endian)
namespace {

constexpr std::array<char, 8> kMagic = {'A', 'M', 'T', 'M', 'N', 'C', '0', '1'};
constexpr std::size_t kEntryBytes = 4 + 8 + 8;

template <typename T>
void put(std::string& out, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff));
}

template <typename T>
T take(const std::string& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw std::runtime_error("multinomial cache file is truncated");
    std::uint64_t value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    pos += sizeof(T);
    return static_cast<T>(value);
}

std::vector<int> canonical_parts(std::span<const int> kappa) {
    std::vector<int> parts;
    for (int k : kappa) {
        if (k < 0) throw std::invalid_argument("multi-index entries must be nonnegative");
        if (k > 0) parts.push_back(k);
    }
    std::sort(parts.begin(), parts.end(), std::greater<>());
    return parts;
}

mpz_class compute(unsigned j, const std::vector<int>& parts) {
    mpz_class result;
    mpz_fac_ui(result.get_mpz_t(), j);
    for (int k : parts) {
        mpz_class f;
        mpz_fac_ui(f.get_mpz_t(), static_cast<unsigned long>(k));
        result /= f;
    }
    return result;
}

}  // namespace

MultinomialCache::MultinomialCache(std::filesystem::path file) : file_(std::move(file)) {
    if (std::filesystem::exists(file_)) read_index();
}

MultinomialCache::~MultinomialCache() {
    try {
        flush();
    } catch (...) {
        // A failed write only loses memoized values.
    }
}

void MultinomialCache::read_index() {
    std::ifstream in(file_, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open multinomial cache " + file_.string());
    std::string head(kMagic.size() + 4, '\0');
    in.read(head.data(), static_cast<std::streamsize>(head.size()));
    if (!in || std::memcmp(head.data(), kMagic.data(), kMagic.size()) != 0) {
        throw std::runtime_error(file_.string() + " is not a multinomial cache file");
    }
    std::size_t pos = kMagic.size();
    const auto count = take<std::uint32_t>(head, pos);
    std::string entries(count * kEntryBytes, '\0');
    in.read(entries.data(), static_cast<std::streamsize>(entries.size()));
    if (!in) throw std::runtime_error("multinomial cache index is truncated");
    pos = 0;
    for (std::uint32_t c = 0; c < count; ++c) {
        const auto j = take<std::uint32_t>(entries, pos);
        const auto offset = take<std::uint64_t>(entries, pos);
        const auto length = take<std::uint64_t>(entries, pos);
        index_[j] = IndexEntry{offset, length};
    }
}

MultinomialCache::Chunk MultinomialCache::read_chunk(unsigned j) const {
    const IndexEntry entry = index_.at(j);
    std::ifstream in(file_, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open multinomial cache " + file_.string());
    in.seekg(static_cast<std::streamoff>(entry.offset));
    std::string body(entry.length, '\0');
    in.read(body.data(), static_cast<std::streamsize>(body.size()));
    if (!in) throw std::runtime_error("multinomial cache chunk is truncated");

    Chunk chunk;
    std::size_t pos = 0;
    const auto records = take<std::uint32_t>(body, pos);
    for (std::uint32_t r = 0; r < records; ++r) {
        const auto nparts = take<std::uint16_t>(body, pos);
        std::vector<int> parts(nparts);
        for (int& p : parts) p = take<std::uint16_t>(body, pos);
        const auto nbytes = take<std::uint32_t>(body, pos);
        if (pos + nbytes > body.size()) throw std::runtime_error("multinomial cache record is truncated");
        mpz_class value;
        mpz_import(value.get_mpz_t(), nbytes, 1, 1, 1, 0, body.data() + pos);
        pos += nbytes;
        chunk.emplace(std::move(parts), std::move(value));
    }
    return chunk;
}

MultinomialCache::Chunk& MultinomialCache::chunk_locked(unsigned j) {
    auto it = chunks_.find(j);
    if (it != chunks_.end()) return it->second;
    Chunk chunk;
    if (index_.count(j) != 0) {
        chunk = read_chunk(j);
        ++chunks_loaded_;
    }
    return chunks_.emplace(j, std::move(chunk)).first->second;
}

mpz_class MultinomialCache::get(unsigned j, std::span<const int> kappa) {
    const std::vector<int> parts = canonical_parts(kappa);
    if (std::accumulate(parts.begin(), parts.end(), 0L) != static_cast<long>(j)) {
        throw std::invalid_argument("multinomial coefficient requires |kappa| == j");
    }
    {
        std::shared_lock lock(mutex_);
        auto chunk = chunks_.find(j);
        if (chunk != chunks_.end()) {
            auto hit = chunk->second.find(parts);
            if (hit != chunk->second.end()) {
                ++hits_;
                return hit->second;
            }
        }
    }
    std::unique_lock lock(mutex_);
    Chunk& chunk = chunk_locked(j);
    auto hit = chunk.find(parts);
    if (hit != chunk.end()) {
        ++hits_;
        return hit->second;
    }
    ++misses_;
    mpz_class value = compute(j, parts);
    chunk.emplace(parts, value);
    dirty_ = true;
    return value;
}

void MultinomialCache::flush() {
    std::unique_lock lock(mutex_);
    if (file_.empty() || !dirty_) return;
    for (const auto& [j, entry] : index_) chunk_locked(j);

    std::vector<unsigned> order;
    for (const auto& [j, chunk] : chunks_) {
        if (!chunk.empty()) order.push_back(j);
    }
    std::sort(order.begin(), order.end());

    std::vector<std::string> bodies;
    for (unsigned j : order) {
        std::string body;
        const Chunk& chunk = chunks_.at(j);
        put<std::uint32_t>(body, static_cast<std::uint32_t>(chunk.size()));
        for (const auto& [parts, value] : chunk) {
            put<std::uint16_t>(body, static_cast<std::uint16_t>(parts.size()));
            for (int p : parts) put<std::uint16_t>(body, static_cast<std::uint16_t>(p));
            std::size_t count = 0;
            void* raw = mpz_export(nullptr, &count, 1, 1, 1, 0, value.get_mpz_t());
            put<std::uint32_t>(body, static_cast<std::uint32_t>(count));
            body.append(static_cast<const char*>(raw), count);
            void (*free_fn)(void*, std::size_t) = nullptr;
            mp_get_memory_functions(nullptr, nullptr, &free_fn);
            free_fn(raw, count);
        }
        bodies.push_back(std::move(body));
    }

    std::string header(kMagic.begin(), kMagic.end());
    put<std::uint32_t>(header, static_cast<std::uint32_t>(order.size()));
    std::uint64_t offset = header.size() + order.size() * kEntryBytes;
    std::map<unsigned, IndexEntry> index;
    for (std::size_t c = 0; c < order.size(); ++c) {
        put<std::uint32_t>(header, order[c]);
        put<std::uint64_t>(header, offset);
        put<std::uint64_t>(header, bodies[c].size());
        index[order[c]] = IndexEntry{offset, bodies[c].size()};
        offset += bodies[c].size();
    }

    std::filesystem::path temp = file_;
    temp += ".tmp";
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write multinomial cache " + temp.string());
        out.write(header.data(), static_cast<std::streamsize>(header.size()));
        for (const std::string& body : bodies) out.write(body.data(), static_cast<std::streamsize>(body.size()));
        if (!out) throw std::runtime_error("failed writing multinomial cache " + temp.string());
    }
    std::filesystem::rename(temp, file_);
    index_ = std::move(index);
    dirty_ = false;
}

MultinomialCache& default_multinomial_cache() {
    static MultinomialCache cache = [] {
        const char* path = std::getenv("AMITE_MULTINOMIAL_CACHE");
        return path != nullptr && *path != '\0' ? MultinomialCache(path) : MultinomialCache();
    }();
    return cache;
}

mpz_class multinomial_coefficient(unsigned j, std::span<const int> kappa) {
    return default_multinomial_cache().get(j, kappa);
}

}  // namespace amite::poly
