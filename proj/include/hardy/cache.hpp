#pragma once

// On-disk cache of Gram systems.
//
// Layout (all integers little-endian):
//
//   "HARDYGRM"            8-byte magic
//   u32 version
//   u32 family, f64 zeta_turns, u32 k_min, u32 K, u64 N, u32 precision_bits,
//   f64 tail constant, u8 real_valued, f64 assembly_error
//   u64 payload length
//   payload: per entry (row-major) u32-length-prefixed decimal strings for
//            the real and imaginary part, then every tail bound as f64
//   u32 CRC-32 of everything after the magic and before the checksum
//
// Decimal strings carry max_digits10 digits, which round-trips the binary
// value exactly.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <boost/crc.hpp>

#include "gram.hpp"
#include "series.hpp"

namespace hardy {

class CacheCorruption : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline constexpr char kCacheMagic[8] = {'H', 'A', 'R', 'D', 'Y', 'G', 'R', 'M'};
inline constexpr std::uint32_t kCacheVersion = 1;

class ByteWriter {
public:
    template <class U>
    void put(U v) {
        static_assert(std::is_unsigned_v<U>);
        for (std::size_t i = 0; i < sizeof(U); ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void put_f64(double v) { put(std::bit_cast<std::uint64_t>(v)); }
    void put_string(const std::string& s) {
        put(static_cast<std::uint32_t>(s.size()));
        bytes.insert(bytes.end(), s.begin(), s.end());
    }
    std::vector<std::uint8_t> bytes;
};

class ByteReader {
public:
    ByteReader(const std::vector<std::uint8_t>& b, std::size_t pos) : b_(b), pos_(pos) {}
    template <class U>
    U get() {
        need(sizeof(U));
        U v = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(b_[pos_ + i]) << (8 * i));
        pos_ += sizeof(U);
        return v;
    }
    double get_f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
    std::string get_string() {
        auto n = get<std::uint32_t>();
        need(n);
        std::string s(b_.begin() + static_cast<std::ptrdiff_t>(pos_), b_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
        pos_ += n;
        return s;
    }
    std::size_t pos() const { return pos_; }

private:
    void need(std::size_t n) const {
        if (pos_ + n > b_.size()) throw CacheCorruption("cache entry truncated");
    }
    const std::vector<std::uint8_t>& b_;
    std::size_t pos_;
};

inline std::uint32_t crc32(const std::uint8_t* data, std::size_t n) {
    boost::crc_32_type crc;
    crc.process_bytes(data, n);
    return crc.checksum();
}

}  // namespace detail

/// Header fields that must match a request exactly for a cache hit.
struct GramCacheHeader {
    BasisFamily family = BasisFamily::h;
    double zeta_turns = 0.0;
    unsigned k_min = 2;
    unsigned K = 2;
    std::uint64_t N = 0;
    int precision_bits = 0;
    double tail_constant = kHkDecayConstant;

    static GramCacheHeader for_request(const BasisSpec& spec, int bits) {
        return {spec.family, spec.uses_zeta() ? spec.zeta_turns : 0.0, 2, spec.K, spec.N, bits, kHkDecayConstant};
    }
    friend bool operator==(const GramCacheHeader&, const GramCacheHeader&) = default;
};

template <class R>
std::vector<std::uint8_t> serialize_gram(const GramSystem<R>& G) {
    detail::ByteWriter w;
    w.bytes.insert(w.bytes.end(), std::begin(detail::kCacheMagic), std::end(detail::kCacheMagic));
    auto h = GramCacheHeader::for_request(G.spec, G.precision_bits);
    w.put(detail::kCacheVersion);
    w.put(static_cast<std::uint32_t>(h.family));
    w.put_f64(h.zeta_turns);
    w.put(static_cast<std::uint32_t>(h.k_min));
    w.put(static_cast<std::uint32_t>(h.K));
    w.put(static_cast<std::uint64_t>(h.N));
    w.put(static_cast<std::uint32_t>(h.precision_bits));
    w.put_f64(h.tail_constant);
    w.put(static_cast<std::uint8_t>(G.real_valued ? 1 : 0));
    w.put_f64(G.assembly_error);
    detail::ByteWriter payload;
    for (const auto& v : G.matrix) {
        payload.put_string(to_decimal(real_part(v)));
        payload.put_string(to_decimal(imag_part(v)));
    }
    for (double t : G.tail_matrix) payload.put_f64(t);
    w.put(static_cast<std::uint64_t>(payload.bytes.size()));
    w.bytes.insert(w.bytes.end(), payload.bytes.begin(), payload.bytes.end());
    w.put(detail::crc32(w.bytes.data() + 8, w.bytes.size() - 8));
    return w.bytes;
}

/// Decodes a cache entry. Returns nullopt when the header does not match the
/// request; throws CacheCorruption on a bad magic, truncation or checksum.
template <class R>
std::optional<GramSystem<R>> deserialize_gram(const std::vector<std::uint8_t>& bytes, const BasisSpec& request) {
    using C = complex_of_t<R>;
    if (bytes.size() < 12 || std::memcmp(bytes.data(), detail::kCacheMagic, 8) != 0) {
        throw CacheCorruption("not a Gram cache entry (bad magic)");
    }
    detail::ByteReader r(bytes, 8);
    if (r.get<std::uint32_t>() != detail::kCacheVersion) return std::nullopt;
    GramCacheHeader h;
    auto fam = r.get<std::uint32_t>();
    if (fam > 3) throw CacheCorruption("cache entry has an unknown basis family");
    h.family = static_cast<BasisFamily>(fam);
    h.zeta_turns = r.get_f64();
    h.k_min = r.get<std::uint32_t>();
    h.K = r.get<std::uint32_t>();
    h.N = r.get<std::uint64_t>();
    h.precision_bits = static_cast<int>(r.get<std::uint32_t>());
    h.tail_constant = r.get_f64();
    const bool real_valued = r.get<std::uint8_t>() != 0;
    const double assembly_error = r.get_f64();
    const auto payload_len = r.get<std::uint64_t>();
    const std::size_t payload_start = r.pos();
    if (payload_start + payload_len + 4 != bytes.size()) throw CacheCorruption("cache entry has an inconsistent length");
    std::uint32_t stored = 0;
    for (int i = 0; i < 4; ++i) stored |= std::uint32_t(bytes[bytes.size() - 4 + i]) << (8 * i);
    if (stored != detail::crc32(bytes.data() + 8, bytes.size() - 12)) throw CacheCorruption("cache checksum mismatch");
    if (!(h == GramCacheHeader::for_request(request, precision_bits_v<R>))) return std::nullopt;

    GramSystem<R> G;
    G.spec = request;
    G.real_valued = real_valued;
    G.assembly_error = assembly_error;
    const std::size_t d = request.dimension();
    G.matrix.reserve(d * d);
    try {
        for (std::size_t e = 0; e < d * d; ++e) {
            R re(r.get_string());
            R im(r.get_string());
            G.matrix.push_back(make_complex<C>(re, im));
        }
    } catch (const std::runtime_error& ex) {
        throw CacheCorruption(std::string("cache payload unreadable: ") + ex.what());
    }
    for (std::size_t e = 0; e < d * d; ++e) G.tail_matrix.push_back(r.get_f64());
    if (r.pos() != bytes.size() - 4) throw CacheCorruption("cache payload size does not match the header");
    return G;
}

/// Directory-backed cache with an advisory lock (shared for reads,
/// exclusive for writes) on <dir>/.lock.
class GramCache {
public:
    explicit GramCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

    const std::filesystem::path& directory() const { return dir_; }

    std::filesystem::path file_for(const BasisSpec& spec, int bits) const {
        std::ostringstream name;
        name << "gram_" << to_string(spec.family) << "_K" << spec.K << "_N" << spec.N << "_b" << bits;
        if (spec.uses_zeta()) name << "_z" << std::hex << std::bit_cast<std::uint64_t>(spec.zeta_turns);
        name << ".bin";
        return dir_ / name.str();
    }

    template <class R>
    std::optional<GramSystem<R>> load(const BasisSpec& spec) const {
        auto file = file_for(spec, precision_bits_v<R>);
        if (!std::filesystem::exists(file)) return std::nullopt;
        Lock lock(dir_, LOCK_SH);
        std::ifstream in(file, std::ios::binary);
        std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return deserialize_gram<R>(bytes, spec);
    }

    template <class R>
    void store(const GramSystem<R>& G) const {
        std::filesystem::create_directories(dir_);
        Lock lock(dir_, LOCK_EX);
        auto file = file_for(G.spec, G.precision_bits);
        auto tmp = file;
        tmp += ".tmp";
        auto bytes = serialize_gram(G);
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
            if (!out) throw std::runtime_error("cannot write cache file " + tmp.string());
        }
        std::filesystem::rename(tmp, file);
    }

private:
    class Lock {
    public:
        Lock(const std::filesystem::path& dir, int mode) {
            std::filesystem::create_directories(dir);
            fd_ = ::open((dir / ".lock").c_str(), O_RDWR | O_CREAT, 0644);
            if (fd_ >= 0) ::flock(fd_, mode);
        }
        ~Lock() {
            if (fd_ >= 0) {
                ::flock(fd_, LOCK_UN);
                ::close(fd_);
            }
        }
        Lock(const Lock&) = delete;
        Lock& operator=(const Lock&) = delete;

    private:
        int fd_ = -1;
    };

    std::filesystem::path dir_;
};

}  // namespace hardy
