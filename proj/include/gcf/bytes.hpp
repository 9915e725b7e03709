#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "gcf/error.hpp"

namespace gcf::bytes {

// Little-endian append/read helpers shared by the binary file formats.
// Readers take an explicit cursor and report the byte offset on failure.

inline void put_u8(std::string& out, std::uint8_t v) { out.push_back(static_cast<char>(v)); }

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_i32(std::string& out, std::int32_t v) {
    put_u32(out, static_cast<std::uint32_t>(v));
}

inline void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f32(std::string& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

inline void put_f64(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(out, bits);
}

inline void check_avail(const std::string& in, std::size_t cursor, std::size_t need,
                        const std::string& what) {
    if (cursor + need > in.size()) {
        throw GcfError("truncation", "truncated file: need " + std::to_string(need) +
                                         " byte(s) for " + what + " at offset " +
                                         std::to_string(cursor) + ", have " +
                                         std::to_string(in.size() - cursor));
    }
}

inline std::uint8_t get_u8(const std::string& in, std::size_t& cursor, const std::string& what) {
    check_avail(in, cursor, 1, what);
    return static_cast<std::uint8_t>(in[cursor++]);
}

inline std::uint32_t get_u32(const std::string& in, std::size_t& cursor, const std::string& what) {
    check_avail(in, cursor, 4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(in[cursor + i])) << (8 * i);
    cursor += 4;
    return v;
}

inline std::int32_t get_i32(const std::string& in, std::size_t& cursor, const std::string& what) {
    return static_cast<std::int32_t>(get_u32(in, cursor, what));
}

inline std::uint64_t get_u64(const std::string& in, std::size_t& cursor, const std::string& what) {
    check_avail(in, cursor, 8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(in[cursor + i])) << (8 * i);
    cursor += 8;
    return v;
}

inline float get_f32(const std::string& in, std::size_t& cursor, const std::string& what) {
    std::uint32_t bits = get_u32(in, cursor, what);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

inline double get_f64(const std::string& in, std::size_t& cursor, const std::string& what) {
    std::uint64_t bits = get_u64(in, cursor, what);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

// Whole-file read/write.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

// FNV-1a 64-bit hash, used for manifest checksums. The two-argument form
// continues a rolling hash, so hashing a concatenation can stream.
inline constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ull;
std::uint64_t fnv1a64(const std::string& data, std::uint64_t h);
std::uint64_t fnv1a64(const std::string& data);

}  // namespace gcf::bytes
