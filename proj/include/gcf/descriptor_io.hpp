#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gcf/dataset.hpp"

namespace gcf {

// One descriptor file's contents. Payload values are stored as 32-bit floats
// (computation stays in doubles); label -1 means unlabeled; the mask is
// optional.
struct DescriptorRecord {
    ClipDescriptorSet descriptors;
    std::int64_t label = -1;
    std::vector<std::uint8_t> mask;

    bool has_label() const noexcept { return label >= 0; }
    SyntheticVideo to_video() const;  // requires a label
    static DescriptorRecord from_video(const SyntheticVideo& video);
};

// Binary "GCFD" layout, all integers little-endian:
//   magic "GCFD" | version u32 (=1) | C u32 | d u32 | label i32 | mask_present u8
//   | C mask bytes when present | C*d float32, row-major.
// Total size is exactly 21 + mask_present*C + 4*C*d bytes.
inline constexpr std::uint32_t kDescriptorVersion = 1;

std::string encode_descriptor(const DescriptorRecord& rec);
DescriptorRecord decode_descriptor(const std::string& bytes);

DescriptorRecord read_descriptor_file(const std::string& path);
void write_descriptor_file(const DescriptorRecord& rec, const std::string& path);
void write_descriptor_file(const SyntheticVideo& video, const std::string& path);

// Human-readable header summary for the `inspect` command.
std::string describe_descriptor_file(const std::string& path);

}  // namespace gcf
