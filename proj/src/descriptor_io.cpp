#include "gcf/descriptor_io.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "gcf/bytes.hpp"
#include "gcf/error.hpp"

namespace gcf {

namespace {
constexpr char kMagic[4] = {'G', 'C', 'F', 'D'};
}

SyntheticVideo DescriptorRecord::to_video() const {
    require(has_label(), "validation", "descriptor record carries no label");
    SyntheticVideo v;
    v.descriptors = descriptors;
    v.label = static_cast<std::size_t>(label);
    v.relevance_mask = mask;
    v.validate();
    return v;
}

DescriptorRecord DescriptorRecord::from_video(const SyntheticVideo& video) {
    DescriptorRecord rec;
    rec.descriptors = video.descriptors;
    rec.label = static_cast<std::int64_t>(video.label);
    rec.mask = video.relevance_mask;
    return rec;
}

std::string encode_descriptor(const DescriptorRecord& rec) {
    const std::size_t C = rec.descriptors.clip_count();
    const std::size_t d = rec.descriptors.dim();
    require(C >= 1 && d >= 1, "empty_input", "descriptor write: no clips");
    require(C <= std::numeric_limits<std::uint32_t>::max() &&
                d <= std::numeric_limits<std::uint32_t>::max(),
            "validation", "descriptor write: dimension exceeds u32 range");
    require(rec.label >= -1 && rec.label <= std::numeric_limits<std::int32_t>::max(),
            "validation", "descriptor write: label out of i32 range");
    require(rec.mask.empty() || rec.mask.size() == C, "shape_mismatch",
            "descriptor write: mask length does not match clip count");

    std::string out;
    out.reserve(21 + (rec.mask.empty() ? 0 : C) + 4 * C * d);
    out.append(kMagic, 4);
    bytes::put_u32(out, kDescriptorVersion);
    bytes::put_u32(out, static_cast<std::uint32_t>(C));
    bytes::put_u32(out, static_cast<std::uint32_t>(d));
    bytes::put_i32(out, static_cast<std::int32_t>(rec.label));
    bytes::put_u8(out, rec.mask.empty() ? 0 : 1);
    for (std::uint8_t b : rec.mask) {
        require(b == 0 || b == 1, "validation", "descriptor write: mask bytes must be 0 or 1");
        bytes::put_u8(out, b);
    }
    for (double v : rec.descriptors.V.values()) {
        bytes::put_f32(out, static_cast<float>(v));
    }
    return out;
}

DescriptorRecord decode_descriptor(const std::string& in) {
    std::size_t cursor = 0;
    bytes::check_avail(in, cursor, 4, "magic");
    if (in.compare(0, 4, kMagic, 4) != 0) {
        throw GcfError("bad_magic", "not a GCFD file: bad magic at offset 0");
    }
    cursor = 4;
    const std::uint32_t version = bytes::get_u32(in, cursor, "version");
    if (version != kDescriptorVersion) {
        throw GcfError("version_mismatch",
                       "unsupported GCFD version " + std::to_string(version) + " at offset 4 "
                       "(expected " + std::to_string(kDescriptorVersion) + ")");
    }
    const std::uint32_t C = bytes::get_u32(in, cursor, "clip count");
    const std::uint32_t d = bytes::get_u32(in, cursor, "descriptor dim");
    require(C >= 1 && d >= 1, "validation", "GCFD header declares an empty descriptor set");
    const std::int32_t label = bytes::get_i32(in, cursor, "label");
    require(label >= -1, "validation", "GCFD label must be -1 (unlabeled) or non-negative");
    const std::uint8_t mask_present = bytes::get_u8(in, cursor, "mask flag");
    require(mask_present <= 1, "validation", "GCFD mask flag must be 0 or 1");

    const std::size_t expected =
        21 + (mask_present ? static_cast<std::size_t>(C) : 0) + 4ull * C * d;
    if (in.size() != expected) {
        const char* kind = in.size() < expected ? "truncation" : "trailing_bytes";
        throw GcfError(kind, std::string("GCFD length mismatch: expected ") +
                                 std::to_string(expected) + " bytes, have " +
                                 std::to_string(in.size()));
    }

    DescriptorRecord rec;
    rec.label = label;
    if (mask_present) {
        rec.mask.resize(C);
        for (std::uint32_t i = 0; i < C; ++i) {
            std::uint8_t b = bytes::get_u8(in, cursor, "mask byte");
            require(b == 0 || b == 1, "validation", "GCFD mask bytes must be 0 or 1");
            rec.mask[i] = b;
        }
    }
    Matrix V(C, d);
    for (double& slot : V.values()) {
        const float f = bytes::get_f32(in, cursor, "descriptor value");
        require(std::isfinite(f), "non_finite", "GCFD payload holds a non-finite value at offset " +
                                                    std::to_string(cursor - 4));
        slot = static_cast<double>(f);
    }
    rec.descriptors = ClipDescriptorSet(std::move(V));
    return rec;
}

DescriptorRecord read_descriptor_file(const std::string& path) {
    return decode_descriptor(bytes::read_file(path));
}

void write_descriptor_file(const DescriptorRecord& rec, const std::string& path) {
    bytes::write_file(path, encode_descriptor(rec));
}

void write_descriptor_file(const SyntheticVideo& video, const std::string& path) {
    write_descriptor_file(DescriptorRecord::from_video(video), path);
}

std::string describe_descriptor_file(const std::string& path) {
    DescriptorRecord rec = read_descriptor_file(path);
    std::ostringstream out;
    out << "GCFD v" << kDescriptorVersion << "  clips=" << rec.descriptors.clip_count()
        << "  dim=" << rec.descriptors.dim() << "  label=" << rec.label
        << "  mask=" << (rec.mask.empty() ? "absent" : "present");
    return std::move(out).str();
}

}  // namespace gcf
