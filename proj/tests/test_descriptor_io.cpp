#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "gcf/bytes.hpp"
#include "gcf/descriptor_io.hpp"
#include "gcf/error.hpp"
#include "helpers.hpp"

using namespace gcf;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string temp_file(const std::string& name) {
    return "gcf_test_tmp_" + name;
}

}  // namespace

TEST_SUITE_BEGIN("descriptor_io");

TEST_CASE("the golden file decodes to the recorded record") {
    DescriptorRecord rec = read_descriptor_file(testutil::data_path("golden_c2d3.gcfd"));
    REQUIRE(rec.descriptors.clip_count() == 2);
    REQUIRE(rec.descriptors.dim() == 3);
    CHECK(rec.label == 1);
    CHECK(rec.mask == std::vector<std::uint8_t>{1, 0});
    CHECK(rec.descriptors.V(0, 0) == 1.0);
    CHECK(rec.descriptors.V(0, 1) == 0.5);
    CHECK(rec.descriptors.V(0, 2) == -2.0);
    CHECK(rec.descriptors.V(1, 0) == 3.25);
    CHECK(rec.descriptors.V(1, 1) == 0.0);
    CHECK(rec.descriptors.V(1, 2) == 0.0009765625);  // 2^-10, exact in float32
}

TEST_CASE("encoding the recorded record reproduces the golden bytes") {
    DescriptorRecord rec;
    rec.descriptors = ClipDescriptorSet(Matrix(2, 3, {1.0, 0.5, -2.0, 3.25, 0.0, 0.0009765625}));
    rec.label = 1;
    rec.mask = {1, 0};
    std::string encoded = encode_descriptor(rec);
    std::string golden = slurp(testutil::data_path("golden_c2d3.gcfd"));
    REQUIRE(golden.size() == 47);  // 21-byte header + 2 mask bytes + 24 payload bytes
    CHECK(encoded == golden);
}

TEST_CASE("round trip through a file is byte-stable") {
    DescriptorRecord rec;
    rec.descriptors = ClipDescriptorSet(Matrix(3, 2, {0.1, -0.25, 7.5, 0.0, -1.0, 42.0}));
    rec.label = 2;
    const std::string path = temp_file("roundtrip.gcfd");
    write_descriptor_file(rec, path);
    std::string first = slurp(path);
    DescriptorRecord loaded = read_descriptor_file(path);
    write_descriptor_file(loaded, path);
    CHECK(slurp(path) == first);
    CHECK(loaded.label == 2);
    CHECK(loaded.mask.empty());
    std::remove(path.c_str());
}

TEST_CASE("unlabeled records keep label -1 and no has_label") {
    DescriptorRecord rec;
    rec.descriptors = ClipDescriptorSet(Matrix(1, 2, {1.0, 2.0}));
    CHECK_FALSE(rec.has_label());
    std::string encoded = encode_descriptor(rec);
    DescriptorRecord back = decode_descriptor(encoded);
    CHECK(back.label == -1);
    CHECK_FALSE(back.has_label());
    CHECK_THROWS_AS(back.to_video(), GcfError);
}

TEST_CASE("to_video and from_video invert each other") {
    SyntheticVideo video;
    video.descriptors = ClipDescriptorSet(Matrix(2, 2, {1.0, 2.0, 3.0, 4.0}));
    video.label = 5;
    video.relevance_mask = {0, 1};
    DescriptorRecord rec = DescriptorRecord::from_video(video);
    CHECK(rec.label == 5);
    CHECK(rec.mask == std::vector<std::uint8_t>{0, 1});
    SyntheticVideo back = rec.to_video();
    CHECK(back.label == 5);
    CHECK(back.relevance_mask == video.relevance_mask);
    CHECK(testutil::max_abs_diff(back.descriptors.V, video.descriptors.V) == 0.0);
}

TEST_CASE("truncated input names the expected and actual sizes") {
    std::string golden = slurp(testutil::data_path("golden_c2d3.gcfd"));
    std::string cut = golden.substr(0, golden.size() - 1);
    try {
        decode_descriptor(cut);
        FAIL("expected a truncation error");
    } catch (const GcfError& e) {
        CHECK(e.category() == "truncation");
        CHECK(std::string(e.what()).find("46") != std::string::npos);
    }
    // cutting into the header is also truncation
    CHECK_THROWS_AS(decode_descriptor(golden.substr(0, 10)), GcfError);
    CHECK_THROWS_AS(decode_descriptor(""), GcfError);
}

TEST_CASE("bad magic and bad version are distinct errors") {
    std::string golden = slurp(testutil::data_path("golden_c2d3.gcfd"));
    std::string wrong_magic = golden;
    wrong_magic[0] = 'X';
    try {
        decode_descriptor(wrong_magic);
        FAIL("expected bad_magic");
    } catch (const GcfError& e) {
        CHECK(e.category() == "bad_magic");
    }

    std::string wrong_version = golden;
    wrong_version[4] = 9;
    try {
        decode_descriptor(wrong_version);
        FAIL("expected version_mismatch");
    } catch (const GcfError& e) {
        CHECK(e.category() == "version_mismatch");
        CHECK(std::string(e.what()).find("9") != std::string::npos);
    }
}

TEST_CASE("trailing bytes are rejected") {
    std::string golden = slurp(testutil::data_path("golden_c2d3.gcfd"));
    try {
        decode_descriptor(golden + "!");
        FAIL("expected trailing_bytes");
    } catch (const GcfError& e) {
        CHECK(e.category() == "trailing_bytes");
    }
}

TEST_CASE("mask bytes must be 0 or 1 and floats must be finite") {
    std::string golden = slurp(testutil::data_path("golden_c2d3.gcfd"));
    std::string bad_mask = golden;
    bad_mask[21] = 2;
    CHECK_THROWS_AS(decode_descriptor(bad_mask), GcfError);

    std::string bad_float = golden;
    // overwrite the first payload float with +inf (0x7f800000 LE)
    const std::size_t payload = 23;
    bad_float[payload + 0] = '\x00';
    bad_float[payload + 1] = '\x00';
    bad_float[payload + 2] = '\x80';
    bad_float[payload + 3] = '\x7f';
    try {
        decode_descriptor(bad_float);
        FAIL("expected non_finite");
    } catch (const GcfError& e) {
        CHECK(e.category() == "non_finite");
    }
}

TEST_CASE("describe reports the header fields") {
    std::string text = describe_descriptor_file(testutil::data_path("golden_c2d3.gcfd"));
    CHECK(text.find("GCFD") != std::string::npos);
    CHECK(text.find("clips=2") != std::string::npos);
    CHECK(text.find("dim=3") != std::string::npos);
    CHECK(text.find("label=1") != std::string::npos);
}

TEST_SUITE_END();
