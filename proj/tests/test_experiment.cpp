#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "gcf/error.hpp"
#include "gcf/experiment.hpp"
#include "helpers.hpp"

using namespace gcf;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::path("gcf_test_tmp_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

SynthConfig tiny_config() {
    SynthConfig cfg;
    cfg.num_classes = 2;
    cfg.clips_per_video = 4;
    cfg.descriptor_dim = 5;
    cfg.relevant_run_length = 2;
    cfg.train_size = 6;
    cfg.val_size = 3;
    cfg.test_size = 3;
    cfg.seed = 5;
    return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("experiment");

TEST_CASE("history lines round-trip and stay machine-parseable") {
    std::vector<EpochRecord> records(3);
    for (std::size_t i = 0; i < 3; ++i) {
        records[i].epoch = i + 1;
        records[i].lr = 0.1;
        records[i].train_loss = 1.0 / (i + 1.0);
        records[i].train_accuracy = 0.5 + 0.1 * i;
        records[i].val_loss = 2.0 / (i + 1.0);
        records[i].val_accuracy = 0.4 + 0.1 * i;
    }

    const std::string path = "gcf_test_tmp_history.jsonl";
    std::remove(path.c_str());
    append_history(path, {records[0], records[1]});
    append_history(path, {records[2]});

    auto loaded = read_history(path);
    REQUIRE(loaded.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(loaded[i].epoch == records[i].epoch);
        CHECK(loaded[i].lr == records[i].lr);
        CHECK(loaded[i].train_loss == records[i].train_loss);
        CHECK(loaded[i].train_accuracy == records[i].train_accuracy);
        CHECK(loaded[i].val_loss == records[i].val_loss);
        CHECK(loaded[i].val_accuracy == records[i].val_accuracy);
    }

    // each line parses standalone
    std::ifstream in(path);
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line)) {
        auto j = nlohmann::json::parse(line);
        CHECK(j.contains("epoch"));
        CHECK(j.contains("val_loss"));
        ++lines;
    }
    CHECK(lines == 3);
    std::remove(path.c_str());
}

TEST_CASE("manifest bytes are deterministic and carry checksums") {
    std::vector<OutputRecord> outputs = {{"model.gcfc", 1234, 0xdeadbeefull},
                                         {"history.jsonl", 88, 42}};
    const std::string a = "gcf_test_tmp_manifest_a.json";
    const std::string b = "gcf_test_tmp_manifest_b.json";
    write_manifest(a, "train --epochs 5", "{\"seed\":7}", 7, outputs);
    write_manifest(b, "train --epochs 5", "{\"seed\":7}", 7, outputs);
    CHECK(slurp(a) == slurp(b));

    auto j = nlohmann::json::parse(slurp(a));
    CHECK(j["command"] == "train --epochs 5");
    CHECK(j["seed"] == 7);
    CHECK(j["outputs"]["model.gcfc"]["bytes"] == 1234);
    CHECK(j["outputs"]["model.gcfc"]["fnv1a64"] == checksum_hex(0xdeadbeefull));
    CHECK(slurp(a).find("timestamp") == std::string::npos);
    std::remove(a.c_str());
    std::remove(b.c_str());
}

TEST_CASE("checksum hex is zero-padded 16 digits") {
    CHECK(checksum_hex(0) == "0000000000000000");
    CHECK(checksum_hex(0xdeadbeefull) == "00000000deadbeef");
    CHECK(checksum_hex(~0ull) == "ffffffffffffffff");
}

TEST_CASE("dataset directories round-trip with verification") {
    TempDir dir("dataset");
    SynthConfig cfg = tiny_config();
    DatasetSplits splits = generate_synthetic(cfg);
    save_dataset(dir.path.string(), splits, cfg, "synth --preset tiny");

    CHECK(fs::exists(dir.path / "dataset.json"));
    CHECK(fs::exists(dir.path / "train" / "000000.gcfd"));
    CHECK(fs::exists(dir.path / "val" / "000002.gcfd"));

    DatasetSplits loaded = load_dataset(dir.path.string());
    REQUIRE(loaded.train.size() == cfg.train_size);
    REQUIRE(loaded.val.size() == cfg.val_size);
    REQUIRE(loaded.test.size() == cfg.test_size);
    for (std::size_t i = 0; i < splits.train.size(); ++i) {
        CHECK(loaded.train[i].label == splits.train[i].label);
        CHECK(loaded.train[i].relevance_mask == splits.train[i].relevance_mask);
        // payload went through float32: quantized but deterministic
        CHECK(testutil::max_abs_diff(loaded.train[i].descriptors.V,
                                     splits.train[i].descriptors.V) < 1e-6);
    }

    // a second load sees identical data
    DatasetSplits again = load_dataset(dir.path.string());
    for (std::size_t i = 0; i < loaded.train.size(); ++i)
        CHECK(testutil::max_abs_diff(again.train[i].descriptors.V,
                                     loaded.train[i].descriptors.V) == 0.0);
}

TEST_CASE("tampering with a stored video is caught") {
    TempDir dir("tamper");
    SynthConfig cfg = tiny_config();
    save_dataset(dir.path.string(), generate_synthetic(cfg), cfg, "synth");

    const fs::path victim = dir.path / "train" / "000001.gcfd";
    std::string bytes = slurp(victim.string());
    bytes[bytes.size() - 1] ^= 0x01;  // flip one payload bit
    std::ofstream(victim, std::ios::binary) << bytes;

    try {
        load_dataset(dir.path.string());
        FAIL("expected checksum_mismatch");
    } catch (const GcfError& e) {
        CHECK(e.category() == "checksum_mismatch");
        CHECK(std::string(e.what()).find("train") != std::string::npos);
    }
}

TEST_CASE("a missing video file is caught before checksums") {
    TempDir dir("missing");
    SynthConfig cfg = tiny_config();
    save_dataset(dir.path.string(), generate_synthetic(cfg), cfg, "synth");
    fs::remove(dir.path / "val" / "000000.gcfd");
    CHECK_THROWS_AS(load_dataset(dir.path.string()), GcfError);
}

TEST_CASE("evaluate_strategies pads short videos and scores all three") {
    SynthConfig cfg = tiny_config();
    DatasetSplits splits = generate_synthetic(cfg);

    GcfConfig mcfg;
    mcfg.C = cfg.clips_per_video;
    mcfg.d = cfg.descriptor_dim;
    mcfg.D = 3;
    mcfg.K = cfg.num_classes;
    Rng rng(404);
    GcfParams params = GcfParams::init(mcfg, rng);
    ClipClassifierParams clf;
    clf.W = testutil::random_matrix(rng, mcfg.K, mcfg.d, 0.1);

    StrategyReport report = evaluate_strategies(splits.test, clf, params);
    CHECK(report.central_top1 >= 0.0);
    CHECK(report.central_top1 <= 1.0);
    CHECK(report.dense_top1 >= 0.0);
    CHECK(report.dense_top1 <= 1.0);
    CHECK(report.gcf_top1 >= 0.0);
    CHECK(report.gcf_top1 <= 1.0);

    // a shorter video is padded up to C for the head, not rejected
    std::vector<SyntheticVideo> short_videos = splits.test;
    Matrix cut(2, cfg.descriptor_dim);
    for (std::size_t j = 0; j < cfg.descriptor_dim; ++j) {
        cut(0, j) = short_videos[0].descriptors.V(0, j);
        cut(1, j) = short_videos[0].descriptors.V(1, j);
    }
    short_videos[0].descriptors = ClipDescriptorSet(cut);
    short_videos[0].relevance_mask.clear();
    CHECK_NOTHROW(evaluate_strategies(short_videos, clf, params));

    CHECK_THROWS_AS(evaluate_strategies({}, clf, params), GcfError);
}

TEST_CASE("localization scoring separates a hand-built gate") {
    // Build one video whose mask marks clips 0-1 and params whose gate fires
    // only there, via a rigged W1 reading position sums. Simpler: use the
    // clip-wise mode with a gate rigged on the summary signs.
    GcfConfig mcfg;
    mcfg.C = 4;
    mcfg.d = 2;
    mcfg.D = 2;
    mcfg.K = 2;
    mcfg.h = 8;
    mcfg.mode = GcfMode::clip_wise_only;
    Rng rng(405);
    GcfParams params = GcfParams::init(mcfg, rng);
    // two-sided gate: hidden = (relu(8 g_i), relu(-8 g_i)), so
    // att_i = sigmoid(64 g_i) regardless of the summary's sign
    params.gating.W1 = Matrix(8, 4);
    params.gating.W2 = Matrix(4, 8);
    for (std::size_t i = 0; i < 4; ++i) {
        params.gating.W1(i, i) = 8.0;
        params.gating.W1(4 + i, i) = -8.0;
        params.gating.W2(i, i) = 8.0;
        params.gating.W2(i, 4 + i) = -8.0;
    }

    SyntheticVideo video;
    video.label = 0;
    // rows 0,1 have positive means (gate fires), rows 2,3 negative
    video.descriptors = ClipDescriptorSet(
        Matrix(4, 2, {2.0, 2.0, 1.5, 2.5, -2.0, -2.0, -1.0, -3.0}));
    video.relevance_mask = {1, 1, 0, 0};

    LocalizationScore score = score_localization({video}, params, 0.5);
    CHECK(score.videos_scored == 1);
    CHECK(score.ordered_fraction == 1.0);
    CHECK(score.precision == 1.0);
    CHECK(score.mean_att_relevant > 0.9);
    CHECK(score.mean_att_irrelevant < 0.1);

    // maskless videos are skipped; an all-maskless set is an error
    SyntheticVideo no_mask = video;
    no_mask.relevance_mask.clear();
    LocalizationScore mixed = score_localization({no_mask, video}, params, 0.5);
    CHECK(mixed.videos_scored == 1);
    CHECK_THROWS_AS(score_localization({no_mask}, params, 0.5), GcfError);

    // gateless modes cannot be scored
    GcfConfig plain = mcfg;
    plain.mode = GcfMode::inter_clip_only;
    GcfParams plain_params = GcfParams::init(plain, rng);
    CHECK_THROWS_AS(score_localization({video}, plain_params, 0.5), GcfError);
}

TEST_CASE("gate uncertainty is 0.5 at an indifferent gate and lower when saturated") {
    GcfConfig mcfg;
    mcfg.C = 3;
    mcfg.d = 2;
    mcfg.K = 2;
    mcfg.h = 3;
    mcfg.mode = GcfMode::clip_wise_only;
    Rng rng(406);
    GcfParams params = GcfParams::init(mcfg, rng);
    params.gating.W1 = Matrix(3, 3);  // zero gate: att = 0.5 exactly
    params.gating.W2 = Matrix(3, 3);

    SyntheticVideo video;
    video.label = 0;
    // positive row means keep the rigged gate's relu awake
    video.descriptors = ClipDescriptorSet(Matrix(3, 2, {1.0, 2.0, 1.0, 0.5, 3.0, 2.0}));

    CHECK(mean_gate_uncertainty({video}, params) == 0.5);

    // saturate the gate: uncertainty falls
    Rng rng2(407);
    GcfParams hot = GcfParams::init(mcfg, rng2);
    hot.gating.W1 = Matrix::identity(3);
    hot.gating.W2 = Matrix(3, 3);
    for (std::size_t i = 0; i < 3; ++i) hot.gating.W2(i, i) = 50.0;
    CHECK(mean_gate_uncertainty({video}, hot) < 0.1);
}

TEST_SUITE_END();
