#include "gcf/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "gcf/bytes.hpp"
#include "gcf/descriptor_io.hpp"
#include "gcf/error.hpp"

namespace gcf {

namespace fs = std::filesystem;
using nlohmann::json;

// --- history ------------------------------------------------------------------

std::string history_line(const EpochRecord& rec) {
    json j{{"epoch", rec.epoch},
           {"lr", rec.lr},
           {"train_loss", rec.train_loss},
           {"train_accuracy", rec.train_accuracy},
           {"val_loss", rec.val_loss},
           {"val_accuracy", rec.val_accuracy}};
    return j.dump();
}

void append_history(const std::string& path, const std::vector<EpochRecord>& records) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw GcfError("io", "cannot open history for append: " + path);
    for (const auto& rec : records) out << history_line(rec) << "\n";
    out.flush();
    if (!out.good()) throw GcfError("io", "history write failed: " + path);
}

std::vector<EpochRecord> read_history(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw GcfError("io", "cannot open history: " + path);
    std::vector<EpochRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw GcfError("bad_record", "history line " + std::to_string(line_no) +
                                             " is not valid JSON: " + e.what());
        }
        EpochRecord rec;
        try {
            rec.epoch = j.at("epoch").get<std::uint64_t>();
            rec.lr = j.at("lr").get<double>();
            rec.train_loss = j.at("train_loss").get<double>();
            rec.train_accuracy = j.at("train_accuracy").get<double>();
            rec.val_loss = j.at("val_loss").get<double>();
            rec.val_accuracy = j.at("val_accuracy").get<double>();
        } catch (const json::exception& e) {
            throw GcfError("bad_record", "history line " + std::to_string(line_no) +
                                             " is missing fields: " + e.what());
        }
        records.push_back(rec);
    }
    return records;
}

// --- manifests ------------------------------------------------------------------

std::string checksum_hex(std::uint64_t checksum) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(checksum));
    return std::string(buf, 16);
}

void write_manifest(const std::string& path, const std::string& command,
                    const std::string& config_json, std::uint64_t seed,
                    const std::vector<OutputRecord>& outputs) {
    json config;
    try {
        config = json::parse(config_json);
    } catch (const json::exception& e) {
        throw GcfError("bad_record", std::string("manifest config is not valid JSON: ") + e.what());
    }
    json outs = json::object();
    for (const auto& o : outputs) {
        outs[o.name] = json{{"bytes", o.byte_count}, {"fnv1a64", checksum_hex(o.checksum)}};
    }
    json manifest{{"command", command}, {"config", config}, {"seed", seed}, {"outputs", outs}};
    bytes::write_file(path, manifest.dump(2) + "\n");
}

// --- dataset directories --------------------------------------------------------

namespace {

std::string video_filename(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%06zu.gcfd", index);
    return std::string(buf);
}

json synth_config_json(const SynthConfig& cfg) {
    return json{{"num_classes", cfg.num_classes},
                {"clips_per_video", cfg.clips_per_video},
                {"descriptor_dim", cfg.descriptor_dim},
                {"relevant_run_length", cfg.relevant_run_length},
                {"prototype_noise_sigma", cfg.prototype_noise_sigma},
                {"background_mode", to_string(cfg.background_mode)},
                {"distractor_probability", cfg.distractor_probability},
                {"train_size", cfg.train_size},
                {"val_size", cfg.val_size},
                {"test_size", cfg.test_size},
                {"seed", cfg.seed}};
}

OutputRecord save_split_files(const std::string& dir, const std::string& split_name,
                              const std::vector<SyntheticVideo>& videos) {
    const fs::path split_dir = fs::path(dir) / split_name;
    fs::create_directories(split_dir);
    OutputRecord rec{split_name, 0, bytes::kFnvOffsetBasis};
    for (std::size_t i = 0; i < videos.size(); ++i) {
        const std::string encoded = encode_descriptor(DescriptorRecord::from_video(videos[i]));
        bytes::write_file((split_dir / video_filename(i)).string(), encoded);
        rec.byte_count += encoded.size();
        rec.checksum = bytes::fnv1a64(encoded, rec.checksum);
    }
    return rec;
}

}  // namespace

void save_dataset(const std::string& dir, const DatasetSplits& splits, const SynthConfig& cfg,
                  const std::string& command) {
    cfg.validate();
    fs::create_directories(dir);
    std::vector<OutputRecord> outputs;
    outputs.push_back(save_split_files(dir, "train", splits.train));
    outputs.push_back(save_split_files(dir, "val", splits.val));
    outputs.push_back(save_split_files(dir, "test", splits.test));
    write_manifest((fs::path(dir) / "dataset.json").string(), command,
                   synth_config_json(cfg).dump(), cfg.seed, outputs);
}

std::vector<SyntheticVideo> load_split(const std::string& dir, const std::string& split_name) {
    const fs::path split_dir = fs::path(dir) / split_name;
    require(fs::is_directory(split_dir), "io", "missing dataset split directory: " +
                                                   split_dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(split_dir)) {
        if (entry.path().extension() == ".gcfd") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    require(!files.empty(), "empty_input", "dataset split holds no .gcfd files: " +
                                               split_dir.string());
    std::vector<SyntheticVideo> videos;
    videos.reserve(files.size());
    for (const auto& f : files) videos.push_back(read_descriptor_file(f.string()).to_video());
    return videos;
}

namespace {

std::vector<SyntheticVideo> load_verified_split(const std::string& dir,
                                                const std::string& split_name, const json& outs) {
    require(outs.contains(split_name), "bad_record",
            "dataset manifest lacks an entry for split " + split_name);
    const std::uint64_t want_bytes = outs.at(split_name).at("bytes").get<std::uint64_t>();
    const std::string want_sum = outs.at(split_name).at("fnv1a64").get<std::string>();

    std::vector<SyntheticVideo> videos = load_split(dir, split_name);
    std::uint64_t got_bytes = 0;
    std::uint64_t sum = bytes::kFnvOffsetBasis;
    for (const auto& v : videos) {
        const std::string encoded = encode_descriptor(DescriptorRecord::from_video(v));
        got_bytes += encoded.size();
        sum = bytes::fnv1a64(encoded, sum);
    }
    require(got_bytes == want_bytes && checksum_hex(sum) == want_sum, "checksum_mismatch",
            "dataset split " + split_name + " does not match its manifest checksum");
    return videos;
}

}  // namespace

DatasetSplits load_dataset(const std::string& dir) {
    const std::string manifest_path = (fs::path(dir) / "dataset.json").string();
    json manifest;
    try {
        manifest = json::parse(bytes::read_file(manifest_path));
    } catch (const json::exception& e) {
        throw GcfError("bad_record",
                       std::string("dataset manifest is not valid JSON: ") + e.what());
    }
    require(manifest.contains("outputs"), "bad_record", "dataset manifest lacks outputs");
    const json& outs = manifest.at("outputs");
    DatasetSplits splits;
    splits.train = load_verified_split(dir, "train", outs);
    splits.val = load_verified_split(dir, "val", outs);
    splits.test = load_verified_split(dir, "test", outs);
    return splits;
}

// --- shared evaluation harness ----------------------------------------------------

StrategyReport evaluate_strategies(const std::vector<SyntheticVideo>& videos,
                                   const ClipClassifierParams& clf, const GcfParams& params,
                                   std::size_t central_k) {
    require(!videos.empty(), "empty_input", "evaluate_strategies: no videos");
    std::vector<Vector> central, dense, fused;
    std::vector<std::size_t> labels;
    central.reserve(videos.size());
    dense.reserve(videos.size());
    fused.reserve(videos.size());
    for (const auto& video : videos) {
        ClipDescriptorSet clips = video.descriptors;
        if (clips.clip_count() < params.config.C) clips = pad_clips(clips, params.config.C);
        central.push_back(central_clips_predict(clips, clf, central_k));
        dense.push_back(dense_clips_predict(clips, clf));
        fused.push_back(gcf_predict(clips, params).y);
        labels.push_back(video.label);
    }
    return {top1_accuracy(central, labels), top1_accuracy(dense, labels),
            top1_accuracy(fused, labels)};
}

LocalizationScore score_localization(const std::vector<SyntheticVideo>& videos,
                                     const GcfParams& params, double threshold) {
    require(params.config.uses_gating(), "validation",
            "score_localization: the mode has no gate to score");
    LocalizationScore score;
    std::size_t ordered = 0;
    std::uint64_t true_positives = 0, predicted_positives = 0;
    double rel_sum = 0.0, irr_sum = 0.0;

    for (const auto& video : videos) {
        const auto& mask = video.relevance_mask;
        if (mask.empty()) continue;
        const std::size_t C = mask.size();
        std::size_t relevant = 0;
        for (auto b : mask) relevant += b;
        if (relevant == 0 || relevant == C) continue;

        ClipDescriptorSet clips = video.descriptors;
        if (clips.clip_count() < params.config.C) clips = pad_clips(clips, params.config.C);
        GcfPrediction pred = gcf_predict(clips, params);

        double rel = 0.0, irr = 0.0;
        for (std::size_t i = 0; i < C; ++i) (mask[i] ? rel : irr) += pred.att[i];
        rel /= static_cast<double>(relevant);
        irr /= static_cast<double>(C - relevant);
        rel_sum += rel;
        irr_sum += irr;
        if (rel > irr) ++ordered;

        LocalizationResult loc = localize(pred.att, threshold);
        for (std::size_t idx : loc.relevant_clips) {
            if (idx < C) {
                ++predicted_positives;
                if (mask[idx]) ++true_positives;
            }
        }
        ++score.videos_scored;
    }

    require(score.videos_scored > 0, "empty_input",
            "score_localization: no videos carry a usable relevance mask");
    const double n = static_cast<double>(score.videos_scored);
    score.ordered_fraction = static_cast<double>(ordered) / n;
    score.precision = predicted_positives == 0
                          ? 0.0
                          : static_cast<double>(true_positives) /
                                static_cast<double>(predicted_positives);
    score.mean_att_relevant = rel_sum / n;
    score.mean_att_irrelevant = irr_sum / n;
    return score;
}

double mean_gate_uncertainty(const std::vector<SyntheticVideo>& videos, const GcfParams& params) {
    require(params.config.uses_gating(), "validation",
            "mean_gate_uncertainty: the mode has no gate");
    require(!videos.empty(), "empty_input", "mean_gate_uncertainty: no videos");
    double total = 0.0;
    for (const auto& video : videos) {
        ClipDescriptorSet clips = video.descriptors;
        if (clips.clip_count() < params.config.C) clips = pad_clips(clips, params.config.C);
        GcfPrediction pred = gcf_predict(clips, params);
        double acc = 0.0;
        for (double a : pred.att) acc += std::min(a, 1.0 - a);
        total += acc / static_cast<double>(pred.att.size());
    }
    return total / static_cast<double>(videos.size());
}

}  // namespace gcf
