#include "gcf/synth.hpp"

#include <cmath>

#include "gcf/error.hpp"
#include "gcf/rng.hpp"

namespace gcf {

BackgroundMode background_mode_from_string(const std::string& s) {
    if (s == "pure_noise") return BackgroundMode::pure_noise;
    if (s == "distractor_prototypes") return BackgroundMode::distractor_prototypes;
    throw GcfError("invalid_argument", "unknown background mode: " + s);
}

std::string to_string(BackgroundMode m) {
    return m == BackgroundMode::pure_noise ? "pure_noise" : "distractor_prototypes";
}

void SynthConfig::validate() const {
    require(num_classes >= 2, "invalid_config", "synth: need at least 2 classes");
    require(clips_per_video >= 1, "invalid_config", "synth: need at least 1 clip per video");
    require(descriptor_dim >= 1, "invalid_config", "synth: descriptor_dim must be >= 1");
    require(relevant_run_length >= 1 && relevant_run_length <= clips_per_video, "invalid_config",
            "synth: relevant_run_length must lie in [1, clips_per_video]");
    require(std::isfinite(prototype_noise_sigma) && prototype_noise_sigma >= 0.0, "invalid_config",
            "synth: prototype_noise_sigma must be finite and non-negative");
    require(std::isfinite(distractor_probability) && distractor_probability >= 0.0 &&
                distractor_probability <= 1.0,
            "invalid_config", "synth: distractor_probability must lie in [0,1]");
    require(train_size >= 1 && val_size >= 1 && test_size >= 1, "invalid_config",
            "synth: every split needs at least 1 video");
}

SynthConfig bench_s(std::uint64_t seed) {
    SynthConfig cfg;
    cfg.seed = seed;
    return cfg;
}

Matrix synth_prototypes(const SynthConfig& cfg) {
    cfg.validate();
    Rng stream = Rng(cfg.seed).split("prototypes");
    Matrix protos(cfg.num_classes, cfg.descriptor_dim);
    for (std::size_t c = 0; c < cfg.num_classes; ++c) {
        double norm_sq = 0.0;
        double* row = protos.row(c);
        for (std::size_t j = 0; j < cfg.descriptor_dim; ++j) {
            row[j] = stream.next_gaussian();
            norm_sq += row[j] * row[j];
        }
        require(norm_sq > 0.0, "non_finite", "synth: degenerate zero prototype");
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (std::size_t j = 0; j < cfg.descriptor_dim; ++j) row[j] *= inv;
    }
    return protos;
}

namespace {

// Draw order per video is fixed: run start, then per clip (in index order)
// either prototype noise, or one uniform for the distractor coin, one
// distractor class pick when it lands, then the clip's gaussians.
SyntheticVideo make_video(const SynthConfig& cfg, const Matrix& protos, std::size_t label,
                          Rng rng) {
    const std::size_t C = cfg.clips_per_video, d = cfg.descriptor_dim;
    const std::size_t start = static_cast<std::size_t>(
        rng.uniform_below(static_cast<std::uint64_t>(C - cfg.relevant_run_length + 1)));

    SyntheticVideo video;
    video.label = label;
    video.relevance_mask.assign(C, 0);
    Matrix V(C, d);
    for (std::size_t i = 0; i < C; ++i) {
        double* row = V.row(i);
        const bool relevant = i >= start && i < start + cfg.relevant_run_length;
        if (relevant) {
            video.relevance_mask[i] = 1;
            const double* proto = protos.row(label);
            for (std::size_t j = 0; j < d; ++j) {
                row[j] = proto[j] + cfg.prototype_noise_sigma * rng.next_gaussian();
            }
            continue;
        }
        bool distract = false;
        if (cfg.background_mode == BackgroundMode::distractor_prototypes) {
            distract = rng.next_double() < cfg.distractor_probability;
        }
        if (distract) {
            std::size_t other = static_cast<std::size_t>(
                rng.uniform_below(static_cast<std::uint64_t>(cfg.num_classes - 1)));
            if (other >= label) ++other;
            const double* proto = protos.row(other);
            for (std::size_t j = 0; j < d; ++j) {
                row[j] = proto[j] + cfg.prototype_noise_sigma * rng.next_gaussian();
            }
        } else {
            for (std::size_t j = 0; j < d; ++j) row[j] = rng.next_gaussian();
        }
    }
    video.descriptors = ClipDescriptorSet(std::move(V));
    video.validate();
    return video;
}

}  // namespace

DatasetSplits generate_synthetic(const SynthConfig& cfg) {
    cfg.validate();
    const Matrix protos = synth_prototypes(cfg);
    const Rng root(cfg.seed);

    DatasetSplits splits;
    std::uint64_t global_index = 0;
    auto fill = [&](std::vector<SyntheticVideo>& out, std::size_t count) {
        out.reserve(count);
        for (std::size_t i = 0; i < count; ++i, ++global_index) {
            const std::size_t label = static_cast<std::size_t>(global_index % cfg.num_classes);
            out.push_back(make_video(cfg, protos, label, root.split(global_index)));
        }
    };
    fill(splits.train, cfg.train_size);
    fill(splits.val, cfg.val_size);
    fill(splits.test, cfg.test_size);
    return splits;
}

}  // namespace gcf
