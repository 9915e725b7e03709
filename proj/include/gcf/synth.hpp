#pragma once

#include <cstdint>
#include <string>

#include "gcf/dataset.hpp"
#include "gcf/matrix.hpp"

namespace gcf {

enum class BackgroundMode { pure_noise, distractor_prototypes };

BackgroundMode background_mode_from_string(const std::string& s);
std::string to_string(BackgroundMode m);

// Relevance-structured synthetic videos: each video carries one contiguous
// run of clips drawn around its class prototype; everything outside the run
// is unit-variance noise or, in distractor mode with the given probability,
// another class's prototype plus noise.
struct SynthConfig {
    std::size_t num_classes = 20;
    std::size_t clips_per_video = 10;
    std::size_t descriptor_dim = 64;
    std::size_t relevant_run_length = 3;
    double prototype_noise_sigma = 0.5;
    BackgroundMode background_mode = BackgroundMode::distractor_prototypes;
    double distractor_probability = 0.5;
    std::size_t train_size = 5000;
    std::size_t val_size = 500;
    std::size_t test_size = 1000;
    std::uint64_t seed = 1;

    void validate() const;
};

// The desk-scale benchmark preset ("bench-s") at the given seed.
SynthConfig bench_s(std::uint64_t seed);

// Class prototypes: num_classes unit-norm rows drawn from the seed's
// "prototypes" stream. Exposed so tests can cross-check generated videos.
Matrix synth_prototypes(const SynthConfig& cfg);

// Deterministic generation: video labels are assigned round-robin over one
// global index running train, then val, then test; every video's noise comes
// from its own sub-stream split off that index, so output is identical no
// matter how generation is scheduled.
DatasetSplits generate_synthetic(const SynthConfig& cfg);

}  // namespace gcf
