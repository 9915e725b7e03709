#pragma once

#include <string>

#include "gcf/loss.hpp"
#include "gcf/train.hpp"

namespace gcf {

// Everything needed to resume a training run bitwise: model shape and
// weights, the full recipe, optimizer buffers, schedule state, and the
// shuffle RNG.
struct Checkpoint {
    GcfConfig config;
    SgdConfig sgd;
    LossConfig loss;
    GcfParams params;
    TrainerState state;
};

// The clip-level baseline saved in the same container, discriminated by the
// header's "kind" field. No resume support: just the scoring matrix and how
// far training got.
struct ClipCheckpoint {
    SgdConfig sgd;
    ClipClassifierParams clf;
    std::uint64_t epochs_done = 0;
};

// Binary "GCFC" container:
//   magic "GCFC" | version u32 (=1) | header_len u64 | JSON header
//   | payload: params tensors then optimizer buffers (f64, canonical order),
//     schedule (lr f64, best f64, bad u64, reductions u64, stopped u8),
//     epochs_done u64, optimizer steps u64, rng seed u64 + 4 state words.
// The JSON header carries a "kind" tag ("gcf_head" or "clip_classifier"),
// config/recipe scalars, and the tensor manifest; all numbers little-endian.
// Clip-classifier payloads hold only the W tensor and epochs_done u64.
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::string& bytes);

Checkpoint read_checkpoint(const std::string& path);
void write_checkpoint(const Checkpoint& ckpt, const std::string& path);

std::string encode_clip_checkpoint(const ClipCheckpoint& ckpt);
ClipCheckpoint decode_clip_checkpoint(const std::string& bytes);

ClipCheckpoint read_clip_checkpoint(const std::string& path);
void write_clip_checkpoint(const ClipCheckpoint& ckpt, const std::string& path);

// "gcf_head" or "clip_classifier" without decoding the payload.
std::string checkpoint_kind(const std::string& path);

// Field-by-field comparison, naming the first mismatch.
void ensure_config_matches(const GcfConfig& expected, const GcfConfig& actual);

// Header summary for the `inspect` command.
std::string describe_checkpoint_file(const std::string& path);

}  // namespace gcf
