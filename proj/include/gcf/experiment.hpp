#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gcf/dataset.hpp"
#include "gcf/inference.hpp"
#include "gcf/synth.hpp"
#include "gcf/train.hpp"

namespace gcf {

// --- history ------------------------------------------------------------------

// One JSON object per line, append-only, parseable without this library.
void append_history(const std::string& path, const std::vector<EpochRecord>& records);
std::vector<EpochRecord> read_history(const std::string& path);
std::string history_line(const EpochRecord& rec);

// --- manifests ------------------------------------------------------------------

// What a run produced: logical name, byte count, FNV-1a64 checksum.
struct OutputRecord {
    std::string name;
    std::uint64_t byte_count = 0;
    std::uint64_t checksum = 0;
};

// Records everything needed to reproduce a run: the command line, the full
// configuration (as a JSON object string), the seed, and checksums of every
// output. Deterministic byte-for-byte given the same inputs.
void write_manifest(const std::string& path, const std::string& command,
                    const std::string& config_json, std::uint64_t seed,
                    const std::vector<OutputRecord>& outputs);

std::string checksum_hex(std::uint64_t checksum);

// --- dataset directories --------------------------------------------------------

// Layout: <dir>/dataset.json plus train/ val/ test/ holding zero-padded
// .gcfd files in video order. The manifest records per-split video counts,
// total bytes, and a checksum over the concatenated encoded files.
void save_dataset(const std::string& dir, const DatasetSplits& splits, const SynthConfig& cfg,
                  const std::string& command);
DatasetSplits load_dataset(const std::string& dir);  // verifies counts and checksums
std::vector<SyntheticVideo> load_split(const std::string& dir, const std::string& split_name);

// --- shared evaluation harness ----------------------------------------------------

struct StrategyReport {
    double central_top1 = 0.0;
    double dense_top1 = 0.0;
    double gcf_top1 = 0.0;
};

// Top-1 of the three prediction strategies over one video set. central_k is
// the width of the central window (1 = single middle clip).
StrategyReport evaluate_strategies(const std::vector<SyntheticVideo>& videos,
                                   const ClipClassifierParams& clf, const GcfParams& params,
                                   std::size_t central_k = 1);

struct LocalizationScore {
    // Fraction of videos where the mean gate over ground-truth relevant
    // clips strictly exceeds the mean over irrelevant clips.
    double ordered_fraction = 0.0;
    // Micro-averaged precision of localize(att, threshold) against the mask.
    double precision = 0.0;
    double mean_att_relevant = 0.0;
    double mean_att_irrelevant = 0.0;
    std::size_t videos_scored = 0;
};

// Scores the gate against the relevance masks. Videos lacking a mask or
// having no irrelevant clip are skipped.
LocalizationScore score_localization(const std::vector<SyntheticVideo>& videos,
                                     const GcfParams& params, double threshold = 0.5);

// Mean over videos of mean_i min(att_i, 1 - att_i): low values mean gates
// sit near 0 or 1. The sparsity term is expected to push this down.
double mean_gate_uncertainty(const std::vector<SyntheticVideo>& videos, const GcfParams& params);

}  // namespace gcf
