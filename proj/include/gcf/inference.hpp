#pragma once

#include <cstddef>
#include <vector>

#include "gcf/head.hpp"
#include "gcf/train.hpp"

namespace gcf {

// Loop padding: rows repeated cyclically (output row t = input row t mod C)
// until target_C rows exist. Shrinking is never implicit; see truncate_clips.
ClipDescriptorSet pad_clips(const ClipDescriptorSet& V, std::size_t target_C);

// Keeps the first target_C clips. 1 <= target_C <= C.
ClipDescriptorSet truncate_clips(const ClipDescriptorSet& V, std::size_t target_C);

// Baseline (a): classify only the middle clip, index floor(C/2), 0-based.
Vector central_clip_predict(const ClipDescriptorSet& V, const ClipClassifierParams& clf);

// Baseline (a) widened: mean prediction over the k middle clips, a window
// starting at floor(C/2) - floor(k/2), clamped into range. k = 1 is
// central_clip_predict.
Vector central_clips_predict(const ClipDescriptorSet& V, const ClipClassifierParams& clf,
                             std::size_t k);

// Baseline (b): mean of per-clip predictions over the whole video.
Vector dense_clips_predict(const ClipDescriptorSet& V, const ClipClassifierParams& clf);

struct GcfPrediction {
    Vector y;
    Vector att;       // all-ones sentinel when the mode has no gate
    bool att_active = false;
};

// Strategy (c): the gated fusion head. V must already be padded to
// params.config.C clips.
GcfPrediction gcf_predict(const ClipDescriptorSet& V, const GcfParams& params);

// Fraction of samples whose argmax matches the label; argmax ties break to
// the lowest class index.
double top1_accuracy(const std::vector<Vector>& predictions, const std::vector<std::size_t>& labels);

struct LocalizationResult {
    std::vector<std::size_t> relevant_clips;  // indices with att strictly above threshold
    Vector att;
    double threshold = 0.5;
};

// Clips whose gate surpasses the threshold (strict >).
LocalizationResult localize(const Vector& att, double threshold = 0.5);

}  // namespace gcf
