#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gcf/fusion.hpp"
#include "gcf/matrix.hpp"
#include "gcf/rng.hpp"

namespace gcf {

// Which stages of the head are active. `full` runs fusion + gating;
// `inter_clip_only` skips the gate (video descriptor is the plain mean of
// fused clips); `clip_wise_only` gates the raw descriptors without fusion.
enum class GcfMode { full, inter_clip_only, clip_wise_only };

GcfMode mode_from_string(const std::string& s);
std::string to_string(GcfMode m);

struct GatingParams {
    Matrix W1;  // h x C
    Matrix W2;  // C x h
    Matrix b1, b2;  // 1 x h, 1 x C; empty when biases are off

    bool has_bias() const noexcept { return !b1.empty(); }
    void validate(std::size_t C) const;
};

struct ClassifierParams {
    Matrix W3;  // K x width
    Matrix b3;  // 1 x K; empty when biases are off

    bool has_bias() const noexcept { return !b3.empty(); }
};

struct GcfConfig {
    std::size_t C = 10;   // clips per video (fixed by the gate)
    std::size_t d = 64;   // raw descriptor width
    std::size_t D = 32;   // fused descriptor width
    std::size_t K = 20;   // classes
    std::size_t n = 1;    // fusion layers
    std::size_t h = 0;    // gating hidden width; 0 means "use C"
    GcfMode mode = GcfMode::full;
    ScoreNormalization normalization = ScoreNormalization::softmax;
    bool with_bias = false;

    std::size_t gating_hidden() const noexcept { return h == 0 ? C : h; }
    // Width of the descriptors the gate/classifier see (d when fusion is
    // skipped, D otherwise).
    std::size_t head_width() const noexcept { return mode == GcfMode::clip_wise_only ? d : D; }
    bool uses_fusion() const noexcept { return mode != GcfMode::clip_wise_only; }
    bool uses_gating() const noexcept { return mode != GcfMode::inter_clip_only; }

    void validate() const;
    bool operator==(const GcfConfig&) const = default;
};

// All learnable tensors. Only the stages the mode uses are instantiated:
// fusion layers are absent in clip_wise_only, the gate is absent in
// inter_clip_only.
struct GcfParams {
    GcfConfig config;
    std::vector<FusionLayerParams> fusion_layers;
    GatingParams gating;
    ClassifierParams classifier;

    static GcfParams init(const GcfConfig& config, Rng& rng);
    static GcfParams zeros_like(const GcfParams& other);

    // Visits every learnable matrix in a fixed, documented order:
    // fusion layer 0..n-1 (W_q, W_k, W_v, W_z[, b_q, b_k, b_v, b_z]),
    // gating (W1, W2[, b1, b2]), classifier (W3[, b3]).
    void for_each_tensor(const std::function<void(const std::string&, Matrix&)>& fn);
    void for_each_tensor(const std::function<void(const std::string&, const Matrix&)>& fn) const;

    std::size_t tensor_count() const;
    void validate() const;
};

// Gradients mirror the parameter layout exactly.
using GcfGrads = GcfParams;

// Every intermediate of one forward pass, plus the caches backward needs.
struct ForwardTrace {
    GcfMode mode = GcfMode::full;
    Matrix B;          // descriptors entering the head (C x head_width)
    Vector g;          // per-clip summaries (C)
    Vector att;        // gates in (0,1); all-ones sentinel when gating is skipped
    bool att_active = false;
    Matrix S;          // att-rescaled descriptors (empty when gating is skipped)
    Matrix R;          // residual descriptors (B when gating is skipped)
    Vector v_prime;    // video-level descriptor
    Vector logits;     // K
    Vector y;          // softmax probabilities, K
    // backward caches
    std::vector<FusionCache> fusion_caches;
    Vector gate_pre_hidden;  // W1 g (+ b1), before relu
    Vector gate_hidden;      // relu of the above
    Vector gate_pre;         // W2 r (+ b2), before sigmoid
};

// --- head stages --------------------------------------------------------------

// Per-clip summary: g_i = mean of row i.
Vector clip_summary(const Matrix& B);

// att = sigmoid(W2 relu(W1 g)); every entry strictly inside (0,1).
Vector gated_attention(const Vector& g, const GatingParams& p);

// s_i = att_i * b_i and R = B + S.
void rescale_and_residual(const Matrix& B, const Vector& att, Matrix& S, Matrix& R);

// Column-wise mean of R.
Vector video_descriptor(const Matrix& R);

// y = softmax(W3 v').
Vector classify(const Vector& v_prime, const ClassifierParams& p);

// Full video-level forward pass for the mode baked into params.config.
ForwardTrace gcf_forward(const ClipDescriptorSet& clips, const GcfParams& params);

}  // namespace gcf
