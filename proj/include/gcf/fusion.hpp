#pragma once

#include <vector>

#include "gcf/matrix.hpp"
#include "gcf/rng.hpp"

namespace gcf {

// A set of clip descriptors: row i of V is the pooled feature vector of
// clip i. C = rows, d = cols.
struct ClipDescriptorSet {
    Matrix V;

    ClipDescriptorSet() = default;
    explicit ClipDescriptorSet(Matrix v);

    std::size_t clip_count() const noexcept { return V.rows(); }
    std::size_t dim() const noexcept { return V.cols(); }
};

// How pairwise clip scores are normalized into fusion weights. `softmax` is
// the default (row softmax over scores scaled by 1/sqrt(D)); `divisor` keeps
// the scaled scores as-is.
enum class ScoreNormalization { softmax, divisor };

ScoreNormalization score_normalization_from_string(const std::string& s);
std::string to_string(ScoreNormalization n);

// One inter-clip fusion layer: query/key/value projections (d_in x D) and the
// output transform (D x D). Bias rows (1 x D) are empty unless biases are
// enabled.
struct FusionLayerParams {
    Matrix W_q, W_k, W_v, W_z;
    Matrix b_q, b_k, b_v, b_z;

    bool has_bias() const noexcept { return !b_q.empty(); }
    std::size_t in_dim() const noexcept { return W_q.rows(); }
    std::size_t out_dim() const noexcept { return W_q.cols(); }

    static FusionLayerParams init(std::size_t d_in, std::size_t d_out, bool with_bias, Rng& rng);
    void validate() const;
};

// Intermediates of one fusion layer forward pass, retained for backward.
struct FusionCache {
    Matrix X;       // layer input, C x d_in
    Matrix Q, K, U; // projections, C x D
    Matrix A;       // fusion weights, C x C
    Matrix H;       // A * U, C x D
    ScoreNormalization norm = ScoreNormalization::softmax;
};

// Bi-directional inter-clip fusion. Every clip descriptor is rewritten as a
// weighted combination of all clips' value projections:
//   scores S_ij = (X W_q)_i . (X W_k)_j / sqrt(D)
//   A = row_softmax(S)           (or A = S in divisor mode)
//   B = (A (X W_v)) W_z
// Returns B (C x D); fills `cache` when given.
Matrix fusion_forward(const Matrix& X, const FusionLayerParams& p, ScoreNormalization norm,
                      FusionCache* cache = nullptr);

struct FusionGrads {
    Matrix dX;
    Matrix dW_q, dW_k, dW_v, dW_z;
    Matrix db_q, db_k, db_v, db_z;  // empty when biases are off
};

// Exact gradients of one fusion layer given the upstream gradient dB.
FusionGrads fusion_backward(const FusionCache& cache, const FusionLayerParams& p,
                            const Matrix& dB);

// n stacked fusion layers: layer 1 maps width d -> D, deeper layers D -> D.
// Rejects an empty layer list and chained shape mismatches.
Matrix stacked_fusion(const Matrix& V, const std::vector<FusionLayerParams>& layers,
                      ScoreNormalization norm, std::vector<FusionCache>* caches = nullptr);

}  // namespace gcf
