#include "gcf/fusion.hpp"

#include <cmath>

#include "gcf/error.hpp"

namespace gcf {

namespace {

// Glorot-uniform entries for a linear map with the given fan widths.
Matrix glorot(std::size_t rows, std::size_t cols, std::size_t fan_in, std::size_t fan_out,
              Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix m(rows, cols);
    for (double& v : m.values()) v = (2.0 * rng.next_double() - 1.0) * limit;
    return m;
}

void add_bias_rows(Matrix& m, const Matrix& bias) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double* ri = m.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j) ri[j] += bias(0, j);
    }
}

Matrix row_vector(const Vector& v) {
    Matrix m(1, v.size());
    for (std::size_t j = 0; j < v.size(); ++j) m(0, j) = v[j];
    return m;
}

}  // namespace

ClipDescriptorSet::ClipDescriptorSet(Matrix v) : V(std::move(v)) {
    require(V.rows() >= 1 && V.cols() >= 1, "empty_input",
            "clip descriptor set needs C >= 1 and d >= 1, got " + shape_string(V));
    V.ensure_finite("clip descriptor set");
}

ScoreNormalization score_normalization_from_string(const std::string& s) {
    if (s == "softmax") return ScoreNormalization::softmax;
    if (s == "divisor") return ScoreNormalization::divisor;
    throw GcfError("invalid_argument", "unknown score normalization: " + s);
}

std::string to_string(ScoreNormalization n) {
    return n == ScoreNormalization::softmax ? "softmax" : "divisor";
}

FusionLayerParams FusionLayerParams::init(std::size_t d_in, std::size_t d_out, bool with_bias,
                                          Rng& rng) {
    FusionLayerParams p;
    p.W_q = glorot(d_in, d_out, d_in, d_out, rng);
    p.W_k = glorot(d_in, d_out, d_in, d_out, rng);
    p.W_v = glorot(d_in, d_out, d_in, d_out, rng);
    p.W_z = glorot(d_out, d_out, d_out, d_out, rng);
    if (with_bias) {
        p.b_q = Matrix(1, d_out);
        p.b_k = Matrix(1, d_out);
        p.b_v = Matrix(1, d_out);
        p.b_z = Matrix(1, d_out);
    }
    return p;
}

void FusionLayerParams::validate() const {
    const std::size_t d_in = W_q.rows(), d_out = W_q.cols();
    require(d_in >= 1 && d_out >= 1, "shape_mismatch", "fusion layer: empty projection");
    require(W_k.rows() == d_in && W_k.cols() == d_out, "shape_mismatch",
            "fusion layer: W_k " + shape_string(W_k) + " vs W_q " + shape_string(W_q));
    require(W_v.rows() == d_in && W_v.cols() == d_out, "shape_mismatch",
            "fusion layer: W_v " + shape_string(W_v) + " vs W_q " + shape_string(W_q));
    require(W_z.rows() == d_out && W_z.cols() == d_out, "shape_mismatch",
            "fusion layer: W_z must be " + std::to_string(d_out) + "x" + std::to_string(d_out) +
                ", got " + shape_string(W_z));
    if (has_bias()) {
        for (const Matrix* b : {&b_q, &b_k, &b_v, &b_z}) {
            require(b->rows() == 1 && b->cols() == d_out, "shape_mismatch",
                    "fusion layer: bias must be 1x" + std::to_string(d_out) + ", got " +
                        shape_string(*b));
        }
    }
}

Matrix fusion_forward(const Matrix& X, const FusionLayerParams& p, ScoreNormalization norm,
                      FusionCache* cache) {
    p.validate();
    require(X.cols() == p.in_dim(), "shape_mismatch",
            "fusion_forward: input " + shape_string(X) + " vs projection " + shape_string(p.W_q));
    const std::size_t D = p.out_dim();
    const double inv_scale = 1.0 / std::sqrt(static_cast<double>(D));

    Matrix Q = matmul(X, p.W_q);
    Matrix K = matmul(X, p.W_k);
    Matrix U = matmul(X, p.W_v);
    if (p.has_bias()) {
        add_bias_rows(Q, p.b_q);
        add_bias_rows(K, p.b_k);
        add_bias_rows(U, p.b_v);
    }

    Matrix S = matmul(Q, transpose(K));
    S *= inv_scale;
    Matrix A = (norm == ScoreNormalization::softmax) ? row_softmax(S) : S;

    Matrix H = matmul(A, U);
    Matrix B = matmul(H, p.W_z);
    if (p.has_bias()) add_bias_rows(B, p.b_z);

    if (cache) {
        cache->X = X;
        cache->Q = std::move(Q);
        cache->K = std::move(K);
        cache->U = std::move(U);
        cache->A = std::move(A);
        cache->H = std::move(H);
        cache->norm = norm;
    }
    return B;
}

FusionGrads fusion_backward(const FusionCache& cache, const FusionLayerParams& p,
                            const Matrix& dB) {
    p.validate();
    const std::size_t C = cache.X.rows();
    const std::size_t D = p.out_dim();
    require(cache.X.cols() == p.in_dim() && cache.Q.rows() == C && cache.Q.cols() == D &&
                cache.A.rows() == C && cache.A.cols() == C && cache.H.rows() == C &&
                cache.H.cols() == D,
            "stale_cache", "fusion_backward: cache does not match these parameters");
    require(dB.rows() == C && dB.cols() == D, "shape_mismatch",
            "fusion_backward: dB " + shape_string(dB) + " vs expected " + std::to_string(C) + "x" +
                std::to_string(D));
    const double inv_scale = 1.0 / std::sqrt(static_cast<double>(D));

    FusionGrads g;
    g.dW_z = matmul(transpose(cache.H), dB);
    Matrix dH = matmul(dB, transpose(p.W_z));

    Matrix dA = matmul(dH, transpose(cache.U));
    Matrix dU = matmul(transpose(cache.A), dH);

    Matrix dS(C, C);
    if (cache.norm == ScoreNormalization::softmax) {
        // Row-wise softmax backward: dS_i = A_i o (dA_i - <dA_i, A_i>).
        for (std::size_t i = 0; i < C; ++i) {
            const double* ai = cache.A.row(i);
            const double* dai = dA.row(i);
            double inner = 0.0;
            for (std::size_t j = 0; j < C; ++j) inner += dai[j] * ai[j];
            double* dsi = dS.row(i);
            for (std::size_t j = 0; j < C; ++j) dsi[j] = ai[j] * (dai[j] - inner);
        }
    } else {
        dS = dA;
    }
    dS *= inv_scale;

    Matrix dQ = matmul(dS, cache.K);
    Matrix dK = matmul(transpose(dS), cache.Q);

    g.dW_q = matmul(transpose(cache.X), dQ);
    g.dW_k = matmul(transpose(cache.X), dK);
    g.dW_v = matmul(transpose(cache.X), dU);

    g.dX = matmul(dQ, transpose(p.W_q));
    g.dX += matmul(dK, transpose(p.W_k));
    g.dX += matmul(dU, transpose(p.W_v));

    if (p.has_bias()) {
        g.db_q = row_vector(col_sum(dQ));
        g.db_k = row_vector(col_sum(dK));
        g.db_v = row_vector(col_sum(dU));
        g.db_z = row_vector(col_sum(dB));
    }
    return g;
}

Matrix stacked_fusion(const Matrix& V, const std::vector<FusionLayerParams>& layers,
                      ScoreNormalization norm, std::vector<FusionCache>* caches) {
    require(!layers.empty(), "invalid_argument", "stacked_fusion: needs at least one layer");
    if (caches) caches->resize(layers.size());
    Matrix X = V;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        require(X.cols() == layers[l].in_dim(), "shape_mismatch",
                "stacked_fusion: layer " + std::to_string(l) + " expects width " +
                    std::to_string(layers[l].in_dim()) + ", got " + std::to_string(X.cols()));
        X = fusion_forward(X, layers[l], norm, caches ? &(*caches)[l] : nullptr);
    }
    return X;
}

}  // namespace gcf
