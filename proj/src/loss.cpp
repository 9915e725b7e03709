#include "gcf/loss.hpp"

#include <cmath>
#include <cstddef>

#include "gcf/error.hpp"

namespace gcf {

namespace {

Matrix as_bias_row(const Vector& v) {
    return Matrix(1, v.size(), v);
}

}  // namespace

void LossConfig::validate() const {
    require(std::isfinite(lambda) && lambda >= 0.0, "validation",
            "sparsity lambda must be finite and non-negative");
}

double cross_entropy(const Vector& y, std::size_t label) {
    require(!y.empty(), "validation", "cross_entropy: empty probability vector");
    require(label < y.size(), "validation", "cross_entropy: label out of range");
    double p = y[label];
    require(std::isfinite(p) && p >= 0.0, "non_finite",
            "cross_entropy: probability is not a finite non-negative value");
    if (p < 1e-300) p = 1e-300;
    return -std::log(p);
}

double sparsity_loss(const Vector& att) {
    return l1_norm(att);
}

double total_loss(const ForwardTrace& trace, std::size_t label, const LossConfig& cfg) {
    cfg.validate();
    double loss = cross_entropy(trace.y, label);
    if (trace.att_active) loss += cfg.lambda * sparsity_loss(trace.att);
    return loss;
}

GcfGrads gcf_backward(const ForwardTrace& trace, std::size_t label, const LossConfig& cfg,
                      const GcfParams& params) {
    cfg.validate();
    const GcfConfig& c = params.config;
    require(label < c.K, "validation", "gcf_backward: label out of range");
    require(trace.mode == c.mode, "stale_cache",
            "gcf_backward: trace mode does not match params");
    require(trace.y.size() == c.K, "stale_cache",
            "gcf_backward: trace width does not match params");

    GcfGrads grads = GcfParams::zeros_like(params);
    const std::size_t C = trace.B.rows();
    const std::size_t width = trace.B.cols();

    // softmax + cross-entropy collapse to y - onehot.
    Vector dlogits = trace.y;
    dlogits[label] -= 1.0;

    grads.classifier.W3 += outer(dlogits, trace.v_prime);
    if (params.classifier.has_bias()) grads.classifier.b3 += as_bias_row(dlogits);
    Vector dv = matvec_transposed(params.classifier.W3, dlogits);

    // v' is the column mean of R, so every row of R sees dv / C.
    Vector drow = scale(dv, 1.0 / static_cast<double>(C));

    Matrix dB(C, width);
    if (trace.att_active) {
        // R_i = (1 + att_i) B_i. The descriptor path scales drow; the gate
        // path collects dR_i . B_i, plus the lambda term (att_i > 0 always,
        // so d|att_i| = 1).
        Vector datt(C, 0.0);
        for (std::size_t i = 0; i < C; ++i) {
            const double* b = trace.B.row(i);
            double* db = dB.row(i);
            double acc = 0.0;
            for (std::size_t j = 0; j < width; ++j) {
                db[j] = (1.0 + trace.att[i]) * drow[j];
                acc += drow[j] * b[j];
            }
            datt[i] = acc + cfg.lambda;
        }

        // sigmoid, then the two-layer gate MLP, then the clip summaries.
        Vector dpre(C);
        for (std::size_t i = 0; i < C; ++i)
            dpre[i] = datt[i] * trace.att[i] * (1.0 - trace.att[i]);

        grads.gating.W2 += outer(dpre, trace.gate_hidden);
        if (params.gating.has_bias()) grads.gating.b2 += as_bias_row(dpre);
        Vector dhidden = matvec_transposed(params.gating.W2, dpre);
        for (std::size_t j = 0; j < dhidden.size(); ++j)
            if (trace.gate_pre_hidden[j] <= 0.0) dhidden[j] = 0.0;

        grads.gating.W1 += outer(dhidden, trace.g);
        if (params.gating.has_bias()) grads.gating.b1 += as_bias_row(dhidden);
        Vector dg = matvec_transposed(params.gating.W1, dhidden);

        // g_i = mean of row i of B.
        const double inv_width = 1.0 / static_cast<double>(width);
        for (std::size_t i = 0; i < C; ++i) {
            double* db = dB.row(i);
            const double spread = dg[i] * inv_width;
            for (std::size_t j = 0; j < width; ++j) db[j] += spread;
        }
    } else {
        for (std::size_t i = 0; i < C; ++i) {
            double* db = dB.row(i);
            for (std::size_t j = 0; j < width; ++j) db[j] = drow[j];
        }
    }

    if (c.uses_fusion()) {
        require(trace.fusion_caches.size() == params.fusion_layers.size(), "stale_cache",
                "gcf_backward: fusion cache count does not match layer count");
        Matrix upstream = std::move(dB);
        for (std::size_t l = params.fusion_layers.size(); l-- > 0;) {
            FusionGrads fg =
                fusion_backward(trace.fusion_caches[l], params.fusion_layers[l], upstream);
            grads.fusion_layers[l].W_q += fg.dW_q;
            grads.fusion_layers[l].W_k += fg.dW_k;
            grads.fusion_layers[l].W_v += fg.dW_v;
            grads.fusion_layers[l].W_z += fg.dW_z;
            if (params.fusion_layers[l].has_bias()) {
                grads.fusion_layers[l].b_q += fg.db_q;
                grads.fusion_layers[l].b_k += fg.db_k;
                grads.fusion_layers[l].b_v += fg.db_v;
                grads.fusion_layers[l].b_z += fg.db_z;
            }
            upstream = std::move(fg.dX);
        }
    }
    // clip_wise_only feeds the gate raw descriptors; dB stops at the input.

    return grads;
}

}  // namespace gcf
