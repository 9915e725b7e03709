#include "gcf/head.hpp"

#include <cmath>

#include "gcf/error.hpp"

namespace gcf {

namespace {

Matrix glorot(std::size_t rows, std::size_t cols, std::size_t fan_in, std::size_t fan_out,
              Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix m(rows, cols);
    for (double& v : m.values()) v = (2.0 * rng.next_double() - 1.0) * limit;
    return m;
}

Vector bias_row(const Matrix& b) {
    Vector v(b.cols());
    for (std::size_t j = 0; j < b.cols(); ++j) v[j] = b(0, j);
    return v;
}

}  // namespace

GcfMode mode_from_string(const std::string& s) {
    if (s == "full") return GcfMode::full;
    if (s == "inter_clip_only") return GcfMode::inter_clip_only;
    if (s == "clip_wise_only") return GcfMode::clip_wise_only;
    throw GcfError("invalid_argument", "unknown mode: " + s);
}

std::string to_string(GcfMode m) {
    switch (m) {
        case GcfMode::full: return "full";
        case GcfMode::inter_clip_only: return "inter_clip_only";
        case GcfMode::clip_wise_only: return "clip_wise_only";
    }
    return "full";
}

void GatingParams::validate(std::size_t C) const {
    const std::size_t h = W1.rows();
    require(h >= 1, "shape_mismatch", "gating: hidden width must be >= 1");
    require(W1.cols() == C, "shape_mismatch",
            "gating: W1 " + shape_string(W1) + " does not match clip count " + std::to_string(C));
    require(W2.rows() == C && W2.cols() == h, "shape_mismatch",
            "gating: W2 " + shape_string(W2) + " vs W1 " + shape_string(W1));
    if (has_bias()) {
        require(b1.rows() == 1 && b1.cols() == h, "shape_mismatch",
                "gating: b1 must be 1x" + std::to_string(h));
        require(b2.rows() == 1 && b2.cols() == C, "shape_mismatch",
                "gating: b2 must be 1x" + std::to_string(C));
    }
}

void GcfConfig::validate() const {
    require(C >= 1, "invalid_config", "C must be >= 1");
    require(d >= 1, "invalid_config", "d must be >= 1");
    require(K >= 2, "invalid_config", "K must be >= 2");
    if (uses_fusion()) {
        require(D >= 1, "invalid_config", "D must be >= 1");
        require(n >= 1, "invalid_config", "n must be >= 1");
    }
    if (uses_gating()) require(gating_hidden() >= 1, "invalid_config", "h must be >= 1");
}

GcfParams GcfParams::init(const GcfConfig& config, Rng& rng) {
    config.validate();
    GcfParams p;
    p.config = config;
    if (config.uses_fusion()) {
        p.fusion_layers.reserve(config.n);
        for (std::size_t l = 0; l < config.n; ++l) {
            const std::size_t d_in = (l == 0) ? config.d : config.D;
            p.fusion_layers.push_back(
                FusionLayerParams::init(d_in, config.D, config.with_bias, rng));
        }
    }
    const std::size_t width = config.head_width();
    if (config.uses_gating()) {
        const std::size_t h = config.gating_hidden();
        p.gating.W1 = glorot(h, config.C, config.C, h, rng);
        p.gating.W2 = glorot(config.C, h, h, config.C, rng);
        if (config.with_bias) {
            p.gating.b1 = Matrix(1, h);
            p.gating.b2 = Matrix(1, config.C);
        }
    }
    p.classifier.W3 = glorot(config.K, width, width, config.K, rng);
    if (config.with_bias) p.classifier.b3 = Matrix(1, config.K);
    return p;
}

GcfParams GcfParams::zeros_like(const GcfParams& other) {
    GcfParams z;
    z.config = other.config;
    z.fusion_layers.resize(other.fusion_layers.size());
    for (std::size_t l = 0; l < other.fusion_layers.size(); ++l) {
        const auto& src = other.fusion_layers[l];
        auto& dst = z.fusion_layers[l];
        dst.W_q = Matrix(src.W_q.rows(), src.W_q.cols());
        dst.W_k = Matrix(src.W_k.rows(), src.W_k.cols());
        dst.W_v = Matrix(src.W_v.rows(), src.W_v.cols());
        dst.W_z = Matrix(src.W_z.rows(), src.W_z.cols());
        if (src.has_bias()) {
            dst.b_q = Matrix(1, src.b_q.cols());
            dst.b_k = Matrix(1, src.b_k.cols());
            dst.b_v = Matrix(1, src.b_v.cols());
            dst.b_z = Matrix(1, src.b_z.cols());
        }
    }
    if (!other.gating.W1.empty()) {
        z.gating.W1 = Matrix(other.gating.W1.rows(), other.gating.W1.cols());
        z.gating.W2 = Matrix(other.gating.W2.rows(), other.gating.W2.cols());
        if (other.gating.has_bias()) {
            z.gating.b1 = Matrix(1, other.gating.b1.cols());
            z.gating.b2 = Matrix(1, other.gating.b2.cols());
        }
    }
    z.classifier.W3 = Matrix(other.classifier.W3.rows(), other.classifier.W3.cols());
    if (other.classifier.has_bias()) z.classifier.b3 = Matrix(1, other.classifier.b3.cols());
    return z;
}

template <typename Self, typename Fn>
static void visit_tensors(Self& self, const Fn& fn) {
    for (std::size_t l = 0; l < self.fusion_layers.size(); ++l) {
        auto& layer = self.fusion_layers[l];
        const std::string prefix = "fusion[" + std::to_string(l) + "].";
        fn(prefix + "W_q", layer.W_q);
        fn(prefix + "W_k", layer.W_k);
        fn(prefix + "W_v", layer.W_v);
        fn(prefix + "W_z", layer.W_z);
        if (layer.has_bias()) {
            fn(prefix + "b_q", layer.b_q);
            fn(prefix + "b_k", layer.b_k);
            fn(prefix + "b_v", layer.b_v);
            fn(prefix + "b_z", layer.b_z);
        }
    }
    if (!self.gating.W1.empty()) {
        fn("gating.W1", self.gating.W1);
        fn("gating.W2", self.gating.W2);
        if (self.gating.has_bias()) {
            fn("gating.b1", self.gating.b1);
            fn("gating.b2", self.gating.b2);
        }
    }
    fn("classifier.W3", self.classifier.W3);
    if (self.classifier.has_bias()) fn("classifier.b3", self.classifier.b3);
}

void GcfParams::for_each_tensor(const std::function<void(const std::string&, Matrix&)>& fn) {
    visit_tensors(*this, fn);
}

void GcfParams::for_each_tensor(
    const std::function<void(const std::string&, const Matrix&)>& fn) const {
    visit_tensors(*this, fn);
}

std::size_t GcfParams::tensor_count() const {
    std::size_t n = 0;
    for_each_tensor([&](const std::string&, const Matrix&) { ++n; });
    return n;
}

void GcfParams::validate() const {
    config.validate();
    if (config.uses_fusion()) {
        require(fusion_layers.size() == config.n, "invalid_config",
                "params hold " + std::to_string(fusion_layers.size()) + " fusion layers, config says " +
                    std::to_string(config.n));
        for (std::size_t l = 0; l < fusion_layers.size(); ++l) {
            fusion_layers[l].validate();
            const std::size_t expect_in = (l == 0) ? config.d : config.D;
            require(fusion_layers[l].in_dim() == expect_in && fusion_layers[l].out_dim() == config.D,
                    "shape_mismatch", "fusion layer " + std::to_string(l) + " has width " +
                                          std::to_string(fusion_layers[l].in_dim()) + "->" +
                                          std::to_string(fusion_layers[l].out_dim()));
        }
    } else {
        require(fusion_layers.empty(), "invalid_config",
                "clip_wise_only params must not hold fusion layers");
    }
    if (config.uses_gating()) {
        gating.validate(config.C);
    } else {
        require(gating.W1.empty(), "invalid_config", "inter_clip_only params must not hold a gate");
    }
    require(classifier.W3.rows() == config.K && classifier.W3.cols() == config.head_width(),
            "shape_mismatch", "classifier W3 " + shape_string(classifier.W3) + " vs expected " +
                                  std::to_string(config.K) + "x" +
                                  std::to_string(config.head_width()));
}

Vector clip_summary(const Matrix& B) { return row_mean(B); }

Vector gated_attention(const Vector& g, const GatingParams& p) {
    p.validate(g.size());
    Vector z = matvec(p.W1, g);
    if (p.has_bias()) z = add(z, bias_row(p.b1));
    Vector u = matvec(p.W2, relu(z));
    if (p.has_bias()) u = add(u, bias_row(p.b2));
    return sigmoid(u);
}

void rescale_and_residual(const Matrix& B, const Vector& att, Matrix& S, Matrix& R) {
    require(att.size() == B.rows(), "shape_mismatch",
            "rescale_and_residual: att length " + std::to_string(att.size()) + " vs C=" +
                std::to_string(B.rows()));
    S = Matrix(B.rows(), B.cols());
    R = Matrix(B.rows(), B.cols());
    for (std::size_t i = 0; i < B.rows(); ++i) {
        const double* bi = B.row(i);
        double* si = S.row(i);
        double* ri = R.row(i);
        for (std::size_t j = 0; j < B.cols(); ++j) {
            si[j] = att[i] * bi[j];
            ri[j] = bi[j] + si[j];
        }
    }
}

Vector video_descriptor(const Matrix& R) { return col_mean(R); }

Vector classify(const Vector& v_prime, const ClassifierParams& p) {
    Vector logits = matvec(p.W3, v_prime);
    if (p.has_bias()) logits = add(logits, bias_row(p.b3));
    return softmax(logits);
}

ForwardTrace gcf_forward(const ClipDescriptorSet& clips, const GcfParams& params) {
    params.validate();
    const GcfConfig& cfg = params.config;
    require(clips.clip_count() == cfg.C, "shape_mismatch",
            "gcf_forward: video has " + std::to_string(clips.clip_count()) + " clips, gate expects " +
                std::to_string(cfg.C));
    require(clips.dim() == cfg.d, "shape_mismatch",
            "gcf_forward: descriptor width " + std::to_string(clips.dim()) + " vs config d=" +
                std::to_string(cfg.d));

    ForwardTrace t;
    t.mode = cfg.mode;

    if (cfg.uses_fusion()) {
        t.B = stacked_fusion(clips.V, params.fusion_layers, cfg.normalization, &t.fusion_caches);
    } else {
        t.B = clips.V;
    }

    t.g = clip_summary(t.B);

    if (cfg.uses_gating()) {
        t.gate_pre_hidden = matvec(params.gating.W1, t.g);
        if (params.gating.has_bias()) t.gate_pre_hidden = add(t.gate_pre_hidden, bias_row(params.gating.b1));
        t.gate_hidden = relu(t.gate_pre_hidden);
        t.gate_pre = matvec(params.gating.W2, t.gate_hidden);
        if (params.gating.has_bias()) t.gate_pre = add(t.gate_pre, bias_row(params.gating.b2));
        t.att = sigmoid(t.gate_pre);
        t.att_active = true;
        rescale_and_residual(t.B, t.att, t.S, t.R);
    } else {
        // Gate skipped: record the all-ones sentinel and pass B straight through.
        t.att = Vector(cfg.C, 1.0);
        t.att_active = false;
        t.R = t.B;
    }

    t.v_prime = video_descriptor(t.R);

    t.logits = matvec(params.classifier.W3, t.v_prime);
    if (params.classifier.has_bias()) t.logits = add(t.logits, bias_row(params.classifier.b3));
    t.y = softmax(t.logits);
    return t;
}

}  // namespace gcf
