#include "gcf/sgd.hpp"

#include <cmath>
#include <vector>

#include "gcf/error.hpp"

namespace gcf {

void SgdConfig::validate() const {
    require(std::isfinite(lr) && lr >= 0.0, "validation", "sgd: lr must be finite and >= 0");
    require(std::isfinite(momentum) && momentum >= 0.0 && momentum < 1.0, "validation",
            "sgd: momentum must lie in [0,1)");
    require(std::isfinite(dampening) && dampening >= 0.0 && dampening <= 1.0, "validation",
            "sgd: dampening must lie in [0,1]");
    require(std::isfinite(weight_decay) && weight_decay >= 0.0, "validation",
            "sgd: weight_decay must be finite and non-negative");
    require(batch_size >= 1, "validation", "sgd: batch_size must be at least 1");
    require(std::isfinite(lr_factor) && lr_factor > 0.0 && lr_factor < 1.0, "validation",
            "sgd: lr_factor must lie in (0,1)");
    require(plateau_patience >= 1, "validation", "sgd: plateau_patience must be at least 1");
}

SgdState SgdState::init(const GcfParams& params) {
    SgdState s;
    s.buffers = GcfParams::zeros_like(params);
    s.steps = 0;
    return s;
}

void sgd_step(GcfParams& params, const GcfGrads& grads, SgdState& state, const SgdConfig& cfg) {
    cfg.validate();

    struct Slot {
        Matrix* w;
        const Matrix* g;
        Matrix* buf;
    };
    std::vector<Slot> slots;
    std::vector<std::string> names;
    params.for_each_tensor([&](const std::string& name, Matrix& w) {
        slots.push_back({&w, nullptr, nullptr});
        names.push_back(name);
    });
    std::size_t idx = 0;
    grads.for_each_tensor([&](const std::string&, const Matrix& g) {
        require(idx < slots.size(), "validation", "sgd: gradient layout does not match params");
        slots[idx++].g = &g;
    });
    require(idx == slots.size(), "validation", "sgd: gradient layout does not match params");
    idx = 0;
    state.buffers.for_each_tensor([&](const std::string&, Matrix& buf) {
        require(idx < slots.size(), "validation", "sgd: state layout does not match params");
        slots[idx++].buf = &buf;
    });
    require(idx == slots.size(), "validation", "sgd: state layout does not match params");

    const bool first = state.steps == 0;
    for (std::size_t t = 0; t < slots.size(); ++t) {
        Matrix& w = *slots[t].w;
        const Matrix& g = *slots[t].g;
        Matrix& buf = *slots[t].buf;
        require(w.same_shape(g) && w.same_shape(buf), "validation",
                "sgd: shape mismatch in tensor " + names[t]);
        require(g.all_finite(), "non_finite", "sgd: non-finite gradient in tensor " + names[t]);

        double* wp = w.data();
        const double* gp = g.data();
        double* bp = buf.data();
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double decayed = gp[i] + cfg.weight_decay * wp[i];
            bp[i] = first ? decayed : cfg.momentum * bp[i] + (1.0 - cfg.dampening) * decayed;
            wp[i] -= cfg.lr * bp[i];
        }
    }
    ++state.steps;
}

}  // namespace gcf
