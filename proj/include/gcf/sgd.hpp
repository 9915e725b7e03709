#pragma once

#include <cstdint>

#include "gcf/head.hpp"

namespace gcf {

struct SgdConfig {
    double lr = 0.1;
    double momentum = 0.9;
    double dampening = 0.9;
    double weight_decay = 1e-3;
    std::size_t batch_size = 32;
    std::size_t lr_reductions = 3;
    double lr_factor = 0.1;
    std::size_t plateau_patience = 3;

    void validate() const;
};

// Momentum buffers, one per learnable tensor, in the canonical order.
struct SgdState {
    GcfParams buffers;
    std::uint64_t steps = 0;

    static SgdState init(const GcfParams& params);
};

// One update with the conventional recurrence:
//   g <- g + weight_decay * w
//   buffer <- g on the first step, else momentum * buffer + (1 - dampening) * g
//   w <- w - lr * buffer
// Rejects non-finite gradients, naming the offending tensor.
void sgd_step(GcfParams& params, const GcfGrads& grads, SgdState& state, const SgdConfig& cfg);

}  // namespace gcf
