#pragma once

#include "gcf/head.hpp"
#include "gcf/matrix.hpp"

namespace gcf {

struct LossConfig {
    double lambda = 0.01;  // sparsity trade-off; 0 disables the L1 term

    void validate() const;
};

// -log y[label], with the probability clamped at 1e-300.
double cross_entropy(const Vector& y, std::size_t label);

// L1 norm of the gate vector.
double sparsity_loss(const Vector& att);

// L = L_c + lambda * L_s. The sparsity term is identically zero for traces
// whose gate stage was skipped.
double total_loss(const ForwardTrace& trace, std::size_t label, const LossConfig& cfg);

// Exact gradients of total_loss with respect to every learnable tensor,
// including the lambda path through the sigmoid gate and the rescaling.
GcfGrads gcf_backward(const ForwardTrace& trace, std::size_t label, const LossConfig& cfg,
                      const GcfParams& params);

}  // namespace gcf
