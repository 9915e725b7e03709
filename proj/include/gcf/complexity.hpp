#pragma once

#include <cstdint>

#include "gcf/head.hpp"

namespace gcf {

// Closed-form learnable parameter count for a config (mode- and bias-aware):
//   fusion: per layer 3*d_in*D + D^2 (+ 4D with biases)
//   gating: h*C + C*h (+ h + C)
//   classifier: K*width (+ K)
std::uint64_t count_params(const GcfConfig& config);

// Closed-form cost of one video forward pass, counted in
// multiply-accumulates (double the figure for the multiply+add convention):
//   fusion: per layer 3*C*d_in*D + 2*C^2*D + C*D^2
//   gating: h*C + C*h
//   classifier: K*width
// Bias adds are not multiplies and do not count.
std::uint64_t count_flops(const GcfConfig& config);

// Ground truths the closed forms are tested against: exhaustive entry count
// over instantiated matrices, and the MAC counter of an instrumented forward.
std::uint64_t enumerate_params(const GcfParams& params);
std::uint64_t measure_macs(const GcfParams& params);

}  // namespace gcf
