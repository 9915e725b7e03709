#include "gcf/complexity.hpp"

namespace gcf {

std::uint64_t count_params(const GcfConfig& config) {
    config.validate();
    const std::uint64_t C = config.C, d = config.d, D = config.D, K = config.K;
    const std::uint64_t h = config.gating_hidden();
    const std::uint64_t width = config.head_width();

    std::uint64_t total = 0;
    if (config.uses_fusion()) {
        for (std::size_t l = 0; l < config.n; ++l) {
            const std::uint64_t d_in = l == 0 ? d : D;
            total += 3 * d_in * D + D * D;
            if (config.with_bias) total += 4 * D;
        }
    }
    if (config.uses_gating()) {
        total += h * C + C * h;
        if (config.with_bias) total += h + C;
    }
    total += K * width;
    if (config.with_bias) total += K;
    return total;
}

std::uint64_t count_flops(const GcfConfig& config) {
    config.validate();
    const std::uint64_t C = config.C, d = config.d, D = config.D, K = config.K;
    const std::uint64_t h = config.gating_hidden();
    const std::uint64_t width = config.head_width();

    std::uint64_t total = 0;
    if (config.uses_fusion()) {
        for (std::size_t l = 0; l < config.n; ++l) {
            const std::uint64_t d_in = l == 0 ? d : D;
            total += 3 * C * d_in * D + 2 * C * C * D + C * D * D;
        }
    }
    if (config.uses_gating()) total += h * C + C * h;
    total += K * width;
    return total;
}

std::uint64_t enumerate_params(const GcfParams& params) {
    std::uint64_t total = 0;
    params.for_each_tensor(
        [&](const std::string&, const Matrix& m) { total += static_cast<std::uint64_t>(m.size()); });
    return total;
}

std::uint64_t measure_macs(const GcfParams& params) {
    Rng rng(911);
    Matrix V(params.config.C, params.config.d);
    for (double& x : V.values()) x = rng.next_gaussian();

    MacCounterScope scope;
    gcf_forward(ClipDescriptorSet(V), params);
    return scope.count();
}

}  // namespace gcf
