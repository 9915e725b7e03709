#pragma once

#include <cstddef>
#include <vector>

#include "gcf/matrix.hpp"

namespace gcf {

// Activations of a backbone's last convolution layer for one video, plus the
// gradient of a class score with respect to them. Values are stored flat,
// channel-last: index (t, i, j, k) = ((t*Hp + i)*Wp + j)*Lp + k.
struct FeatureMapVolume {
    std::size_t T = 0;   // frames (or clips)
    std::size_t Hp = 0;  // spatial height
    std::size_t Wp = 0;  // spatial width
    std::size_t Lp = 0;  // channels
    std::vector<double> values;
    std::vector<double> grad;  // empty when absent

    bool has_grad() const noexcept { return !grad.empty(); }
    std::size_t flat_size() const noexcept { return T * Hp * Wp * Lp; }
    std::size_t index(std::size_t t, std::size_t i, std::size_t j, std::size_t k) const noexcept {
        return ((t * Hp + i) * Wp + j) * Lp + k;
    }

    void validate() const;
};

// Neuron importance weights: alpha(t, k) = mean over the spatial grid of the
// gradient at (t, ., ., k). Returns T x Lp.
Matrix grad_cam_weights(const FeatureMapVolume& vol);

// Per-frame localization maps M_t(i, j) = relu(sum_k alpha(t,k) * A(t,i,j,k)),
// one Hp x Wp matrix per frame. All outputs non-negative.
std::vector<Matrix> grad_cam_map(const FeatureMapVolume& vol, const Matrix& alpha);

// Bilinear resize with corner alignment: source coordinate of output index i
// is i*(in-1)/(out-1); a size-1 output axis samples index 0. Output values
// stay within the input's [min, max].
Matrix resize_map(const Matrix& map, std::size_t out_h, std::size_t out_w);

}  // namespace gcf
