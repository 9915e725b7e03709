#include "gcf/gradcam.hpp"

#include <algorithm>
#include <cmath>

#include "gcf/error.hpp"

namespace gcf {

void FeatureMapVolume::validate() const {
    require(T >= 1 && Hp >= 1 && Wp >= 1 && Lp >= 1, "validation",
            "feature volume: all dimensions must be at least 1");
    require(values.size() == flat_size(), "shape_mismatch",
            "feature volume: value count does not match T*Hp*Wp*Lp");
    for (double v : values) {
        require(std::isfinite(v), "non_finite", "feature volume: non-finite activation");
    }
    if (!grad.empty()) {
        require(grad.size() == flat_size(), "shape_mismatch",
                "feature volume: gradient count does not match T*Hp*Wp*Lp");
        for (double v : grad) {
            require(std::isfinite(v), "non_finite", "feature volume: non-finite gradient");
        }
    }
}

Matrix grad_cam_weights(const FeatureMapVolume& vol) {
    vol.validate();
    require(vol.has_grad(), "validation", "grad_cam_weights: gradient volume is missing");

    Matrix alpha(vol.T, vol.Lp);
    const double inv_z = 1.0 / static_cast<double>(vol.Hp * vol.Wp);
    for (std::size_t t = 0; t < vol.T; ++t) {
        for (std::size_t i = 0; i < vol.Hp; ++i) {
            for (std::size_t j = 0; j < vol.Wp; ++j) {
                const double* g = vol.grad.data() + vol.index(t, i, j, 0);
                double* a = alpha.row(t);
                for (std::size_t k = 0; k < vol.Lp; ++k) a[k] += g[k];
            }
        }
        for (std::size_t k = 0; k < vol.Lp; ++k) alpha(t, k) *= inv_z;
    }
    return alpha;
}

std::vector<Matrix> grad_cam_map(const FeatureMapVolume& vol, const Matrix& alpha) {
    vol.validate();
    require(alpha.rows() == vol.T && alpha.cols() == vol.Lp, "shape_mismatch",
            "grad_cam_map: alpha must be T x Lp");

    std::vector<Matrix> maps;
    maps.reserve(vol.T);
    for (std::size_t t = 0; t < vol.T; ++t) {
        Matrix m(vol.Hp, vol.Wp);
        for (std::size_t i = 0; i < vol.Hp; ++i) {
            for (std::size_t j = 0; j < vol.Wp; ++j) {
                const double* a = vol.values.data() + vol.index(t, i, j, 0);
                double acc = 0.0;
                for (std::size_t k = 0; k < vol.Lp; ++k) acc += alpha(t, k) * a[k];
                m(i, j) = acc > 0.0 ? acc : 0.0;
            }
        }
        maps.push_back(std::move(m));
    }
    return maps;
}

Matrix resize_map(const Matrix& map, std::size_t out_h, std::size_t out_w) {
    require(!map.empty(), "empty_input", "resize_map: empty input");
    require(out_h >= 1 && out_w >= 1, "validation", "resize_map: output dims must be >= 1");

    const std::size_t in_h = map.rows(), in_w = map.cols();
    auto src = [](std::size_t i, std::size_t out, std::size_t in) {
        if (out == 1 || in == 1) return 0.0;
        return static_cast<double>(i) * static_cast<double>(in - 1) /
               static_cast<double>(out - 1);
    };

    Matrix out(out_h, out_w);
    for (std::size_t i = 0; i < out_h; ++i) {
        const double y = src(i, out_h, in_h);
        const std::size_t y0 = static_cast<std::size_t>(y);
        const std::size_t y1 = std::min(y0 + 1, in_h - 1);
        const double fy = y - static_cast<double>(y0);
        for (std::size_t j = 0; j < out_w; ++j) {
            const double x = src(j, out_w, in_w);
            const std::size_t x0 = static_cast<std::size_t>(x);
            const std::size_t x1 = std::min(x0 + 1, in_w - 1);
            const double fx = x - static_cast<double>(x0);
            const double top = map(y0, x0) * (1.0 - fx) + map(y0, x1) * fx;
            const double bottom = map(y1, x0) * (1.0 - fx) + map(y1, x1) * fx;
            out(i, j) = top * (1.0 - fy) + bottom * fy;
        }
    }
    return out;
}

}  // namespace gcf
