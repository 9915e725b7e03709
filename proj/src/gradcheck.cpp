#include "gcf/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "gcf/error.hpp"

namespace gcf {

Vector finite_difference_grad(const std::function<double(const Vector&)>& f, const Vector& p,
                              double h) {
    require(h > 0, "invalid_argument", "finite_difference_grad: step must be positive");
    Vector grad(p.size(), 0.0);
    Vector probe = p;
    for (std::size_t i = 0; i < p.size(); ++i) {
        probe[i] = p[i] + h;
        const double fp = f(probe);
        probe[i] = p[i] - h;
        const double fm = f(probe);
        probe[i] = p[i];
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            throw GcfError("non_finite", "finite_difference_grad: non-finite value at coordinate " +
                                             std::to_string(i));
        }
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

double relative_error(double analytic, double numeric, double floor) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
    return std::abs(analytic - numeric) / denom;
}

}  // namespace gcf
