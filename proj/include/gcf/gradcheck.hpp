#pragma once

#include <functional>

#include "gcf/matrix.hpp"

namespace gcf {

// Central-difference gradient of a scalar function: one entry per coordinate,
// (f(p + h e_i) - f(p - h e_i)) / 2h. Rejects non-finite function values,
// reporting the offending coordinate.
Vector finite_difference_grad(const std::function<double(const Vector&)>& f, const Vector& p,
                              double h);

// Guarded relative error used by every gradient check:
//   |a - n| / max(|a|, |n|, floor)
// The floor absorbs central-difference noise (~1e-9 absolute for well-scaled
// losses) on near-zero coordinates; any absolute deviation above
// floor * tolerance is still caught.
double relative_error(double analytic, double numeric, double floor = 1e-2);

}  // namespace gcf
