#pragma once

#include "numsmooth/models.hpp"
#include "numsmooth/smoothing.hpp"

namespace numsmooth {

struct DensityValue {
    RootStatus status = RootStatus::Failed;
    double value = 0.0;
};

// Pointwise density sample at u: the conditional expectation with respect to
// the smoothing coordinate is exact here, phi(y*) * dy*/du with
// dy*/du = 1 / (dX_T/dy at y*) by the implicit function theorem. A derivative
// at or below the floor signals a monotonicity breach and fails the sample;
// no root within the bracket means the point is unreachable and the
// conditional density is zero.
inline constexpr double kDensityDerivativeFloor = 1e-12;

DensityValue density_sample_value(const SmoothingPlan& plan, const ConditionedTerminal& terminal,
                                  double u);

} // namespace numsmooth
