#include "numsmooth/density.hpp"

#include <cmath>
#include <stdexcept>

namespace numsmooth {

DensityValue density_sample_value(const SmoothingPlan& plan, const ConditionedTerminal& terminal,
                                  double u) {
    if (terminal.dim != 1)
        throw std::invalid_argument("density_sample_value: single-asset models only");

    const Payoff target = Payoff::density_point(u);
    const RootResult root = find_root(plan, terminal, target);
    if (root.status == RootStatus::Failed) return {RootStatus::Failed, 0.0};
    if (root.status == RootStatus::NoRoot) return {RootStatus::NoRoot, 0.0};

    double x = 0.0, dx = 0.0;
    terminal.eval(root.y1star, std::span<double>(&x, 1), std::span<double>(&dx, 1));
    if (!(dx > kDensityDerivativeFloor)) return {RootStatus::Failed, 0.0};

    constexpr double inv_sqrt_2pi = 0.3989422804014327;
    const double y = root.y1star;
    return {RootStatus::Found, inv_sqrt_2pi * std::exp(-0.5 * y * y) / dx};
}

} // namespace numsmooth
