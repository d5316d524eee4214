#pragma once

#include <span>
#include <vector>

namespace numsmooth {

enum class PayoffKind { Call, Digital, BasketCall, DensityPoint };

// Payoff functional g together with its inner function phi. The root of
// phi in the smoothing coordinate is the discontinuity location; kappa is the
// payoff regularity index (0 for digital/density, 1 for call).
struct Payoff {
    PayoffKind kind;
    double level;                // strike K, or evaluation point u for DensityPoint
    std::vector<double> weights; // basket weights, empty otherwise

    static Payoff call(double strike);
    static Payoff digital(double strike);
    static Payoff basket_call(std::span<const double> weights, double strike);
    static Payoff density_point(double u);

    int regularity() const { return kind == PayoffKind::Call || kind == PayoffKind::BasketCall ? 1 : 0; }
};

// Pathwise payoff value g(x_T). DensityPoint has no pathwise evaluation and
// throws; it is handled by the density estimator.
double evaluate(const Payoff& p, std::span<const double> terminal);

// phi(x_T) and its derivative along the smoothing coordinate, chained from
// the terminal sensitivity. The root of the residual in y1 is the
// discontinuity location y1*.
struct Residual {
    double value;
    double dvalue_dy1;
};

Residual phi_and_root_residual(const Payoff& p, std::span<const double> terminal,
                               std::span<const double> dterminal_dy1);

} // namespace numsmooth
