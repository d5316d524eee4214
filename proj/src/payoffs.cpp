#include "numsmooth/payoffs.hpp"

#include <numeric>
#include <stdexcept>

namespace numsmooth {

Payoff Payoff::call(double strike) { return Payoff{PayoffKind::Call, strike, {}}; }

Payoff Payoff::digital(double strike) { return Payoff{PayoffKind::Digital, strike, {}}; }

Payoff Payoff::basket_call(std::span<const double> weights, double strike) {
    if (weights.empty()) throw std::invalid_argument("basket_call: weights must be non-empty");
    return Payoff{PayoffKind::BasketCall, strike, {weights.begin(), weights.end()}};
}

Payoff Payoff::density_point(double u) { return Payoff{PayoffKind::DensityPoint, u, {}}; }

namespace {

double inner_phi(const Payoff& p, std::span<const double> terminal) {
    switch (p.kind) {
        case PayoffKind::Call:
        case PayoffKind::Digital:
            return terminal[0] - p.level;
        case PayoffKind::BasketCall: {
            if (terminal.size() != p.weights.size())
                throw std::invalid_argument("payoff: dimension mismatch");
            double basket = 0.0;
            for (std::size_t j = 0; j < p.weights.size(); ++j) basket += p.weights[j] * terminal[j];
            return basket - p.level;
        }
        case PayoffKind::DensityPoint:
            return terminal[0] - p.level;
    }
    throw std::logic_error("payoff: unknown kind");
}

} // namespace

double evaluate(const Payoff& p, std::span<const double> terminal) {
    if (p.kind == PayoffKind::DensityPoint)
        throw std::invalid_argument("payoff: density point has no pathwise evaluation");
    const double phi = inner_phi(p, terminal);
    switch (p.kind) {
        case PayoffKind::Call:
        case PayoffKind::BasketCall:
            return phi > 0.0 ? phi : 0.0;
        case PayoffKind::Digital:
            // Boundary included: indicator(phi >= 0).
            return phi >= 0.0 ? 1.0 : 0.0;
        default:
            throw std::logic_error("payoff: unknown kind");
    }
}

Residual phi_and_root_residual(const Payoff& p, std::span<const double> terminal,
                               std::span<const double> dterminal_dy1) {
    Residual r;
    r.value = inner_phi(p, terminal);
    switch (p.kind) {
        case PayoffKind::Call:
        case PayoffKind::Digital:
        case PayoffKind::DensityPoint:
            r.dvalue_dy1 = dterminal_dy1[0];
            break;
        case PayoffKind::BasketCall: {
            double acc = 0.0;
            for (std::size_t j = 0; j < p.weights.size(); ++j)
                acc += p.weights[j] * dterminal_dy1[j];
            r.dvalue_dy1 = acc;
            break;
        }
    }
    return r;
}

} // namespace numsmooth
