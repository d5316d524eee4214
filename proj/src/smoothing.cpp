#include "numsmooth/smoothing.hpp"

#include "numsmooth/quadrature.hpp"

#include <algorithm>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace numsmooth {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014327;
constexpr double kBracketStart = 6.0;
constexpr double kBracketMax = 12.0;
} // namespace

double Rotation::z0_offset(int j, std::span<const double> rest) const {
    double acc = 0.0;
    for (int i = 1; i < dim; ++i) acc += at(i, j) * rest[i - 1];
    return acc;
}

Rotation build_rotation(int d) {
    if (d < 1) throw std::invalid_argument("build_rotation: dimension must be positive");
    Rotation rot;
    rot.dim = d;
    rot.mat.assign(static_cast<std::size_t>(d) * d, 0.0);
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    for (int j = 0; j < d; ++j) rot.mat[j] = inv_sqrt_d;

    // Remaining rows: modified Gram-Schmidt over the canonical basis.
    int row = 1;
    std::vector<double> v(d);
    for (int cand = 0; cand < d && row < d; ++cand) {
        std::fill(v.begin(), v.end(), 0.0);
        v[cand] = 1.0;
        for (int r = 0; r < row; ++r) {
            double proj = 0.0;
            for (int j = 0; j < d; ++j) proj += rot.at(r, j) * v[j];
            for (int j = 0; j < d; ++j) v[j] -= proj * rot.at(r, j);
        }
        double norm2 = 0.0;
        for (double x : v) norm2 += x * x;
        if (norm2 < 1e-20) continue;
        const double inv_norm = 1.0 / std::sqrt(norm2);
        for (int j = 0; j < d; ++j) rot.mat[static_cast<std::size_t>(row) * d + j] = v[j] * inv_norm;
        ++row;
    }
    if (row != d) throw std::runtime_error("build_rotation: Gram-Schmidt failed");
    return rot;
}

namespace {

struct ResidualEval {
    double value;
    double slope;
    bool finite;
};

class ResidualFn {
public:
    ResidualFn(const ConditionedTerminal& terminal, const Payoff& payoff)
        : terminal_(terminal), payoff_(payoff), x_(terminal.dim), dx_(terminal.dim) {}

    ResidualEval operator()(double y) {
        terminal_.eval(y, x_, dx_);
        const Residual r = phi_and_root_residual(payoff_, x_, dx_);
        return {r.value, r.dvalue_dy1, std::isfinite(r.value) && std::isfinite(r.dvalue_dy1)};
    }

    double payoff_value(double y) {
        terminal_.eval(y, x_, dx_);
        return evaluate(payoff_, x_);
    }

private:
    const ConditionedTerminal& terminal_;
    const Payoff& payoff_;
    std::vector<double> x_;
    std::vector<double> dx_;
};

int sign_of(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

RootResult bracketed_root(const SmoothingPlan& plan, ResidualFn& fn, double tol_abs,
                          int iterations) {
    double b = kBracketStart;
    const double grow = plan.bracket_expansion > 1.0 ? plan.bracket_expansion : 2.0;
    for (;;) {
        ResidualEval lo = fn(-b);
        ResidualEval hi = fn(b);
        ++iterations;
        if (!lo.finite || !hi.finite) return {RootStatus::Failed, 0.0, iterations, 0};
        if (sign_of(lo.value) != sign_of(hi.value)) {
            // Scan for multiple sign changes (more than one discontinuity is
            // out of scope and must be reported, not silently mishandled).
            constexpr int kScan = 16;
            double prev_y = -b;
            double prev_r = lo.value;
            int changes = 0;
            double lo_y = 0.0, hi_y = 0.0, lo_r = 0.0;
            for (int i = 1; i <= kScan; ++i) {
                const double y = -b + 2.0 * b * i / kScan;
                const double r = (i == kScan) ? hi.value : fn(y).value;
                if (sign_of(prev_r) != sign_of(r)) {
                    ++changes;
                    lo_y = prev_y;
                    hi_y = y;
                    lo_r = prev_r;
                }
                prev_y = y;
                prev_r = r;
            }
            if (changes > 1) return {RootStatus::Failed, 0.0, iterations, 0};
            // Bisection on the bracketing subinterval, driven to a width far
            // below any tolerance in play so the located root does not move
            // when the tolerance changes.
            double slope = 0.0;
            for (int i = 0; i < 200; ++i) {
                const double mid = 0.5 * (lo_y + hi_y);
                const ResidualEval r = fn(mid);
                ++iterations;
                if (!r.finite) return {RootStatus::Failed, 0.0, iterations, 0};
                slope = r.slope;
                if (r.value == 0.0 || 0.5 * (hi_y - lo_y) < 1e-13 * (1.0 + std::abs(mid)))
                    return {RootStatus::Found, mid, iterations, sign_of(r.slope)};
                if (sign_of(r.value) == sign_of(lo_r))
                    lo_y = mid;
                else
                    hi_y = mid;
            }
            return {RootStatus::Found, 0.5 * (lo_y + hi_y), iterations, sign_of(slope)};
        }
        if (b >= kBracketMax) return {RootStatus::NoRoot, 0.0, iterations, sign_of(hi.value)};
        b = std::min(b * grow, kBracketMax);
    }
}

} // namespace

RootResult find_root(const SmoothingPlan& plan, const ConditionedTerminal& terminal,
                     const Payoff& payoff) {
    ResidualFn fn(terminal, payoff);
    const double scale = 1.0 + std::abs(payoff.level);
    const double tol_abs = plan.tol_newton * scale;

    // Converge on both the residual and the step size: the returned point is
    // then within O(tol_newton^2) of the root, so the pre-integration split
    // is insensitive to the tolerance itself.
    double y = 0.0;
    double last_step = std::numeric_limits<double>::infinity();
    int iterations = 0;
    for (int it = 0; it < plan.max_newton_iters; ++it) {
        const ResidualEval r = fn(y);
        ++iterations;
        if (!r.finite) return {RootStatus::Failed, 0.0, iterations, 0};
        const bool degenerate_slope = std::abs(r.slope) < 1e-300;
        if (std::abs(r.value) <= tol_abs && (last_step <= plan.tol_newton || degenerate_slope))
            return {RootStatus::Found, y, iterations, sign_of(r.slope)};
        if (degenerate_slope) break;
        const double step = r.value / r.slope;
        y -= step;
        last_step = std::abs(step);
        if (std::abs(y) > kBracketMax + 1.0) break;
    }
    return bracketed_root(plan, fn, tol_abs, iterations);
}

SmoothedValue smoothed_integrand(const SmoothingPlan& plan, const ConditionedTerminal& terminal,
                                 const Payoff& payoff) {
    if (plan.nq < 1) throw std::invalid_argument("smoothed_integrand: nq must be positive");
    const RootResult root = find_root(plan, terminal, payoff);

    SmoothedValue out;
    out.status = root.status;
    out.root_iterations = root.iterations;
    if (root.status == RootStatus::Failed) return out;

    ResidualFn fn(terminal, payoff);
    const bool digital = payoff.kind == PayoffKind::Digital;

    if (root.status == RootStatus::NoRoot) {
        // Case 1: the payoff is one-signed over the whole range; the
        // integrand is smooth and a single Hermite rule covers the line.
        const QuadRule1D& rule = gauss_hermite(std::min(2 * plan.nq + 1, kMaxQuadNodes));
        double acc = 0.0;
        for (std::size_t k = 0; k < rule.size(); ++k) {
            acc += rule.weights[k] * fn.payoff_value(rule.nodes[k]);
            ++out.evaluations;
        }
        out.value = acc;
        return out;
    }

    const double ystar = root.y1star;
    const QuadRule1D& rule = gauss_laguerre(plan.nq);
    double acc = 0.0;
    for (int side = 0; side < 2; ++side) {
        const double dir = side == 0 ? 1.0 : -1.0;
        if (digital) {
            // The indicator vanishes on one side of the root; skip it.
            const bool right_is_one = root.sign >= 0;
            if ((dir > 0.0) != right_is_one) continue;
        }
        for (std::size_t k = 0; k < rule.size(); ++k) {
            const double t = rule.nodes[k];
            const double y = ystar + dir * t;
            // Combined factor w_k * e^t * phi(y): the exponent t - y^2/2 is
            // bounded above, so this never overflows.
            const double coef = rule.weights[k] * std::exp(t - 0.5 * y * y) * kInvSqrt2Pi;
            acc += coef * fn.payoff_value(y);
            ++out.evaluations;
        }
    }
    out.value = acc;
    return out;
}

} // namespace numsmooth
