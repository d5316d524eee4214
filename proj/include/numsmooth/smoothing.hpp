#pragma once

#include "numsmooth/models.hpp"
#include "numsmooth/payoffs.hpp"

#include <span>
#include <vector>

namespace numsmooth {

// Orthogonal rotation of the coarsest Brownian factors. The first row is the
// smoothing direction (1/sqrt(d)) * (1,...,1); the remaining rows come from
// Gram-Schmidt on the canonical basis. A^{-1} = A^T.
struct Rotation {
    int dim = 1;
    std::vector<double> mat; // row-major

    double at(int row, int col) const { return mat[static_cast<std::size_t>(row) * dim + col]; }

    // Loading of y1 on the coarse factor of asset j: A[0][j].
    double y1_loading(int j) const { return at(0, j); }

    // Conditioned offset of asset j's coarse factor from the d-1 rotated
    // coordinates (Y_2..Y_d): sum_i A[i][j] * rest[i-1].
    double z0_offset(int j, std::span<const double> rest) const;
};

Rotation build_rotation(int d);

struct SmoothingPlan {
    double tol_newton = 1e-6;
    int max_newton_iters = 50;
    int nq = 16;                     // pre-integration nodes per half-line
    double bracket_expansion = 2.0;  // geometric growth of the fallback bracket
};

enum class RootStatus { Found, NoRoot, Failed };

struct RootResult {
    RootStatus status = RootStatus::Failed;
    double y1star = 0.0;
    int iterations = 0;
    // sign of the residual slope at the root (Found) or of the residual
    // itself on the whole bracket (NoRoot).
    int sign = 0;
};

// Newton iteration from y=0 with derivative from the forward sensitivity;
// falls back to bracketed bisection on [-6, 6] expanded geometrically to
// [-12, 12]. No sign change over the widest bracket means no root (the
// integrand is smooth); multiple sign changes mean failure.
RootResult find_root(const SmoothingPlan& plan, const ConditionedTerminal& terminal,
                     const Payoff& payoff);

struct SmoothedValue {
    RootStatus status = RootStatus::Failed;
    double value = 0.0;
    int root_iterations = 0;
    int evaluations = 0;
};

// The pre-integrated (smoothed) integrand: the expectation of g over the
// smoothing coordinate with everything else fixed. With a root y1*, the two
// half-lines are integrated by Gauss-Laguerre after substituting
// y = y1* +/- t (integrand t -> g(X(y)) * phi(y) * e^t against weight e^-t);
// without a root a single Gauss-Hermite rule with 2*nq+1 nodes applies.
// Digital payoffs skip the half-line where the indicator vanishes.
SmoothedValue smoothed_integrand(const SmoothingPlan& plan, const ConditionedTerminal& terminal,
                                 const Payoff& payoff);

} // namespace numsmooth
