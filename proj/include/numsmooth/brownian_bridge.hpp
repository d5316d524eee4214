#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace numsmooth {

// Dyadic time grid on [0, T].
struct TimeGrid {
    double horizon;  // T
    int steps;       // N, a power of two

    TimeGrid(double T, int N);

    double dt() const { return horizon / steps; }
};

bool is_power_of_two(int n);

// Standard normal factors for one driving Brownian motion, ordered so that
// z[0] is the coarsest factor (the terminal value W(T)/sqrt(T)) and the rest
// refine midpoints breadth-first.
struct GaussianVector {
    std::vector<double> z;

    std::size_t size() const { return z.size(); }
};

// Levy (midpoint) bridge: maps N iid standard normals to the N Brownian
// increments on the grid. The map M is linear and satisfies M M^T = dt * I,
// sum of increments = sqrt(T) * z[0], and d(increment)/d z[0] = dt/sqrt(T)
// for every step.
void bridge_increments(std::span<const double> z, const TimeGrid& grid,
                       std::span<double> increments);

std::vector<double> bridge_increments(const GaussianVector& z, const TimeGrid& grid);

// Increments plus their sensitivity with respect to the coarsest factor.
void bridge_increments_and_sensitivity(std::span<const double> z, const TimeGrid& grid,
                                       std::span<double> increments,
                                       std::span<double> dincrements_dz0);

// Asset correlation: rho must be symmetric positive definite with unit
// diagonal; chol is its lower Cholesky factor.
struct CorrelationStructure {
    int dim;
    std::vector<double> rho;  // row-major d x d
    std::vector<double> chol; // row-major lower-triangular factor

    static CorrelationStructure identity(int d);
    static CorrelationStructure build(int d, std::span<const double> rho_rowmajor);
    // Constant off-diagonal correlation.
    static CorrelationStructure uniform(int d, double offdiag);

    bool is_identity() const;
};

// Applies the Cholesky factor per time step: out[j][n] = sum_i chol[j][i] in[i][n].
// Rows are per-asset increment arrays of equal length.
void correlate(std::span<const std::span<const double>> uncorrelated,
               const CorrelationStructure& corr,
               std::span<std::span<double>> correlated);

// Coarse increments for the level coupling: pairwise sums of fine increments.
void coarsen_pairwise(std::span<const double> fine, std::span<double> coarse);

} // namespace numsmooth
