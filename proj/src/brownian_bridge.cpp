#include "numsmooth/brownian_bridge.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace numsmooth {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

TimeGrid::TimeGrid(double T, int N) : horizon(T), steps(N) {
    if (!(T > 0.0)) throw std::invalid_argument("TimeGrid: horizon must be positive");
    if (!is_power_of_two(N)) throw std::invalid_argument("TimeGrid: steps must be a power of two");
}

void bridge_increments(std::span<const double> z, const TimeGrid& grid,
                       std::span<double> increments) {
    const int n = grid.steps;
    if (static_cast<int>(z.size()) != n || static_cast<int>(increments.size()) != n)
        throw std::invalid_argument("bridge_increments: size mismatch");

    if (n == 1) {
        increments[0] = std::sqrt(grid.horizon) * z[0];
        return;
    }

    // Path values on the grid, filled by recursive midpoint displacement.
    // increments is used as scratch for W(t_1..t_N); W(t_0) = 0.
    std::vector<double> w(static_cast<std::size_t>(n) + 1);
    w[0] = 0.0;
    w[n] = std::sqrt(grid.horizon) * z[0];
    std::size_t next = 1;
    const double dt = grid.dt();
    for (int len = n; len >= 2; len /= 2) {
        const double half_std = std::sqrt(0.25 * len * dt);
        for (int start = 0; start < n; start += len) {
            const int mid = start + len / 2;
            w[mid] = 0.5 * (w[start] + w[start + len]) + half_std * z[next++];
        }
    }
    for (int i = 0; i < n; ++i) increments[i] = w[i + 1] - w[i];
}

std::vector<double> bridge_increments(const GaussianVector& z, const TimeGrid& grid) {
    std::vector<double> out(z.size());
    bridge_increments(std::span<const double>(z.z), grid, std::span<double>(out));
    return out;
}

void bridge_increments_and_sensitivity(std::span<const double> z, const TimeGrid& grid,
                                       std::span<double> increments,
                                       std::span<double> dincrements_dz0) {
    bridge_increments(z, grid, increments);
    // W(t) = (t/sqrt(T)) z0 + bridge(t) with the bridge independent of z0,
    // so every increment carries the constant loading dt/sqrt(T).
    const double loading = grid.dt() / std::sqrt(grid.horizon);
    for (auto& v : dincrements_dz0) v = loading;
}

CorrelationStructure CorrelationStructure::identity(int d) {
    CorrelationStructure c;
    c.dim = d;
    c.rho.assign(static_cast<std::size_t>(d) * d, 0.0);
    c.chol.assign(static_cast<std::size_t>(d) * d, 0.0);
    for (int i = 0; i < d; ++i) {
        c.rho[static_cast<std::size_t>(i) * d + i] = 1.0;
        c.chol[static_cast<std::size_t>(i) * d + i] = 1.0;
    }
    return c;
}

CorrelationStructure CorrelationStructure::build(int d, std::span<const double> rho_rowmajor) {
    if (d < 1) throw std::invalid_argument("CorrelationStructure: dimension must be positive");
    if (rho_rowmajor.size() != static_cast<std::size_t>(d) * d)
        throw std::invalid_argument("CorrelationStructure: matrix size mismatch");

    Eigen::MatrixXd rho(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) rho(i, j) = rho_rowmajor[static_cast<std::size_t>(i) * d + j];

    if (!rho.isApprox(rho.transpose(), 1e-12))
        throw std::invalid_argument("CorrelationStructure: matrix must be symmetric");
    for (int i = 0; i < d; ++i)
        if (std::abs(rho(i, i) - 1.0) > 1e-12)
            throw std::invalid_argument("CorrelationStructure: diagonal must be one");

    Eigen::LLT<Eigen::MatrixXd> llt(rho);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("CorrelationStructure: matrix is not positive definite");
    const Eigen::MatrixXd lower = llt.matrixL();

    CorrelationStructure c;
    c.dim = d;
    c.rho.assign(rho_rowmajor.begin(), rho_rowmajor.end());
    c.chol.resize(static_cast<std::size_t>(d) * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) c.chol[static_cast<std::size_t>(i) * d + j] = lower(i, j);
    return c;
}

CorrelationStructure CorrelationStructure::uniform(int d, double offdiag) {
    std::vector<double> rho(static_cast<std::size_t>(d) * d, offdiag);
    for (int i = 0; i < d; ++i) rho[static_cast<std::size_t>(i) * d + i] = 1.0;
    return build(d, rho);
}

bool CorrelationStructure::is_identity() const {
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            if (rho[static_cast<std::size_t>(i) * dim + j] != (i == j ? 1.0 : 0.0)) return false;
    return true;
}

void correlate(std::span<const std::span<const double>> uncorrelated,
               const CorrelationStructure& corr,
               std::span<std::span<double>> correlated) {
    const int d = corr.dim;
    if (static_cast<int>(uncorrelated.size()) != d || static_cast<int>(correlated.size()) != d)
        throw std::invalid_argument("correlate: asset count mismatch");
    const std::size_t n = uncorrelated[0].size();
    for (int j = 0; j < d; ++j)
        if (uncorrelated[j].size() != n || correlated[j].size() != n)
            throw std::invalid_argument("correlate: step count mismatch");

    for (int j = d - 1; j >= 0; --j) {
        for (std::size_t t = 0; t < n; ++t) {
            double acc = 0.0;
            for (int i = 0; i <= j; ++i)
                acc += corr.chol[static_cast<std::size_t>(j) * d + i] * uncorrelated[i][t];
            correlated[j][t] = acc;
        }
    }
}

void coarsen_pairwise(std::span<const double> fine, std::span<double> coarse) {
    if (fine.size() != 2 * coarse.size())
        throw std::invalid_argument("coarsen_pairwise: size mismatch");
    for (std::size_t i = 0; i < coarse.size(); ++i) coarse[i] = fine[2 * i] + fine[2 * i + 1];
}

} // namespace numsmooth
