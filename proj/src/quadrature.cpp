#include "numsmooth/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <map>
#include <mutex>
#include <stdexcept>

namespace numsmooth {

namespace {

// Orthonormal three-term recurrence values p_0..p_n at x, plus the derivative
// of p_n. For the probabilists' Hermite family b_k = sqrt(k), a_k = 0 and
// p_n' = sqrt(n) p_{n-1}; for Laguerre (alpha = 0) a_k = 2k+1, b_k = k and
// p_n' = n (p_n - p_{n-1}) / x.
void orthonormal_values(QuadKind kind, int n, double x, std::vector<double>& p, double& dpn) {
    p.resize(n + 1);
    p[0] = 1.0;
    if (kind == QuadKind::HermiteProbabilists) {
        if (n >= 1) p[1] = x;
        for (int k = 1; k < n; ++k)
            p[k + 1] = (x * p[k] - std::sqrt(static_cast<double>(k)) * p[k - 1]) /
                       std::sqrt(static_cast<double>(k + 1));
        dpn = n >= 1 ? std::sqrt(static_cast<double>(n)) * p[n - 1] : 0.0;
    } else {
        if (n >= 1) p[1] = 1.0 - x;
        for (int k = 1; k < n; ++k)
            p[k + 1] = ((2.0 * k + 1.0 - x) * p[k] - k * p[k - 1]) / (k + 1.0);
        dpn = n >= 1 ? n * (p[n] - p[n - 1]) / x : 0.0;
    }
}

// Golub-Welsch nodes from the symmetric tridiagonal Jacobi matrix, polished
// by Newton steps on the orthonormal polynomial; weights from the
// Christoffel identity w_i = mu0 / sum_k p_k(x_i)^2 (mu0 = 1 for both weight
// functions).
QuadRule1D golub_welsch(QuadKind kind, int n) {
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    if (kind == QuadKind::HermiteProbabilists) {
        for (int k = 1; k < n; ++k) {
            const double b = std::sqrt(static_cast<double>(k));
            jacobi(k - 1, k) = b;
            jacobi(k, k - 1) = b;
        }
    } else {
        for (int k = 0; k < n; ++k) jacobi(k, k) = 2.0 * k + 1.0;
        for (int k = 1; k < n; ++k) {
            const double b = static_cast<double>(k);
            jacobi(k - 1, k) = b;
            jacobi(k, k - 1) = b;
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("quadrature: eigen decomposition failed");

    QuadRule1D rule;
    rule.kind = kind;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    std::vector<double> p;
    for (int i = 0; i < n; ++i) {
        double x = solver.eigenvalues()(i);
        for (int step = 0; step < 3; ++step) {
            double dpn = 0.0;
            orthonormal_values(kind, n, x, p, dpn);
            if (dpn == 0.0) break;
            const double dx = p[n] / dpn;
            x -= dx;
            if (std::abs(dx) < 1e-15 * (1.0 + std::abs(x))) break;
        }
        rule.nodes[i] = x;
        double dpn = 0.0;
        orthonormal_values(kind, n, x, p, dpn);
        double norm2 = 0.0;
        for (int k = 0; k < n; ++k) norm2 += p[k] * p[k];
        rule.weights[i] = 1.0 / norm2;
    }

    // Enforce exact symmetry of the Hermite rule (the midpoint of an odd rule
    // is exactly zero).
    if (kind == QuadKind::HermiteProbabilists) {
        const int m = n / 2;
        for (int i = 0; i < m; ++i) {
            const double x = 0.5 * (rule.nodes[n - 1 - i] - rule.nodes[i]);
            rule.nodes[i] = -x;
            rule.nodes[n - 1 - i] = x;
            const double w = 0.5 * (rule.weights[i] + rule.weights[n - 1 - i]);
            rule.weights[i] = w;
            rule.weights[n - 1 - i] = w;
        }
        if (n % 2 == 1) rule.nodes[m] = 0.0;
    }
    return rule;
}

const QuadRule1D& cached_rule(QuadKind kind, int n) {
    if (n < 1 || n > kMaxQuadNodes)
        throw std::invalid_argument("quadrature: node count must be in [1, 128]");

    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::unique_ptr<QuadRule1D>> cache;

    const std::pair<int, int> key{static_cast<int>(kind), n};
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_unique<QuadRule1D>(golub_welsch(kind, n))).first;
    return *it->second;
}

} // namespace

const QuadRule1D& gauss_hermite(int n) { return cached_rule(QuadKind::HermiteProbabilists, n); }

const QuadRule1D& gauss_laguerre(int n) { return cached_rule(QuadKind::Laguerre, n); }

} // namespace numsmooth
