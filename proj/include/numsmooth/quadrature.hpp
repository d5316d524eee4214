#pragma once

#include <memory>
#include <vector>

namespace numsmooth {

enum class QuadKind { HermiteProbabilists, Laguerre };

// One-dimensional Gaussian quadrature rule.
//
// HermiteProbabilists: exact for polynomials of degree <= 2n-1 against the
// standard normal density (weights sum to 1).
// Laguerre: exact for polynomials of degree <= 2n-1 against exp(-x) on
// [0, inf) (weights sum to 1).
struct QuadRule1D {
    QuadKind kind;
    std::vector<double> nodes;   // strictly increasing
    std::vector<double> weights; // strictly positive

    std::size_t size() const { return nodes.size(); }
};

inline constexpr int kMaxQuadNodes = 128;

// Rules are computed via Golub-Welsch on the three-term recurrence and cached;
// repeated requests return the same immutable object.
const QuadRule1D& gauss_hermite(int n);
const QuadRule1D& gauss_laguerre(int n);

} // namespace numsmooth
