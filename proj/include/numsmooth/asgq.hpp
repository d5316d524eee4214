#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace numsmooth {

// Multi-index over the quadrature levels, stored base-0 (level k means
// m(k+1) nodes in the reported base-1 convention).
using MultiIndex = std::vector<int>;

// Nodes per level: m(1) = 1, m(k) = 2^{k-1} + 1.
int asgq_nodes_per_level(int base1_level);

using Integrand = std::function<double(std::span<const double>)>;

// Shared cache of integrand values keyed by the exact node coordinates.
class NodeValueCache {
public:
    explicit NodeValueCache(int dim) : dim_(dim) {}

    // Evaluates f at the requested points (cache misses only); misses are
    // computed in parallel and summed back in index order by the caller.
    // Returns the number of fresh evaluations.
    long long ensure(const std::vector<std::vector<double>>& points, const Integrand& f,
                     bool parallel);

    double lookup(const std::vector<double>& point) const;
    std::size_t size() const { return values_.size(); }

private:
    struct VecHash {
        std::size_t operator()(const std::vector<double>& v) const;
    };
    int dim_;
    std::unordered_map<std::vector<double>, double, VecHash> values_;
};

// First/mixed difference of tensor quadratures: inclusion-exclusion over the
// corner set {beta - e_S : S subset of {i : beta_i > 0}}.
double delta_quadrature(const MultiIndex& beta, const Integrand& f, NodeValueCache& cache,
                        long long& evaluations, bool parallel = true);

struct ASGQConfig {
    int dim = 1;
    double tol = 1e-8;            // stop when the active contribution sum is below this
    long long max_evals = 1000000;
    int max_level = 6;            // base-0 cap per dimension (m up to 65 nodes)
    bool parallel = true;
};

struct DeltaInfo {
    double delta_value;    // contribution to the estimate
    double error_estimate; // |delta_value|
    double work;           // product of tensor rule sizes
};

struct IndexSet {
    std::map<MultiIndex, DeltaInfo> accepted;
    std::map<MultiIndex, DeltaInfo> active;

    bool downward_closed() const;
};

struct AdaptResult {
    double estimate = 0.0;        // sum of accepted contributions
    double error_indicator = 0.0; // sum of |active| contributions
    long long evaluations = 0;
    bool converged = false;
    IndexSet set;
};

// Dimension-adaptive sparse quadrature: greedily accepts the active index
// with the largest |contribution|/work, extending the frontier with its
// admissible forward neighbors, until the active contributions sum below tol
// or the evaluation budget runs out. Deterministic: ties break on the
// lexicographically smallest index and node sums are accumulated in fixed
// order, so the result does not depend on the thread count.
AdaptResult asgq_adapt(const ASGQConfig& config, const Integrand& f);

} // namespace numsmooth
