#include "numsmooth/asgq.hpp"

#include "numsmooth/quadrature.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace numsmooth {

int asgq_nodes_per_level(int base1_level) {
    if (base1_level < 1) throw std::invalid_argument("asgq: level must be >= 1");
    return base1_level == 1 ? 1 : (1 << (base1_level - 1)) + 1;
}

std::size_t NodeValueCache::VecHash::operator()(const std::vector<double>& v) const {
    std::uint64_t h = 1469598103934665603ULL;
    for (double x : v) {
        const std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
        h ^= bits;
        h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
}

long long NodeValueCache::ensure(const std::vector<std::vector<double>>& points,
                                 const Integrand& f, bool parallel) {
    std::vector<const std::vector<double>*> missing;
    missing.reserve(points.size());
    for (const auto& pt : points)
        if (values_.find(pt) == values_.end()) missing.push_back(&pt);
    // Deduplicate while keeping first occurrence order.
    std::vector<const std::vector<double>*> todo;
    todo.reserve(missing.size());
    for (const auto* pt : missing)
        if (values_.emplace(*pt, 0.0).second) todo.push_back(pt);

    std::vector<double> results(todo.size());
    const long long n = static_cast<long long>(todo.size());
#pragma omp parallel for schedule(dynamic, 4) if (parallel && n > 1)
    for (long long i = 0; i < n; ++i)
        results[static_cast<std::size_t>(i)] = f(std::span<const double>(*todo[i]));

    for (std::size_t i = 0; i < todo.size(); ++i) {
        const double v = results[i];
        if (!std::isfinite(v)) {
            std::ostringstream oss;
            oss << "asgq: integrand returned a non-finite value at node (";
            for (std::size_t j = 0; j < todo[i]->size(); ++j)
                oss << (j ? ", " : "") << (*todo[i])[j];
            oss << ")";
            throw std::runtime_error(oss.str());
        }
        values_[*todo[i]] = v;
    }
    return n;
}

double NodeValueCache::lookup(const std::vector<double>& point) const {
    auto it = values_.find(point);
    if (it == values_.end()) throw std::logic_error("asgq: node value missing from cache");
    return it->second;
}

namespace {

// Tensor quadrature with m(gamma_i + 1) Hermite nodes per axis, evaluated
// through the shared cache; node sums run in lexicographic node order.
double tensor_quadrature(const MultiIndex& gamma, const Integrand& f, NodeValueCache& cache,
                         long long& evaluations, bool parallel) {
    const int dim = static_cast<int>(gamma.size());
    std::vector<const QuadRule1D*> rules(dim);
    std::size_t total = 1;
    for (int i = 0; i < dim; ++i) {
        rules[i] = &gauss_hermite(asgq_nodes_per_level(gamma[i] + 1));
        total *= rules[i]->size();
    }

    std::vector<std::vector<double>> points(total, std::vector<double>(dim));
    std::vector<std::size_t> idx(dim, 0);
    for (std::size_t p = 0; p < total; ++p) {
        for (int i = 0; i < dim; ++i) points[p][i] = rules[i]->nodes[idx[i]];
        for (int i = dim - 1; i >= 0; --i) {
            if (++idx[i] < rules[i]->size()) break;
            idx[i] = 0;
        }
    }

    evaluations += cache.ensure(points, f, parallel);

    double acc = 0.0;
    std::fill(idx.begin(), idx.end(), 0);
    for (std::size_t p = 0; p < total; ++p) {
        double w = 1.0;
        for (int i = 0; i < dim; ++i) w *= rules[i]->weights[idx[i]];
        acc += w * cache.lookup(points[p]);
        for (int i = dim - 1; i >= 0; --i) {
            if (++idx[i] < rules[i]->size()) break;
            idx[i] = 0;
        }
    }
    return acc;
}

double delta_work(const MultiIndex& beta) {
    double w = 1.0;
    for (int b : beta) w *= asgq_nodes_per_level(b + 1);
    return w;
}

} // namespace

double delta_quadrature(const MultiIndex& beta, const Integrand& f, NodeValueCache& cache,
                        long long& evaluations, bool parallel) {
    const int dim = static_cast<int>(beta.size());
    std::vector<int> positive;
    for (int i = 0; i < dim; ++i)
        if (beta[i] > 0) positive.push_back(i);
    if (positive.size() > 30) throw std::invalid_argument("asgq: delta corner set too large");

    double acc = 0.0;
    MultiIndex gamma = beta;
    const std::uint32_t corners = 1u << positive.size();
    for (std::uint32_t mask = 0; mask < corners; ++mask) {
        gamma = beta;
        int parity = 0;
        for (std::size_t b = 0; b < positive.size(); ++b)
            if (mask & (1u << b)) {
                gamma[positive[b]] -= 1;
                parity ^= 1;
            }
        const double q = tensor_quadrature(gamma, f, cache, evaluations, parallel);
        acc += parity ? -q : q;
    }
    return acc;
}

bool IndexSet::downward_closed() const {
    for (const auto& [beta, info] : accepted) {
        for (std::size_t i = 0; i < beta.size(); ++i) {
            if (beta[i] == 0) continue;
            MultiIndex back = beta;
            back[i] -= 1;
            if (accepted.find(back) == accepted.end()) return false;
        }
    }
    return true;
}

AdaptResult asgq_adapt(const ASGQConfig& config, const Integrand& f) {
    if (config.dim < 1) throw std::invalid_argument("asgq_adapt: dim must be positive");

    AdaptResult result;
    NodeValueCache cache(config.dim);

    auto evaluate_delta = [&](const MultiIndex& beta) {
        const double dq = delta_quadrature(beta, f, cache, result.evaluations, config.parallel);
        return DeltaInfo{dq, std::abs(dq), delta_work(beta)};
    };

    auto active_sum = [&]() {
        double s = 0.0;
        for (const auto& [beta, info] : result.set.active) s += info.error_estimate;
        return s;
    };

    MultiIndex root(config.dim, 0);
    result.set.active.emplace(root, evaluate_delta(root));

    bool expanded_root = false;
    while (!result.set.active.empty()) {
        // The frontier sum is only meaningful once the root has been expanded.
        if (expanded_root && active_sum() <= config.tol) {
            result.converged = true;
            break;
        }
        if (result.evaluations >= config.max_evals) break;
        expanded_root = true;

        // Largest profit; ties resolve to the lexicographically smallest
        // index because the map iterates in lexicographic order.
        auto best = result.set.active.begin();
        double best_profit = best->second.error_estimate / best->second.work;
        for (auto it = std::next(result.set.active.begin()); it != result.set.active.end(); ++it) {
            const double profit = it->second.error_estimate / it->second.work;
            if (profit > best_profit) {
                best = it;
                best_profit = profit;
            }
        }

        const MultiIndex chosen = best->first;
        result.set.accepted.emplace(chosen, best->second);
        result.set.active.erase(best);

        for (int i = 0; i < config.dim; ++i) {
            if (result.evaluations >= config.max_evals) break;
            MultiIndex cand = chosen;
            cand[i] += 1;
            if (cand[i] > config.max_level) continue;
            bool admissible = true;
            for (int k = 0; k < config.dim && admissible; ++k) {
                if (cand[k] == 0) continue;
                MultiIndex back = cand;
                back[k] -= 1;
                if (result.set.accepted.find(back) == result.set.accepted.end()) admissible = false;
            }
            if (!admissible || result.set.active.count(cand)) continue;
            result.set.active.emplace(cand, evaluate_delta(cand));
        }
    }

    result.error_indicator = active_sum();
    if (result.set.active.empty()) result.converged = true;
    for (const auto& [beta, info] : result.set.accepted) result.estimate += info.delta_value;
    return result;
}

} // namespace numsmooth
