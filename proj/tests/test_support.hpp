#pragma once

#include <cmath>
#include <random>
#include <vector>

namespace testsupport {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
}

// E[max(a Z + b, 0)] for Z standard normal.
inline double truncated_affine_mean(double a, double b) {
    if (a == 0.0) return std::max(b, 0.0);
    const double z0 = -b / std::abs(a);
    return std::abs(a) * normal_pdf(z0) + b * normal_cdf(-z0);
}

inline double black_scholes_call(double S0, double K, double sigma, double T) {
    const double sq = sigma * std::sqrt(T);
    const double d1 = (std::log(S0 / K) + 0.5 * sigma * sigma * T) / sq;
    return S0 * normal_cdf(d1) - K * normal_cdf(d1 - sq);
}

inline double black_scholes_digital(double S0, double K, double sigma, double T) {
    const double sq = sigma * std::sqrt(T);
    const double d2 = (std::log(S0 / K) - 0.5 * sigma * sigma * T) / sq;
    return normal_cdf(d2);
}

inline double lognormal_pdf(double x, double mu, double sigma) {
    const double z = (std::log(x) - mu) / sigma;
    return std::exp(-0.5 * z * z) / (x * sigma * std::sqrt(2.0 * 3.14159265358979323846));
}

inline std::vector<double> random_normals(std::size_t n, unsigned seed) {
    std::mt19937_64 eng(seed);
    std::normal_distribution<double> normal;
    std::vector<double> out(n);
    for (auto& v : out) v = normal(eng);
    return out;
}

} // namespace testsupport
