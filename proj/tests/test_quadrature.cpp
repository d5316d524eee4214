#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "numsmooth/quadrature.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

using namespace numsmooth;

namespace {

// Moments of the weight functions: E[Z^k] = (k-1)!! for even k (0 for odd),
// and integral of x^k e^-x = k!.
double hermite_moment(int k) {
    if (k % 2 == 1) return 0.0;
    double acc = 1.0;
    for (int j = k - 1; j > 1; j -= 2) acc *= j;
    return acc;
}

double laguerre_moment(int k) {
    double acc = 1.0;
    for (int j = 2; j <= k; ++j) acc *= j;
    return acc;
}

double apply(const QuadRule1D& rule, int degree) {
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i)
        acc += rule.weights[i] * std::pow(rule.nodes[i], degree);
    return acc;
}

} // namespace

TEST_CASE("hermite small rules match hand-solved moment equations") {
    const QuadRule1D& r1 = gauss_hermite(1);
    CHECK(r1.nodes[0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(r1.weights[0] == doctest::Approx(1.0).epsilon(1e-14));

    const QuadRule1D& r2 = gauss_hermite(2);
    CHECK(r2.nodes[0] == doctest::Approx(-1.0).epsilon(1e-13));
    CHECK(r2.nodes[1] == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(r2.weights[0] == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(r2.weights[1] == doctest::Approx(0.5).epsilon(1e-13));

    const QuadRule1D& r3 = gauss_hermite(3);
    CHECK(r3.nodes[0] == doctest::Approx(-std::sqrt(3.0)).epsilon(1e-13));
    CHECK(r3.nodes[1] == 0.0);
    CHECK(r3.nodes[2] == doctest::Approx(std::sqrt(3.0)).epsilon(1e-13));
    CHECK(r3.weights[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
    CHECK(r3.weights[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
    CHECK(r3.weights[2] == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
}

TEST_CASE("laguerre small rules match hand-solved moment equations") {
    const QuadRule1D& r1 = gauss_laguerre(1);
    CHECK(r1.nodes[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r1.weights[0] == doctest::Approx(1.0).epsilon(1e-14));

    const QuadRule1D& r2 = gauss_laguerre(2);
    const double s2 = std::sqrt(2.0);
    CHECK(r2.nodes[0] == doctest::Approx(2.0 - s2).epsilon(1e-13));
    CHECK(r2.nodes[1] == doctest::Approx(2.0 + s2).epsilon(1e-13));
    CHECK(r2.weights[0] == doctest::Approx((2.0 + s2) / 4.0).epsilon(1e-13));
    CHECK(r2.weights[1] == doctest::Approx((2.0 - s2) / 4.0).epsilon(1e-13));

    CHECK(apply(gauss_laguerre(4), 3) == doctest::Approx(6.0).epsilon(1e-13));
}

TEST_CASE("polynomial exactness up to degree 2n-1 for n in 1..20") {
    for (int n = 1; n <= 20; ++n) {
        const QuadRule1D& h = gauss_hermite(n);
        const QuadRule1D& l = gauss_laguerre(n);
        for (int k = 0; k <= 2 * n - 1; ++k) {
            const double hm = hermite_moment(k);
            const double got_h = apply(h, k);
            if (hm == 0.0)
                CHECK(std::abs(got_h) <= 1e-12 * hermite_moment(k % 2 ? k + 1 : k));
            else
                CHECK(got_h == doctest::Approx(hm).epsilon(1e-12));
            CHECK(apply(l, k) == doctest::Approx(laguerre_moment(k)).epsilon(1e-12));
        }
    }
}

TEST_CASE("rule structure: increasing nodes, positive weights, unit mass, symmetry") {
    for (int n : {1, 2, 3, 5, 8, 13, 20, 33, 64, 128}) {
        const QuadRule1D& h = gauss_hermite(n);
        const QuadRule1D& l = gauss_laguerre(n);
        double hsum = 0.0, lsum = 0.0;
        for (int i = 0; i < n; ++i) {
            CHECK(h.weights[i] > 0.0);
            CHECK(l.weights[i] > 0.0);
            CHECK(l.nodes[i] > 0.0);
            if (i > 0) {
                CHECK(h.nodes[i] > h.nodes[i - 1]);
                CHECK(l.nodes[i] > l.nodes[i - 1]);
            }
            hsum += h.weights[i];
            lsum += l.weights[i];
            CHECK(h.nodes[i] == -h.nodes[n - 1 - i]);
            CHECK(h.weights[i] == h.weights[n - 1 - i]);
        }
        CHECK(hsum == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(lsum == doctest::Approx(1.0).epsilon(1e-13));
    }
}

TEST_CASE("cache returns bitwise identical arrays for repeated requests") {
    const QuadRule1D& a = gauss_hermite(17);
    const QuadRule1D& b = gauss_hermite(17);
    CHECK(&a == &b);
    CHECK(std::memcmp(a.nodes.data(), b.nodes.data(), a.size() * sizeof(double)) == 0);

    const QuadRule1D& la = gauss_laguerre(9);
    const QuadRule1D& lb = gauss_laguerre(9);
    CHECK(&la == &lb);
}

TEST_CASE("node count limits") {
    CHECK_THROWS_AS(gauss_hermite(0), std::invalid_argument);
    CHECK_THROWS_AS(gauss_laguerre(0), std::invalid_argument);
    CHECK_THROWS_AS(gauss_hermite(129), std::invalid_argument);
    CHECK_NOTHROW(gauss_hermite(128));
}
