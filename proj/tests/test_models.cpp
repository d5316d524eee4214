#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "numsmooth/estimators.hpp"
#include "numsmooth/mlmc.hpp"
#include "numsmooth/models.hpp"
#include "numsmooth/payoffs.hpp"
#include "test_support.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

using namespace numsmooth;

namespace {

GaussianVector gv(std::vector<double> z) { return GaussianVector{std::move(z)}; }

} // namespace

TEST_CASE("payoff values") {
    const Payoff call = Payoff::call(100.0);
    const Payoff digital = Payoff::digital(100.0);
    const double x140 = 140.0, x100 = 100.0;
    CHECK(evaluate(call, std::span<const double>(&x140, 1)) == 40.0);
    CHECK(evaluate(digital, std::span<const double>(&x100, 1)) == 1.0); // boundary included

    const std::vector<double> w(4, 0.25);
    const Payoff basket = Payoff::basket_call(w, 100.0);
    const std::vector<double> atm(4, 100.0);
    CHECK(evaluate(basket, std::span<const double>(atm)) == 0.0);

    CHECK_THROWS_AS(evaluate(Payoff::density_point(1.0), std::span<const double>(&x100, 1)),
                    std::invalid_argument);
}

TEST_CASE("payoff residuals and derivative chaining") {
    const double x = 140.0, dx = 40.0;
    const Residual r = phi_and_root_residual(Payoff::call(100.0), std::span<const double>(&x, 1),
                                             std::span<const double>(&dx, 1));
    CHECK(r.value == 40.0);
    CHECK(r.dvalue_dy1 == 40.0);

    const std::vector<double> xb{90.0, 110.0}, dxb{10.0, 10.0};
    const std::vector<double> w{0.5, 0.5};
    const Residual rb = phi_and_root_residual(Payoff::basket_call(w, 100.0),
                                              std::span<const double>(xb),
                                              std::span<const double>(dxb));
    CHECK(rb.value == doctest::Approx(0.0));
    CHECK(rb.dvalue_dy1 == doctest::Approx(10.0));

    // Digital shares the inner function with the call.
    const Residual rd = phi_and_root_residual(Payoff::digital(100.0),
                                              std::span<const double>(&x, 1),
                                              std::span<const double>(&dx, 1));
    CHECK(rd.value == r.value);
}

TEST_CASE("payoff identities on random inputs") {
    std::mt19937_64 eng(11);
    std::uniform_real_distribution<double> u(-50.0, 250.0);
    const Payoff call = Payoff::call(100.0);
    const Payoff digital = Payoff::digital(100.0);
    for (int i = 0; i < 200; ++i) {
        const double x = u(eng);
        const double dx = 1.0;
        const Residual r = phi_and_root_residual(call, std::span<const double>(&x, 1),
                                                 std::span<const double>(&dx, 1));
        CHECK(evaluate(call, std::span<const double>(&x, 1)) == std::max(r.value, 0.0));
        CHECK(evaluate(digital, std::span<const double>(&x, 1)) == (r.value >= 0.0 ? 1.0 : 0.0));
    }
    // A basket with one unit weight equals the single-asset call.
    const std::vector<double> w{1.0};
    const Payoff single = Payoff::basket_call(w, 100.0);
    for (int i = 0; i < 50; ++i) {
        const double x = u(eng);
        CHECK(evaluate(single, std::span<const double>(&x, 1)) ==
              evaluate(call, std::span<const double>(&x, 1)));
    }
}

TEST_CASE("zero volatility freezes the terminal value") {
    const GBMParams p = GBMParams::single(100.0, 0.0);
    const TimeGrid grid(1.0, 4);
    const double loading = 1.0;
    const std::vector<GaussianVector> cond{gv({0.4, -1.0, 0.3, 2.0})};
    const TerminalResult r = gbm_terminal(p, 1.7, std::span<const double>(&loading, 1),
                                          std::span<const GaussianVector>(cond), grid);
    CHECK(r.value[0] == 100.0);
    CHECK(r.dvalue_dy1[0] == 0.0);
}

TEST_CASE("single-step terminal value by hand") {
    const GBMParams p = GBMParams::single(100.0, 0.4);
    const TimeGrid grid(1.0, 1);
    const double loading = 1.0;
    const std::vector<GaussianVector> cond{gv({0.0})};
    const TerminalResult r = gbm_terminal(p, 1.0, std::span<const double>(&loading, 1),
                                          std::span<const GaussianVector>(cond), grid);
    CHECK(r.value[0] == doctest::Approx(140.0).epsilon(1e-14));
    CHECK(r.dvalue_dy1[0] == doctest::Approx(40.0).epsilon(1e-14));
}

TEST_CASE("terminal sensitivity matches central differences") {
    const double h = 1e-6;
    std::mt19937_64 eng(2024);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uni(0.1, 0.5);

    // GBM, one and several assets.
    for (int rep = 0; rep < 100; ++rep) {
        const int d = 1 + rep % 3;
        GBMParams p;
        p.dim = d;
        p.corr = d > 1 ? CorrelationStructure::uniform(d, 0.3) : CorrelationStructure::identity(1);
        for (int j = 0; j < d; ++j) {
            p.spot.push_back(80.0 + 40.0 * uni(eng));
            p.sigma.push_back(uni(eng));
            p.drift.push_back(0.0);
        }
        const int n = 1 << (rep % 4);
        const TimeGrid grid(1.0, n);
        std::vector<GaussianVector> cond(d);
        for (int j = 0; j < d; ++j) {
            cond[j].z.resize(n);
            for (auto& z : cond[j].z) z = normal(eng);
        }
        std::vector<double> loadings(d, 1.0 / std::sqrt(static_cast<double>(d)));
        const double y1 = normal(eng);
        const auto mid = gbm_terminal(p, y1, loadings, cond, grid);
        const auto up = gbm_terminal(p, y1 + h, loadings, cond, grid);
        const auto dn = gbm_terminal(p, y1 - h, loadings, cond, grid);
        for (int j = 0; j < d; ++j) {
            const double fd = (up.value[j] - dn.value[j]) / (2.0 * h);
            CHECK(mid.dvalue_dy1[j] ==
                  doctest::Approx(fd).epsilon(1e-5).scale(std::abs(mid.dvalue_dy1[j]) + 1.0));
        }
    }

    // Heston, all schemes.
    const SchemeKind schemes[] = {SchemeKind::EulerFullTruncation,
                                  SchemeKind::EulerPartialTruncation, SchemeKind::EulerReflection,
                                  SchemeKind::Abr, SchemeKind::HestonOu};
    for (SchemeKind scheme : schemes) {
        for (int rep = 0; rep < 100; ++rep) {
            HestonParams p;
            p.spot = 100.0;
            p.mu = 0.0;
            p.kappa = 0.5 + uni(eng);
            p.xi = 0.05 + 0.2 * uni(eng);
            const int nou = 1 + rep % 3;
            p.theta = scheme == SchemeKind::HestonOu ? nou * p.xi * p.xi / (4.0 * p.kappa)
                                                     : 0.02 + 0.05 * uni(eng);
            p.v0 = 0.02 + 0.05 * uni(eng);
            p.rho = -0.9 + 1.5 * uni(eng);

            const int n = 1 << (1 + rep % 3);
            const TimeGrid grid(1.0, n);
            const int blocks = scheme == SchemeKind::HestonOu ? nou : 1;
            std::vector<GaussianVector> vol(blocks);
            for (auto& b : vol) {
                b.z.resize(n);
                for (auto& z : b.z) z = normal(eng);
            }
            GaussianVector orth;
            orth.z.resize(n);
            for (auto& z : orth.z) z = normal(eng);
            orth.z[0] = 0.0;

            const double y1 = normal(eng);
            const auto mid = heston_terminal(p, scheme, y1, vol, orth, grid);
            const auto up = heston_terminal(p, scheme, y1 + h, vol, orth, grid);
            const auto dn = heston_terminal(p, scheme, y1 - h, vol, orth, grid);
            const double fd = (up.value[0] - dn.value[0]) / (2.0 * h);
            CHECK(mid.dvalue_dy1[0] ==
                  doctest::Approx(fd).epsilon(1e-5).scale(std::abs(mid.dvalue_dy1[0]) + 1.0));
        }
    }
}

TEST_CASE("degenerate variance reduces the stochastic-volatility model to GBM") {
    HestonParams hp{100.0, 0.04, 0.0, 1.0, 0.04, 0.0, -0.5};
    const int n = 8;
    const TimeGrid grid(1.0, n);
    auto zv = testsupport::random_normals(n, 3);
    auto zp = testsupport::random_normals(n, 4);
    GaussianVector vol{zv};
    GaussianVector orth{zp};
    orth.z[0] = 0.0; // conditioned offset; the smoothing coordinate enters via y1
    const double y1 = 0.7;
    const std::vector<GaussianVector> blocks{vol};
    const auto hr = heston_terminal(hp, SchemeKind::EulerFullTruncation, y1, blocks, orth, grid);

    // Equivalent driftless lognormal recursion with sigma = sqrt(theta) and
    // the pre-mixed factors rho*z_v + sqrt(1-rho^2)*z_perp.
    const double rho = hp.rho;
    const double mix = std::sqrt(1.0 - rho * rho);
    GaussianVector combined;
    combined.z.resize(n);
    for (int i = 0; i < n; ++i) combined.z[i] = rho * zv[i] + mix * (i == 0 ? y1 : zp[i]);
    // The smoothing coordinate contribution is already inside combined.z[0].
    const GBMParams gp = GBMParams::single(100.0, std::sqrt(hp.theta));
    const double loading = 0.0;
    const std::vector<GaussianVector> cond{combined};
    const auto gr = gbm_terminal(gp, 0.0, std::span<const double>(&loading, 1), cond, grid);
    CHECK(hr.value[0] == doctest::Approx(gr.value[0]).epsilon(1e-12));
}

TEST_CASE("variance scheme behavior at the truncation boundary") {
    // A large negative volatility shock drives the Euler state negative; the
    // full-truncation transform zeroes the variance used on the next step.
    HestonParams p{100.0, 0.04, 0.0, 1.0, 0.0025, 0.5, -0.5};
    const TimeGrid grid(1.0, 2);
    std::vector<double> zv{-5.0, 0.0};
    const std::span<const double> blocks[1] = {zv};
    const auto vols = heston_vol_values(p, SchemeKind::EulerFullTruncation,
                                        std::span<const std::span<const double>>(blocks, 1), grid);
    CHECK(vols[0] == doctest::Approx(0.04));
    CHECK(vols[1] == 0.0);
}

TEST_CASE("squared OU variance representation stays non-negative") {
    HestonParams p{100.0, 0.04, 0.0, 1.0, 0.0025, 0.1, -0.9};
    CHECK(heston_ou_integer_count(p) == 1);
    const TimeGrid grid(1.0, 32);
    for (unsigned seed = 0; seed < 20; ++seed) {
        auto z = testsupport::random_normals(32, 100 + seed);
        const std::span<const double> blocks[1] = {z};
        const auto vols = heston_vol_values(p, SchemeKind::HestonOu,
                                            std::span<const std::span<const double>>(blocks, 1),
                                            grid);
        for (double v : vols) CHECK(v >= 0.0);
    }
}

TEST_CASE("OU count validation and the non-integer blend") {
    HestonParams p{100.0, 0.04, 0.0, 1.0, 0.0025, 0.1, -0.9};
    CHECK(heston_ou_nstar(p) == doctest::Approx(1.0));
    p.xi = 0.2; // nstar = 0.25
    CHECK_THROWS_AS(heston_ou_integer_count(p), std::invalid_argument);

    CHECK(heston_ou_blend(1.0, [](int n) { return n * 10.0; }) == doctest::Approx(10.0));
    CHECK(heston_ou_blend(1.5, [](int n) { return n * 10.0; }) == doctest::Approx(15.0));
    CHECK(heston_ou_blend(2.75, [](int) { return 7.0; }) == doctest::Approx(7.0));
    CHECK_THROWS_AS(heston_ou_blend(-1.0, [](int) { return 0.0; }), std::invalid_argument);
}

TEST_CASE("parameter validation") {
    GBMParams g = GBMParams::single(100.0, 0.2);
    g.spot[0] = -1.0;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);

    HestonParams h{100.0, 0.04, 0.0, 1.0, 0.0025, 0.1, -0.9};
    CHECK_NOTHROW(h.validate());
    h.rho = 1.5;
    CHECK_THROWS_AS(h.validate(), std::invalid_argument);
}

TEST_CASE("weak error of the Euler call price decays linearly in the step size") {
    // Smoothed estimates at N = 2, 4, 8, 16 against the closed-form price.
    const double ref = testsupport::black_scholes_call(100.0, 100.0, 0.4, 1.0);
    CHECK(ref == doctest::Approx(15.8519).epsilon(1e-4));

    SmoothingPlan plan;
    plan.nq = 32;
    SmoothingSchedule schedule;
    schedule.nq0 = 32;
    schedule.tol_newton0 = 1e-8;
    schedule.nq_growth = 0.0;
    schedule.tol_decay = 0.0;
    const GbmCoupledSampler sampler(GBMParams::single(100.0, 0.4), Payoff::call(100.0), plan,
                                    schedule, 1.0, 1, 777, EstimatorKind::Smoothed);

    std::vector<double> xs, ys;
    for (int level = 1; level <= 4; ++level) {
        const McEstimate est = mc_estimate(sampler, level, 60000);
        const double bias = std::abs(est.estimate - ref);
        CHECK(bias > 5.0 * est.std_error); // the fit is not dominated by noise
        xs.push_back(std::log2(1 << level));
        ys.push_back(std::log2(bias));
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double slope = (xs.size() * sxy - sx * sy) / (xs.size() * sxx - sx * sx);
    CHECK(-slope == doctest::Approx(1.0).epsilon(0.3));
}
