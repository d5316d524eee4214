#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "numsmooth/estimators.hpp"
#include "numsmooth/mlmc.hpp"
#include "numsmooth/smoothing.hpp"
#include "test_support.hpp"

#include <cmath>
#include <random>

using namespace numsmooth;

namespace {

// Single-asset conditioned terminal over one or more steps.
ConditionedTerminal make_gbm_ct(const GBMParams& p, std::span<const double> orth,
                                const TimeGrid& grid, double z0_offset = 0.0,
                                double z0_loading = 1.0) {
    ConditionedTerminal ct;
    ModelWorkspace ws;
    const std::span<const double> spans[1] = {orth};
    const double off = z0_offset, load = z0_loading;
    build_gbm_conditioned(ct, ws, p, std::span<const double>(&off, 1),
                          std::span<const double>(&load, 1),
                          std::span<const std::span<const double>>(spans, 1), grid);
    return ct;
}

} // namespace

TEST_CASE("rotation structure") {
    const Rotation r1 = build_rotation(1);
    CHECK(r1.at(0, 0) == doctest::Approx(1.0));

    const Rotation r2 = build_rotation(2);
    const double is2 = 1.0 / std::sqrt(2.0);
    CHECK(r2.at(0, 0) == doctest::Approx(is2));
    CHECK(r2.at(0, 1) == doctest::Approx(is2));
    CHECK(r2.at(1, 0) == doctest::Approx(is2));
    CHECK(r2.at(1, 1) == doctest::Approx(-is2));

    const Rotation r4 = build_rotation(4);
    for (int j = 0; j < 4; ++j) CHECK(r4.at(0, j) == doctest::Approx(0.5));

    for (int d : {1, 2, 3, 4, 8}) {
        const Rotation r = build_rotation(d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double dot = 0.0;
                for (int k = 0; k < d; ++k) dot += r.at(i, k) * r.at(j, k);
                CHECK(std::abs(dot - (i == j ? 1.0 : 0.0)) <= 1e-12);
            }
    }
}

TEST_CASE("newton finds the discontinuity of the one-step problem") {
    const GBMParams p = GBMParams::single(100.0, 0.4);
    const TimeGrid grid(1.0, 1);
    const ConditionedTerminal ct = make_gbm_ct(p, {}, grid);
    SmoothingPlan plan;
    plan.tol_newton = 1e-10;

    const RootResult atm = find_root(plan, ct, Payoff::digital(100.0));
    CHECK(atm.status == RootStatus::Found);
    CHECK(atm.y1star == doctest::Approx(0.0).epsilon(1e-12));

    const RootResult otm = find_root(plan, ct, Payoff::digital(120.0));
    CHECK(otm.status == RootStatus::Found);
    CHECK(otm.y1star == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(otm.sign > 0);
}

TEST_CASE("paths above the strike over the whole bracket report no root") {
    // Conditioned bridge factors (40, 0, 0) over four steps produce bridge
    // increments (10, 10, -10, -10); the terminal value 100*(u^2-16)^2 with
    // u = 1 + 0.1 y stays far above the strike for |y| <= 12.
    const GBMParams p = GBMParams::single(100.0, 0.4);
    const TimeGrid grid(1.0, 4);
    const std::vector<double> orth{40.0, 0.0, 0.0};
    const ConditionedTerminal ct = make_gbm_ct(p, orth, grid);
    SmoothingPlan plan;

    const RootResult r = find_root(plan, ct, Payoff::digital(100.0));
    CHECK(r.status == RootStatus::NoRoot);
    CHECK(r.sign > 0);

    const SmoothedValue v = smoothed_integrand(plan, ct, Payoff::digital(100.0));
    CHECK(v.status == RootStatus::NoRoot);
    CHECK(v.value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("found roots satisfy the residual tolerance contract") {
    std::mt19937_64 eng(5);
    std::normal_distribution<double> normal;
    const GBMParams p = GBMParams::single(100.0, 0.4);
    const TimeGrid grid(1.0, 8);
    SmoothingPlan plan;
    plan.tol_newton = 1e-6;
    const Payoff payoff = Payoff::call(100.0);
    int found = 0;
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> orth(7);
        for (auto& z : orth) z = normal(eng);
        const ConditionedTerminal ct = make_gbm_ct(p, orth, grid);
        const RootResult r = find_root(plan, ct, payoff);
        if (r.status != RootStatus::Found) continue;
        ++found;
        double x = 0.0, dx = 0.0;
        ct.eval(r.y1star, std::span<double>(&x, 1), std::span<double>(&dx, 1));
        CHECK(std::abs(x - 100.0) <= plan.tol_newton * (1.0 + 100.0));
    }
    CHECK(found > 150);
}

TEST_CASE("one-step digital pre-integration matches the normal cdf") {
    const GBMParams p = GBMParams::single(100.0, 0.4);
    const TimeGrid grid(1.0, 1);
    const ConditionedTerminal ct = make_gbm_ct(p, {}, grid);
    SmoothingPlan plan;
    plan.nq = 32;
    const SmoothedValue v = smoothed_integrand(plan, ct, Payoff::digital(100.0));
    CHECK(v.status == RootStatus::Found);
    CHECK(std::abs(v.value - 0.5) <= 5e-3);

    // Strike 120: exact conditional value is 1 - Phi(y*) with y* = 0.5.
    const SmoothedValue v2 = smoothed_integrand(plan, ct, Payoff::digital(120.0));
    CHECK(std::abs(v2.value - testsupport::normal_cdf(-0.5)) <= 5e-3);
}

TEST_CASE("one-step call pre-integration matches the truncated-Gaussian moment") {
    const GBMParams p = GBMParams::single(100.0, 0.4);
    const TimeGrid grid(1.0, 1);
    const ConditionedTerminal ct = make_gbm_ct(p, {}, grid);
    SmoothingPlan plan;
    plan.nq = 32;

    // E[max(40 Z, 0)] and E[max(40 Z - 20, 0)].
    const SmoothedValue atm = smoothed_integrand(plan, ct, Payoff::call(100.0));
    CHECK(atm.value ==
          doctest::Approx(testsupport::truncated_affine_mean(40.0, 0.0)).epsilon(1e-3));
    const SmoothedValue otm = smoothed_integrand(plan, ct, Payoff::call(120.0));
    CHECK(otm.value ==
          doctest::Approx(testsupport::truncated_affine_mean(40.0, -20.0)).epsilon(1e-3));
}

TEST_CASE("pre-integrated value is stable under tightening the root tolerance") {
    std::mt19937_64 eng(12);
    std::normal_distribution<double> normal;
    const GBMParams p = GBMParams::single(100.0, 0.4);
    const TimeGrid grid(1.0, 8);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> orth(7);
        for (auto& z : orth) z = normal(eng);
        const ConditionedTerminal ct = make_gbm_ct(p, orth, grid);
        SmoothingPlan loose;
        loose.nq = 64;
        loose.tol_newton = 1e-3;
        SmoothingPlan tight = loose;
        tight.tol_newton = 1e-9;
        const SmoothedValue a = smoothed_integrand(loose, ct, Payoff::call(100.0));
        const SmoothedValue b = smoothed_integrand(tight, ct, Payoff::call(100.0));
        if (a.status == RootStatus::Found && b.status == RootStatus::Found)
            CHECK(std::abs(a.value - b.value) <= 1e-10 * (1.0 + std::abs(b.value)));
    }
}

TEST_CASE("pre-integration node counts converge spectrally") {
    const GBMParams p = GBMParams::single(100.0, 0.4);
    const TimeGrid grid(1.0, 4);
    const std::vector<double> orth{0.3, -0.8, 1.1};
    const ConditionedTerminal ct = make_gbm_ct(p, orth, grid);
    std::vector<double> values;
    for (int nq : {8, 16, 32, 64}) {
        SmoothingPlan plan;
        plan.nq = nq;
        plan.tol_newton = 1e-12;
        values.push_back(smoothed_integrand(plan, ct, Payoff::call(100.0)).value);
    }
    const double d1 = std::abs(values[1] - values[0]);
    const double d2 = std::abs(values[2] - values[1]);
    const double d3 = std::abs(values[3] - values[2]);
    CHECK(d2 < d1);
    CHECK(d3 < d2);
}

TEST_CASE("conditional expectation is consistent with the plain estimator") {
    // E over the conditioned coordinates of the pre-integrated value equals
    // the direct expectation at the same discretization, within joint CIs.
    SmoothingPlan plan;
    SmoothingSchedule schedule;
    schedule.nq0 = 32;
    schedule.tol_newton0 = 1e-8;
    schedule.nq_growth = 0.0;
    schedule.tol_decay = 0.0;
    const GBMParams p = GBMParams::single(100.0, 0.2);
    const Payoff payoff = Payoff::digital(100.0);
    const int level = 3;
    const GbmCoupledSampler smoothed(p, payoff, plan, schedule, 1.0, level, 123,
                                     EstimatorKind::Smoothed);
    const GbmCoupledSampler plain(p, payoff, plan, schedule, 1.0, level, 456,
                                  EstimatorKind::Unsmoothed);
    const McEstimate a = mc_estimate(smoothed, level, 20000);
    const McEstimate b = mc_estimate(plain, level, 200000);
    const double joint = std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
    CHECK(std::abs(a.estimate - b.estimate) <= 3.0 * joint);
    CHECK(a.std_error < b.std_error); // the conditional expectation removes variance
}
