// Compares the serial reference kernels against the OpenMP paths on fixed
// workloads and verifies the results agree bitwise.
#include "numsmooth/asgq.hpp"
#include "numsmooth/estimators.hpp"
#include "numsmooth/mlmc.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstring>

using namespace numsmooth;

namespace {

double wall(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void bench_level_sampler() {
    SmoothingPlan plan;
    SmoothingSchedule schedule;
    schedule.nq0 = 8;
    schedule.tol_newton0 = 1e-3;
    const GbmCoupledSampler sampler(GBMParams::single(100.0, 0.2), Payoff::digital(100.0), plan,
                                    schedule, 1.0, 2, 7, EstimatorKind::Smoothed);
    const int level = 6;
    const std::uint64_t samples = 20000;

    auto t0 = std::chrono::steady_clock::now();
    LevelStats serial;
    accumulate_level_range(sampler, level, 0, samples, false, serial);
    const double serial_s = wall(t0);

    t0 = std::chrono::steady_clock::now();
    LevelStats parallel;
    accumulate_level_range(sampler, level, 0, samples, true, parallel);
    const double parallel_s = wall(t0);

    const bool identical = std::memcmp(&serial.sum1, &parallel.sum1, sizeof(double)) == 0 &&
                           std::memcmp(&serial.sum4, &parallel.sum4, sizeof(double)) == 0 &&
                           serial.fine_sum2 == parallel.fine_sum2;
    std::printf("level sampler   (%llu samples, 64 steps): serial %.3fs  openmp %.3fs  "
                "speedup %.2fx  bitwise %s\n",
                (unsigned long long)samples, serial_s, parallel_s, serial_s / parallel_s,
                identical ? "OK" : "MISMATCH");
}

void bench_tensor_quadrature() {
    GbmSmoothedIntegrand integrand(GBMParams::single(100.0, 0.4), Payoff::digital(100.0),
                                   SmoothingPlan{1e-8, 50, 16, 2.0}, 1.0, 8);
    const Integrand f = [&](std::span<const double> z) { return integrand(z); };
    ASGQConfig cfg;
    cfg.dim = integrand.dim();
    cfg.tol = 1e-6;
    cfg.max_evals = 20000;

    cfg.parallel = false;
    auto t0 = std::chrono::steady_clock::now();
    const AdaptResult serial = asgq_adapt(cfg, f);
    const double serial_s = wall(t0);

    cfg.parallel = true;
    t0 = std::chrono::steady_clock::now();
    const AdaptResult parallel = asgq_adapt(cfg, f);
    const double parallel_s = wall(t0);

    std::printf("sparse adapt    (%lld evaluations, dim %d): serial %.3fs  openmp %.3fs  "
                "speedup %.2fx  bitwise %s\n",
                serial.evaluations, cfg.dim, serial_s, parallel_s, serial_s / parallel_s,
                serial.estimate == parallel.estimate ? "OK" : "MISMATCH");
}

} // namespace

int main() {
    std::printf("threads: %d\n", omp_get_max_threads());
    bench_level_sampler();
    bench_tensor_quadrature();
    return 0;
}
