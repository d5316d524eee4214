#pragma once

#include "numsmooth/estimators.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace numsmooth {

// Per-level sample moments of the coupled correction Y_l (Y at the coarsest
// level is the plain level value). Raw power sums are kept so batches merge
// deterministically.
struct LevelStats {
    int level = 0;
    long long samples = 0;
    long long failures = 0;
    double cost_per_sample = 0.0; // model work units

    double sum1 = 0.0, sum2 = 0.0, sum3 = 0.0, sum4 = 0.0; // of Y
    double fine_sum1 = 0.0, fine_sum2 = 0.0;               // of the fine-level value
    double coarse_sum1 = 0.0;

    // |fine mean - telescoped mean| / (3 sigma), filled by the driver.
    double consistency = 0.0;

    double mean() const;
    double variance() const; // unbiased
    double fine_mean() const;
    double fine_variance() const;
    double central4() const;
    bool kurtosis_defined() const;
    double kurtosis() const;
};

// Fourth central moment over squared variance. Returns false when the
// variance vanishes or fewer than four samples are available.
bool sample_kurtosis(std::span<const double> samples, double& out);

// Optimal per-level sample counts for a statistical error budget of
// tol/sqrt(2): M_l = ceil((2/tol^2) sqrt(V_l/C_l) sum_j sqrt(V_j C_j)),
// floored at min_samples.
std::vector<long long> allocate_samples(std::span<const double> variances,
                                        std::span<const double> costs, double tol,
                                        long long min_samples = 32);

struct RateFit {
    double alpha = 0.0; // weak rate: -slope of log2|mean_l|
    double beta = 0.0;  // strong rate: -slope of log2 V_l
    double gamma = 0.0; // work rate: slope of log2 C_l
    bool available = false;
};

// Least-squares slopes over the correction levels (everything above the
// coarsest); requires at least three of them.
RateFit fit_rates(std::span<const LevelStats> stats);

struct MLMCConfig {
    int coarsest_level = 2;
    int max_level = 10;
    double tol = 1e-2;
    std::uint64_t seed = 42;
    long long screening_samples = 1000;
    long long min_samples = 32;
    double alpha_guess = 1.0;
    double alpha_floor = 0.5;
    double max_failure_fraction = 1e-4;
    int max_iterations = 200;
    bool parallel = true;
};

struct MLMCResult {
    double estimate = 0.0;
    std::vector<LevelStats> levels;
    RateFit rates;
    double stat_error = 0.0;
    double bias_estimate = 0.0;
    // Work actually executed (samples times model cost), including screening
    // and sample floors.
    double total_work = 0.0;
    // Work the tolerance demands: the real-valued optimal allocation over the
    // final hierarchy, free of screening overhead and integer floors. This is
    // the complexity-theorem quantity and what tolerance sweeps report.
    double allocated_work = 0.0;
    double wall_seconds = 0.0;
    bool converged = false;
    long long total_samples = 0;
    long long total_failures = 0;
};

// Giles-style driver: screening pass over the first three levels, then
// alternate optimal reallocation and level extension until the bias estimate
// |mean_L|/(2^alpha - 1) and the statistical error both fit in tol/sqrt(2).
MLMCResult mlmc_run(const MLMCConfig& config, const CoupledSampler& sampler);

// Fixed-sample convergence diagnostics across levels (for rate and kurtosis
// studies).
std::vector<LevelStats> mlmc_level_diagnostics(const CoupledSampler& sampler, int coarsest_level,
                                               int finest_level, long long samples_per_level,
                                               bool parallel = true);

struct SweepRow {
    double tol;
    MLMCResult result;
};

std::vector<SweepRow> complexity_sweep(MLMCConfig base, const CoupledSampler& sampler,
                                       std::span<const double> tols);

// Batch kernel: evaluates samples [begin, end) of one level and accumulates
// moments in index order. The OpenMP path evaluates sample values
// concurrently; the accumulation order is fixed, so results are bitwise
// identical to the serial reference.
void accumulate_level_range(const CoupledSampler& sampler, int level, std::uint64_t begin,
                            std::uint64_t end, bool parallel, LevelStats& into);

// Plain single-level Monte Carlo of the fine value at the given level.
struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    double work = 0.0;
    long long samples = 0;
};

McEstimate mc_estimate(const CoupledSampler& sampler, int level, long long samples,
                       bool parallel = true);

// Level-1 Richardson extrapolation on two estimates with step ratio two.
inline double richardson_level1(double coarse, double fine) { return 2.0 * fine - coarse; }

} // namespace numsmooth
