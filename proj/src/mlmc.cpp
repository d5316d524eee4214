#include "numsmooth/mlmc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace numsmooth {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kMaxAttempts = 100;
constexpr std::uint64_t kBatchChunk = 1 << 15;
} // namespace

double LevelStats::mean() const { return samples > 0 ? sum1 / samples : kNan; }

double LevelStats::variance() const {
    if (samples < 2) return kNan;
    const double m = mean();
    const double raw = sum2 / samples - m * m;
    return std::max(0.0, raw) * samples / (samples - 1.0);
}

double LevelStats::fine_mean() const { return samples > 0 ? fine_sum1 / samples : kNan; }

double LevelStats::fine_variance() const {
    if (samples < 2) return kNan;
    const double m = fine_mean();
    const double raw = fine_sum2 / samples - m * m;
    return std::max(0.0, raw) * samples / (samples - 1.0);
}

double LevelStats::central4() const {
    if (samples < 1) return kNan;
    const double n = static_cast<double>(samples);
    const double m = sum1 / n;
    return sum4 / n - 4.0 * m * sum3 / n + 6.0 * m * m * sum2 / n - 3.0 * m * m * m * m;
}

bool LevelStats::kurtosis_defined() const {
    if (samples < 4) return false;
    const double m = mean();
    const double c2 = sum2 / samples - m * m;
    return c2 > 0.0;
}

double LevelStats::kurtosis() const {
    const double m = mean();
    const double c2 = sum2 / samples - m * m;
    return central4() / (c2 * c2);
}

bool sample_kurtosis(std::span<const double> samples, double& out) {
    if (samples.size() < 4) return false;
    LevelStats acc;
    for (double y : samples) {
        acc.samples += 1;
        acc.sum1 += y;
        acc.sum2 += y * y;
        acc.sum3 += y * y * y;
        acc.sum4 += y * y * y * y;
    }
    if (!acc.kurtosis_defined()) return false;
    out = acc.kurtosis();
    return true;
}

std::vector<long long> allocate_samples(std::span<const double> variances,
                                        std::span<const double> costs, double tol,
                                        long long min_samples) {
    if (variances.size() != costs.size())
        throw std::invalid_argument("allocate_samples: size mismatch");
    if (!(tol > 0.0)) throw std::invalid_argument("allocate_samples: tol must be positive");

    double sum_vc = 0.0;
    for (std::size_t i = 0; i < variances.size(); ++i) {
        if (!(costs[i] > 0.0)) throw std::invalid_argument("allocate_samples: costs must be positive");
        if (variances[i] < 0.0) throw std::invalid_argument("allocate_samples: negative variance");
        sum_vc += std::sqrt(variances[i] * costs[i]);
    }

    std::vector<long long> out(variances.size());
    for (std::size_t i = 0; i < variances.size(); ++i) {
        const double m = 2.0 / (tol * tol) * std::sqrt(variances[i] / costs[i]) * sum_vc;
        out[i] = std::max<long long>(min_samples, static_cast<long long>(std::ceil(m)));
    }
    return out;
}

namespace {

bool fit_slope(std::span<const double> xs, std::span<const double> ys, double& slope) {
    const std::size_t n = xs.size();
    if (n < 2) return false;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-12) return false;
    slope = (n * sxy - sx * sy) / denom;
    return true;
}

} // namespace

RateFit fit_rates(std::span<const LevelStats> stats) {
    RateFit fit;
    std::vector<double> xs, log_mean, log_var, log_cost;
    for (std::size_t i = 1; i < stats.size(); ++i) {
        const LevelStats& s = stats[i];
        if (s.samples < 2) continue;
        const double am = std::abs(s.mean());
        const double v = s.variance();
        if (!(am > 0.0) || !(v > 0.0) || !(s.cost_per_sample > 0.0)) continue;
        xs.push_back(static_cast<double>(s.level));
        log_mean.push_back(std::log2(am));
        log_var.push_back(std::log2(v));
        log_cost.push_back(std::log2(s.cost_per_sample));
    }
    if (xs.size() < 3) return fit;
    double slope = 0.0;
    if (!fit_slope(xs, log_mean, slope)) return fit;
    fit.alpha = -slope;
    if (!fit_slope(xs, log_var, slope)) return fit;
    fit.beta = -slope;
    if (!fit_slope(xs, log_cost, slope)) return fit;
    fit.gamma = slope;
    fit.available = true;
    return fit;
}

void accumulate_level_range(const CoupledSampler& sampler, int level, std::uint64_t begin,
                            std::uint64_t end, bool parallel, LevelStats& into) {
    into.level = level;
    into.cost_per_sample = sampler.cost_per_sample(level, true);

    std::vector<CoupledSample> buffer;
    std::vector<long long> attempts_used;
    for (std::uint64_t chunk_begin = begin; chunk_begin < end; chunk_begin += kBatchChunk) {
        const std::uint64_t chunk_end = std::min<std::uint64_t>(end, chunk_begin + kBatchChunk);
        const long long count = static_cast<long long>(chunk_end - chunk_begin);
        buffer.resize(count);
        attempts_used.assign(count, 0);

#pragma omp parallel for schedule(static) if (parallel && count > 1)
        for (long long i = 0; i < count; ++i) {
            const std::uint64_t index = chunk_begin + static_cast<std::uint64_t>(i);
            CoupledSample s;
            std::uint64_t attempt = 0;
            for (; attempt < kMaxAttempts; ++attempt) {
                s = sampler.sample(level, index, attempt, true);
                if (!s.failed) break;
            }
            buffer[i] = s;
            attempts_used[i] = static_cast<long long>(attempt);
        }

        for (long long i = 0; i < count; ++i) {
            const CoupledSample& s = buffer[i];
            into.failures += attempts_used[i];
            if (s.failed)
                throw std::runtime_error("mlmc: sample failed after retry budget exhausted");
            const double y = s.diff;
            into.samples += 1;
            into.sum1 += y;
            const double y2 = y * y;
            into.sum2 += y2;
            into.sum3 += y2 * y;
            into.sum4 += y2 * y2;
            into.fine_sum1 += s.fine;
            into.fine_sum2 += s.fine * s.fine;
            into.coarse_sum1 += s.coarse;
        }
    }
}

namespace {

void fill_consistency(std::vector<LevelStats>& levels) {
    double telescoped = 0.0;
    double var_tel = 0.0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        LevelStats& s = levels[i];
        if (s.samples < 2) continue;
        telescoped += s.mean();
        var_tel += s.variance() / s.samples;
        const double sigma2 = s.fine_variance() / s.samples + var_tel;
        const double sigma = std::sqrt(std::max(sigma2, 1e-300));
        s.consistency = std::abs(s.fine_mean() - telescoped) / (3.0 * sigma);
    }
}

void check_failures(const MLMCConfig& config, const std::vector<LevelStats>& levels) {
    long long samples = 0, failures = 0;
    for (const auto& s : levels) {
        samples += s.samples;
        failures += s.failures;
    }
    if (samples > 0 &&
        static_cast<double>(failures) > config.max_failure_fraction * static_cast<double>(samples))
        throw std::runtime_error("mlmc: smoothing failure rate exceeded the abort threshold");
}

} // namespace

MLMCResult mlmc_run(const MLMCConfig& config, const CoupledSampler& sampler) {
    if (!(config.tol > 0.0)) throw std::invalid_argument("mlmc_run: tol must be positive");
    if (config.coarsest_level != sampler.coarsest_level())
        throw std::invalid_argument("mlmc_run: coarsest level mismatch with sampler");

    const auto t0 = std::chrono::steady_clock::now();
    const int l0 = config.coarsest_level;
    int finest = std::min(config.max_level, l0 + 2);

    MLMCResult result;
    std::vector<LevelStats> levels;
    std::vector<long long> targets;
    auto ensure_level = [&](int count) {
        while (static_cast<int>(levels.size()) < count) {
            LevelStats s;
            s.level = l0 + static_cast<int>(levels.size());
            levels.push_back(s);
            targets.push_back(config.screening_samples);
        }
    };
    ensure_level(finest - l0 + 1);

    const double stat_budget = config.tol / std::sqrt(2.0);
    double alpha = config.alpha_guess;

    for (int iteration = 0; iteration < config.max_iterations; ++iteration) {
        for (std::size_t i = 0; i < levels.size(); ++i) {
            if (levels[i].samples < targets[i])
                accumulate_level_range(sampler, levels[i].level,
                                       static_cast<std::uint64_t>(levels[i].samples),
                                       static_cast<std::uint64_t>(targets[i]), config.parallel,
                                       levels[i]);
        }
        check_failures(config, levels);

        const RateFit fit = fit_rates(levels);
        if (fit.available) alpha = std::max(config.alpha_floor, fit.alpha);

        std::vector<double> variances, costs;
        for (const auto& s : levels) {
            variances.push_back(std::max(s.variance(), 0.0));
            costs.push_back(s.cost_per_sample);
        }
        const std::vector<long long> wanted =
            allocate_samples(variances, costs, config.tol, config.min_samples);
        bool grew = false;
        for (std::size_t i = 0; i < levels.size(); ++i) {
            if (wanted[i] > targets[i]) {
                targets[i] = wanted[i];
                grew = true;
            }
        }
        if (grew) continue;

        const double bias = std::abs(levels.back().mean()) / (std::pow(2.0, alpha) - 1.0);
        if (bias <= stat_budget) {
            result.converged = true;
            break;
        }
        if (finest >= config.max_level) {
            result.converged = false;
            break;
        }
        ++finest;
        ensure_level(finest - l0 + 1);
    }

    fill_consistency(levels);

    result.levels = levels;
    result.rates = fit_rates(levels);
    double est = 0.0, stat2 = 0.0, work = 0.0;
    for (const auto& s : levels) {
        est += s.mean();
        if (s.samples > 1) stat2 += s.variance() / s.samples;
        work += s.cost_per_sample * static_cast<double>(s.samples);
        result.total_samples += s.samples;
        result.total_failures += s.failures;
    }
    result.estimate = est;
    result.stat_error = std::sqrt(stat2);
    result.total_work = work;
    {
        double sum_vc = 0.0;
        for (const auto& s : levels)
            sum_vc += std::sqrt(std::max(s.variance(), 0.0) * s.cost_per_sample);
        // (2/tol^2) * (sum_l sqrt(V_l C_l))^2, the real-valued optimum.
        result.allocated_work = 2.0 / (config.tol * config.tol) * sum_vc * sum_vc;
    }
    const double alpha_used = result.rates.available
                                  ? std::max(config.alpha_floor, result.rates.alpha)
                                  : config.alpha_guess;
    result.bias_estimate = std::abs(levels.back().mean()) / (std::pow(2.0, alpha_used) - 1.0);
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

std::vector<LevelStats> mlmc_level_diagnostics(const CoupledSampler& sampler, int coarsest_level,
                                               int finest_level, long long samples_per_level,
                                               bool parallel) {
    if (finest_level < coarsest_level)
        throw std::invalid_argument("mlmc_level_diagnostics: invalid level range");
    std::vector<LevelStats> levels;
    for (int l = coarsest_level; l <= finest_level; ++l) {
        LevelStats s;
        s.level = l;
        accumulate_level_range(sampler, l, 0, static_cast<std::uint64_t>(samples_per_level),
                               parallel, s);
        levels.push_back(s);
    }
    fill_consistency(levels);
    return levels;
}

std::vector<SweepRow> complexity_sweep(MLMCConfig base, const CoupledSampler& sampler,
                                       std::span<const double> tols) {
    std::vector<SweepRow> rows;
    for (double tol : tols) {
        MLMCConfig config = base;
        config.tol = tol;
        rows.push_back({tol, mlmc_run(config, sampler)});
    }
    return rows;
}

McEstimate mc_estimate(const CoupledSampler& sampler, int level, long long samples,
                       bool parallel) {
    LevelStats acc;
    acc.level = level;
    acc.cost_per_sample = sampler.cost_per_sample(level, false);

    std::vector<double> buffer;
    McEstimate out;
    double sum = 0.0, sum2 = 0.0;
    for (std::uint64_t begin = 0; begin < static_cast<std::uint64_t>(samples);
         begin += kBatchChunk) {
        const std::uint64_t end =
            std::min<std::uint64_t>(static_cast<std::uint64_t>(samples), begin + kBatchChunk);
        const long long count = static_cast<long long>(end - begin);
        buffer.resize(count);
#pragma omp parallel for schedule(static) if (parallel && count > 1)
        for (long long i = 0; i < count; ++i) {
            CoupledSample s;
            std::uint64_t attempt = 0;
            for (; attempt < kMaxAttempts; ++attempt) {
                s = sampler.sample(level, begin + static_cast<std::uint64_t>(i), attempt, false);
                if (!s.failed) break;
            }
            buffer[i] = s.failed ? std::numeric_limits<double>::quiet_NaN() : s.fine;
        }
        for (long long i = 0; i < count; ++i) {
            if (!std::isfinite(buffer[i]))
                throw std::runtime_error("mc_estimate: sample failed after retry budget");
            sum += buffer[i];
            sum2 += buffer[i] * buffer[i];
        }
    }
    out.samples = samples;
    out.estimate = sum / samples;
    const double var = std::max(0.0, sum2 / samples - out.estimate * out.estimate) * samples /
                       std::max<long long>(1, samples - 1);
    out.std_error = std::sqrt(var / samples);
    out.work = acc.cost_per_sample * static_cast<double>(samples);
    return out;
}

} // namespace numsmooth
