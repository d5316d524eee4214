#pragma once

#include "numsmooth/models.hpp"
#include "numsmooth/payoffs.hpp"
#include "numsmooth/smoothing.hpp"

#include <cstdint>
#include <memory>
#include <span>

namespace numsmooth {

enum class EstimatorKind {
    Smoothed,   // pre-integrated payoff expectation
    Unsmoothed, // payoff evaluated directly on the Euler terminal value
    Density,    // pointwise density via the exact conditional expectation
};

// Per-level smoothing parameters. Defaults follow the level schedules
// nq_l = ceil(nq0 * 2^{(l-L0)/2}) and tol_l = tol0 * 2^{-(l-L0)}; growth
// exponents of zero give constant parameters across levels.
struct SmoothingSchedule {
    int nq0 = 8;
    double tol_newton0 = 1e-3;
    double nq_growth = 0.5;
    double tol_decay = 1.0;
    int anchor_level = 0; // the coarsest level the schedule is anchored at

    int nq(int level) const;
    double tol_newton(int level) const;
};

struct CoupledSample {
    double diff = 0.0;   // Y_l = fine - coarse (fine alone at the coarsest level)
    double fine = 0.0;
    double coarse = 0.0;
    double cost = 0.0;   // model work units
    bool failed = false;
};

// Level-l sampler with the fine/coarse coupling on shared randomness. sample()
// is a pure function of (level, index, attempt), so batches can be evaluated
// concurrently and results are independent of the thread count.
class CoupledSampler {
public:
    virtual ~CoupledSampler() = default;

    virtual CoupledSample sample(int level, std::uint64_t index, std::uint64_t attempt,
                                 bool with_coarse) const = 0;
    virtual double cost_per_level(int level) const = 0;
    virtual int coarsest_level() const = 0;

    double cost_per_sample(int level, bool with_coarse) const {
        double c = cost_per_level(level);
        if (with_coarse && level > coarsest_level()) c += cost_per_level(level - 1);
        return c;
    }
};

class GbmCoupledSampler final : public CoupledSampler {
public:
    GbmCoupledSampler(GBMParams params, Payoff payoff, SmoothingPlan base_plan,
                      SmoothingSchedule schedule, double horizon, int coarsest_level,
                      std::uint64_t seed, EstimatorKind kind);

    CoupledSample sample(int level, std::uint64_t index, std::uint64_t attempt,
                         bool with_coarse) const override;
    double cost_per_level(int level) const override;
    int coarsest_level() const override { return coarsest_; }

private:
    GBMParams params_;
    Payoff payoff_;
    SmoothingPlan base_plan_;
    SmoothingSchedule schedule_;
    Rotation rotation_;
    double horizon_;
    int coarsest_;
    std::uint64_t seed_;
    EstimatorKind kind_;
};

class HestonCoupledSampler final : public CoupledSampler {
public:
    HestonCoupledSampler(HestonParams params, SchemeKind scheme, Payoff payoff,
                         SmoothingPlan base_plan, SmoothingSchedule schedule, double horizon,
                         int coarsest_level, std::uint64_t seed, EstimatorKind kind);

    CoupledSample sample(int level, std::uint64_t index, std::uint64_t attempt,
                         bool with_coarse) const override;
    double cost_per_level(int level) const override;
    int coarsest_level() const override { return coarsest_; }

private:
    HestonParams params_;
    SchemeKind scheme_;
    int vol_blocks_;
    Payoff payoff_;
    SmoothingPlan base_plan_;
    SmoothingSchedule schedule_;
    double horizon_;
    int coarsest_;
    std::uint64_t seed_;
    EstimatorKind kind_;
};

// Smoothed integrands over the conditioned Gaussian coordinates, for the
// sparse-grid estimator.
//
// GBM coordinate layout (dim = d*N - 1):
//   [Y_2..Y_d | asset 1 factors z_1..z_{N-1} | asset 2 ... ]
// Heston layout (dim = (blocks+1)*N - 1):
//   [vol block 1 z_0..z_{N-1} | ... | asset orthogonal factors z_1..z_{N-1}]
class GbmSmoothedIntegrand {
public:
    GbmSmoothedIntegrand(GBMParams params, Payoff payoff, SmoothingPlan plan, double horizon,
                         int steps);

    int dim() const { return params_.dim * steps_ - 1; }
    double operator()(std::span<const double> coords) const;

private:
    GBMParams params_;
    Payoff payoff_;
    SmoothingPlan plan_;
    Rotation rotation_;
    double horizon_;
    int steps_;
};

class HestonSmoothedIntegrand {
public:
    HestonSmoothedIntegrand(HestonParams params, SchemeKind scheme, Payoff payoff,
                            SmoothingPlan plan, double horizon, int steps);

    int dim() const { return (vol_blocks_ + 1) * steps_ - 1; }
    double operator()(std::span<const double> coords) const;

private:
    HestonParams params_;
    SchemeKind scheme_;
    int vol_blocks_;
    Payoff payoff_;
    SmoothingPlan plan_;
    double horizon_;
    int steps_;
};

} // namespace numsmooth
