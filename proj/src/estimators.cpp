#include "numsmooth/estimators.hpp"

#include "numsmooth/density.hpp"
#include "numsmooth/quadrature.hpp"
#include "numsmooth/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace numsmooth {

int SmoothingSchedule::nq(int level) const {
    const double scaled = nq0 * std::pow(2.0, nq_growth * (level - anchor_level));
    return std::min(kMaxQuadNodes, static_cast<int>(std::ceil(scaled - 1e-12)));
}

double SmoothingSchedule::tol_newton(int level) const {
    return tol_newton0 * std::pow(2.0, -tol_decay * (level - anchor_level));
}

namespace {

SmoothingPlan level_plan(const SmoothingPlan& base, const SmoothingSchedule& schedule, int level) {
    SmoothingPlan p = base;
    p.nq = schedule.nq(level);
    p.tol_newton = schedule.tol_newton(level);
    return p;
}

struct Scratch {
    ModelWorkspace ws;
    ConditionedTerminal fine;
    ConditionedTerminal coarse;
    std::vector<double> draws;
    std::vector<double> offsets;
    std::vector<double> loadings;
    std::vector<std::span<const double>> spans;
    std::vector<double> x;
    std::vector<double> dx;
};

Scratch& scratch() {
    static thread_local Scratch s;
    return s;
}

double payoff_on_terminal(const ConditionedTerminal& ct, const Payoff& payoff, Scratch& s) {
    s.x.resize(ct.dim);
    s.dx.resize(ct.dim);
    ct.eval(0.0, s.x, s.dx);
    return evaluate(payoff, s.x);
}

// Smoothed or density evaluation of one conditioned terminal.
bool level_value(const ConditionedTerminal& ct, const Payoff& payoff, const SmoothingPlan& plan,
                 EstimatorKind kind, double& out) {
    if (kind == EstimatorKind::Density) {
        const DensityValue v = density_sample_value(plan, ct, payoff.level);
        if (v.status == RootStatus::Failed) return false;
        out = v.value;
        return true;
    }
    const SmoothedValue v = smoothed_integrand(plan, ct, payoff);
    if (v.status == RootStatus::Failed) return false;
    out = v.value;
    return true;
}

} // namespace

GbmCoupledSampler::GbmCoupledSampler(GBMParams params, Payoff payoff, SmoothingPlan base_plan,
                                     SmoothingSchedule schedule, double horizon,
                                     int coarsest_level, std::uint64_t seed, EstimatorKind kind)
    : params_(std::move(params)),
      payoff_(std::move(payoff)),
      base_plan_(base_plan),
      schedule_(schedule),
      rotation_(build_rotation(params_.dim)),
      horizon_(horizon),
      coarsest_(coarsest_level),
      seed_(seed),
      kind_(kind) {
    params_.validate();
    schedule_.anchor_level = coarsest_level;
    if (kind_ == EstimatorKind::Density && params_.dim != 1)
        throw std::invalid_argument("density estimation supports single-asset models only");
}

double GbmCoupledSampler::cost_per_level(int level) const {
    const double n = static_cast<double>(1 << level);
    if (kind_ == EstimatorKind::Unsmoothed) return n;
    const double log_tol = std::log(1.0 / schedule_.tol_newton(level));
    const double nq = kind_ == EstimatorKind::Density ? 1.0 : schedule_.nq(level);
    return nq * n * log_tol;
}

CoupledSample GbmCoupledSampler::sample(int level, std::uint64_t index, std::uint64_t attempt,
                                        bool with_coarse) const {
    const int d = params_.dim;
    const int nf = 1 << level;
    const TimeGrid grid(horizon_, nf);
    const bool couple = with_coarse && level > coarsest_;

    Scratch& s = scratch();
    NormalStream stream(mix_seed(seed_, static_cast<std::uint64_t>(level), index, attempt));

    CoupledSample out;
    out.cost = cost_per_sample(level, couple);

    if (kind_ == EstimatorKind::Unsmoothed) {
        // Full draw, no conditioning: the coarse factor is drawn and the y1
        // loading is zero, so eval(0) yields the plain Euler terminal value.
        s.draws.resize(static_cast<std::size_t>(d) * nf);
        stream.fill(s.draws.data(), s.draws.size());
        s.offsets.resize(d);
        s.loadings.assign(d, 0.0);
        s.spans.resize(d);
        for (int j = 0; j < d; ++j) {
            const double* block = s.draws.data() + static_cast<std::size_t>(j) * nf;
            s.offsets[j] = block[0];
            s.spans[j] = std::span<const double>(block + 1, nf - 1);
        }
        if (couple) {
            build_gbm_conditioned_pair(s.fine, s.coarse, s.ws, params_, s.offsets, s.loadings,
                                       s.spans, grid);
            out.fine = payoff_on_terminal(s.fine, payoff_, s);
            out.coarse = payoff_on_terminal(s.coarse, payoff_, s);
            out.diff = out.fine - out.coarse;
        } else {
            build_gbm_conditioned(s.fine, s.ws, params_, s.offsets, s.loadings, s.spans, grid);
            out.fine = payoff_on_terminal(s.fine, payoff_, s);
            out.diff = out.fine;
        }
        return out;
    }

    // Smoothed / density: draw the d-1 rotated coarse coordinates and the
    // per-asset orthogonal factors; the smoothing coordinate is integrated out.
    s.draws.resize(static_cast<std::size_t>(d - 1) + static_cast<std::size_t>(d) * (nf - 1));
    stream.fill(s.draws.data(), s.draws.size());
    s.offsets.resize(d);
    s.loadings.resize(d);
    s.spans.resize(d);
    const std::span<const double> rest(s.draws.data(), static_cast<std::size_t>(d - 1));
    for (int j = 0; j < d; ++j) {
        s.offsets[j] = rotation_.z0_offset(j, rest);
        s.loadings[j] = rotation_.y1_loading(j);
        s.spans[j] = std::span<const double>(
            s.draws.data() + (d - 1) + static_cast<std::size_t>(j) * (nf - 1), nf - 1);
    }

    if (couple) {
        build_gbm_conditioned_pair(s.fine, s.coarse, s.ws, params_, s.offsets, s.loadings, s.spans,
                                   grid);
    } else {
        build_gbm_conditioned(s.fine, s.ws, params_, s.offsets, s.loadings, s.spans, grid);
    }

    if (!level_value(s.fine, payoff_, level_plan(base_plan_, schedule_, level), kind_, out.fine)) {
        out.failed = true;
        return out;
    }
    out.diff = out.fine;
    if (couple) {
        if (!level_value(s.coarse, payoff_, level_plan(base_plan_, schedule_, level - 1), kind_,
                         out.coarse)) {
            out.failed = true;
            return out;
        }
        out.diff = out.fine - out.coarse;
    }
    return out;
}

HestonCoupledSampler::HestonCoupledSampler(HestonParams params, SchemeKind scheme, Payoff payoff,
                                           SmoothingPlan base_plan, SmoothingSchedule schedule,
                                           double horizon, int coarsest_level, std::uint64_t seed,
                                           EstimatorKind kind)
    : params_(params),
      scheme_(scheme),
      vol_blocks_(scheme == SchemeKind::HestonOu ? heston_ou_integer_count(params) : 1),
      payoff_(std::move(payoff)),
      base_plan_(base_plan),
      schedule_(schedule),
      horizon_(horizon),
      coarsest_(coarsest_level),
      seed_(seed),
      kind_(kind) {
    params_.validate();
    schedule_.anchor_level = coarsest_level;
}

double HestonCoupledSampler::cost_per_level(int level) const {
    const double n = static_cast<double>(1 << level);
    if (kind_ == EstimatorKind::Unsmoothed) return n;
    const double log_tol = std::log(1.0 / schedule_.tol_newton(level));
    const double nq = kind_ == EstimatorKind::Density ? 1.0 : schedule_.nq(level);
    return nq * n * log_tol;
}

CoupledSample HestonCoupledSampler::sample(int level, std::uint64_t index, std::uint64_t attempt,
                                           bool with_coarse) const {
    const int nf = 1 << level;
    const TimeGrid grid(horizon_, nf);
    const bool couple = with_coarse && level > coarsest_;
    const bool smoothed = kind_ != EstimatorKind::Unsmoothed;

    Scratch& s = scratch();
    NormalStream stream(mix_seed(seed_, static_cast<std::uint64_t>(level), index, attempt));

    CoupledSample out;
    out.cost = cost_per_sample(level, couple);

    const std::size_t orth_count = smoothed ? static_cast<std::size_t>(nf - 1)
                                            : static_cast<std::size_t>(nf);
    s.draws.resize(static_cast<std::size_t>(vol_blocks_) * nf + orth_count);
    stream.fill(s.draws.data(), s.draws.size());

    s.spans.resize(vol_blocks_);
    for (int b = 0; b < vol_blocks_; ++b)
        s.spans[b] = std::span<const double>(s.draws.data() + static_cast<std::size_t>(b) * nf, nf);
    const double* orth = s.draws.data() + static_cast<std::size_t>(vol_blocks_) * nf;

    double z0_offset = 0.0;
    double z0_loading = 1.0;
    std::span<const double> orth_factors(orth, static_cast<std::size_t>(nf - 1));
    if (!smoothed) {
        z0_offset = orth[0];
        z0_loading = 0.0;
        orth_factors = std::span<const double>(orth + 1, static_cast<std::size_t>(nf - 1));
    }

    if (couple) {
        build_heston_conditioned_pair(s.fine, s.coarse, s.ws, params_, scheme_, s.spans,
                                      orth_factors, grid, z0_offset, z0_loading);
    } else {
        build_heston_conditioned(s.fine, s.ws, params_, scheme_, s.spans, orth_factors, grid,
                                 z0_offset, z0_loading);
    }

    if (!smoothed) {
        out.fine = payoff_on_terminal(s.fine, payoff_, s);
        out.diff = out.fine;
        if (couple) {
            out.coarse = payoff_on_terminal(s.coarse, payoff_, s);
            out.diff = out.fine - out.coarse;
        }
        return out;
    }

    if (!level_value(s.fine, payoff_, level_plan(base_plan_, schedule_, level), kind_, out.fine)) {
        out.failed = true;
        return out;
    }
    out.diff = out.fine;
    if (couple) {
        if (!level_value(s.coarse, payoff_, level_plan(base_plan_, schedule_, level - 1), kind_,
                         out.coarse)) {
            out.failed = true;
            return out;
        }
        out.diff = out.fine - out.coarse;
    }
    return out;
}

GbmSmoothedIntegrand::GbmSmoothedIntegrand(GBMParams params, Payoff payoff, SmoothingPlan plan,
                                           double horizon, int steps)
    : params_(std::move(params)),
      payoff_(std::move(payoff)),
      plan_(plan),
      rotation_(build_rotation(params_.dim)),
      horizon_(horizon),
      steps_(steps) {
    params_.validate();
    if (!is_power_of_two(steps)) throw std::invalid_argument("steps must be a power of two");
}

double GbmSmoothedIntegrand::operator()(std::span<const double> coords) const {
    const int d = params_.dim;
    if (static_cast<int>(coords.size()) != dim())
        throw std::invalid_argument("GbmSmoothedIntegrand: coordinate count mismatch");

    Scratch& s = scratch();
    const TimeGrid grid(horizon_, steps_);
    const std::span<const double> rest(coords.data(), static_cast<std::size_t>(d - 1));
    s.offsets.resize(d);
    s.loadings.resize(d);
    s.spans.resize(d);
    for (int j = 0; j < d; ++j) {
        s.offsets[j] = rotation_.z0_offset(j, rest);
        s.loadings[j] = rotation_.y1_loading(j);
        s.spans[j] = std::span<const double>(
            coords.data() + (d - 1) + static_cast<std::size_t>(j) * (steps_ - 1), steps_ - 1);
    }
    build_gbm_conditioned(s.fine, s.ws, params_, s.offsets, s.loadings, s.spans, grid);
    const SmoothedValue v = smoothed_integrand(plan_, s.fine, payoff_);
    if (v.status == RootStatus::Failed)
        throw std::runtime_error("GbmSmoothedIntegrand: smoothing failed at a quadrature node");
    return v.value;
}

HestonSmoothedIntegrand::HestonSmoothedIntegrand(HestonParams params, SchemeKind scheme,
                                                 Payoff payoff, SmoothingPlan plan, double horizon,
                                                 int steps)
    : params_(params),
      scheme_(scheme),
      vol_blocks_(scheme == SchemeKind::HestonOu ? heston_ou_integer_count(params) : 1),
      payoff_(std::move(payoff)),
      plan_(plan),
      horizon_(horizon),
      steps_(steps) {
    params_.validate();
    if (!is_power_of_two(steps)) throw std::invalid_argument("steps must be a power of two");
}

double HestonSmoothedIntegrand::operator()(std::span<const double> coords) const {
    if (static_cast<int>(coords.size()) != dim())
        throw std::invalid_argument("HestonSmoothedIntegrand: coordinate count mismatch");

    Scratch& s = scratch();
    const TimeGrid grid(horizon_, steps_);
    s.spans.resize(vol_blocks_);
    for (int b = 0; b < vol_blocks_; ++b)
        s.spans[b] =
            std::span<const double>(coords.data() + static_cast<std::size_t>(b) * steps_, steps_);
    const std::span<const double> orth(
        coords.data() + static_cast<std::size_t>(vol_blocks_) * steps_,
        static_cast<std::size_t>(steps_ - 1));

    build_heston_conditioned(s.fine, s.ws, params_, scheme_, s.spans, orth, grid, 0.0, 1.0);
    const SmoothedValue v = smoothed_integrand(plan_, s.fine, payoff_);
    if (v.status == RootStatus::Failed)
        throw std::runtime_error("HestonSmoothedIntegrand: smoothing failed at a quadrature node");
    return v.value;
}

} // namespace numsmooth
