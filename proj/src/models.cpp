#include "numsmooth/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace numsmooth {

GBMParams GBMParams::single(double S0, double sigma, double mu) {
    GBMParams p;
    p.dim = 1;
    p.spot = {S0};
    p.sigma = {sigma};
    p.drift = {mu};
    p.corr = CorrelationStructure::identity(1);
    p.validate();
    return p;
}

void GBMParams::validate() const {
    if (dim < 1) throw std::invalid_argument("GBMParams: dim must be positive");
    if (static_cast<int>(spot.size()) != dim || static_cast<int>(sigma.size()) != dim ||
        static_cast<int>(drift.size()) != dim || corr.dim != dim)
        throw std::invalid_argument("GBMParams: field sizes must match dim");
    for (double s : spot)
        if (!(s > 0.0)) throw std::invalid_argument("GBMParams: spot must be positive");
    for (double s : sigma)
        if (!(s >= 0.0)) throw std::invalid_argument("GBMParams: sigma must be non-negative");
}

void HestonParams::validate() const {
    if (!(spot > 0.0)) throw std::invalid_argument("HestonParams: spot must be positive");
    if (!(v0 >= 0.0)) throw std::invalid_argument("HestonParams: v0 must be non-negative");
    if (!(kappa > 0.0)) throw std::invalid_argument("HestonParams: kappa must be positive");
    if (!(theta >= 0.0)) throw std::invalid_argument("HestonParams: theta must be non-negative");
    if (!(xi >= 0.0)) throw std::invalid_argument("HestonParams: xi must be non-negative");
    if (!(rho > -1.0 && rho < 1.0))
        throw std::invalid_argument("HestonParams: rho must be in (-1, 1)");
}

const char* scheme_name(SchemeKind s) {
    switch (s) {
        case SchemeKind::EulerFullTruncation: return "euler-full-truncation";
        case SchemeKind::EulerPartialTruncation: return "euler-partial-truncation";
        case SchemeKind::EulerReflection: return "euler-reflection";
        case SchemeKind::Abr: return "abr";
        case SchemeKind::HestonOu: return "heston-ou";
    }
    return "unknown";
}

SchemeKind scheme_from_name(const std::string& name) {
    if (name == "euler-full-truncation" || name == "ft") return SchemeKind::EulerFullTruncation;
    if (name == "euler-partial-truncation" || name == "pt") return SchemeKind::EulerPartialTruncation;
    if (name == "euler-reflection") return SchemeKind::EulerReflection;
    if (name == "abr") return SchemeKind::Abr;
    if (name == "heston-ou" || name == "ou") return SchemeKind::HestonOu;
    throw std::invalid_argument("unknown scheme: " + name);
}

double heston_ou_nstar(const HestonParams& p) {
    if (!(p.xi > 0.0)) throw std::invalid_argument("heston-ou: xi must be positive");
    return 4.0 * p.theta * p.kappa / (p.xi * p.xi);
}

int heston_ou_integer_count(const HestonParams& p) {
    const double nstar = heston_ou_nstar(p);
    const double rounded = std::round(nstar);
    if (rounded < 1.0 || std::abs(nstar - rounded) > 1e-9 * std::max(1.0, nstar))
        throw std::invalid_argument("heston-ou: 4*theta*kappa/xi^2 must be a positive integer "
                                    "(got " + std::to_string(nstar) + "); use the blend for "
                                    "non-integer counts");
    return static_cast<int>(rounded);
}

double heston_ou_blend(double nstar, const std::function<double(int)>& estimate) {
    if (!(nstar > 0.0)) throw std::invalid_argument("heston_ou_blend: nstar must be positive");
    const double floor_n = std::floor(nstar);
    const double frac = nstar - floor_n;
    if (frac < 1e-12) return estimate(static_cast<int>(floor_n));
    if (frac > 1.0 - 1e-12) return estimate(static_cast<int>(floor_n) + 1);
    const int n = std::max(1, static_cast<int>(floor_n));
    const double p = nstar - n;
    return (1.0 - p) * estimate(n) + p * estimate(n + 1);
}

void ConditionedTerminal::eval(double y1, std::span<double> value, std::span<double> dvalue) const {
    for (int j = 0; j < dim; ++j) {
        const double* a = c0.data() + static_cast<std::size_t>(j) * steps;
        const double* b = c1.data() + static_cast<std::size_t>(j) * steps;
        double path = spot[j];
        double sens = 0.0;
        for (int n = 0; n < steps; ++n) {
            const double f = a[n] + b[n] * y1;
            sens = sens * f + path * b[n];
            path *= f;
        }
        value[j] = path;
        dvalue[j] = sens;
    }
}

namespace {

// Correlated per-asset increments and the correlated y1 loadings; writes the
// affine step coefficients into out.
void fill_gbm_coeffs(ConditionedTerminal& out, const GBMParams& p,
                     const std::vector<double>& uncorr_rows, std::vector<double>& corr_rows,
                     std::span<const double> z0_loadings, const TimeGrid& grid) {
    const int d = p.dim;
    const int n = grid.steps;
    const double dt = grid.dt();
    const double bridge_loading = dt / std::sqrt(grid.horizon);

    const bool identity = p.corr.is_identity();
    const double* incr = uncorr_rows.data();
    if (!identity) {
        corr_rows.resize(static_cast<std::size_t>(d) * n);
        for (int j = 0; j < d; ++j) {
            double* dst = corr_rows.data() + static_cast<std::size_t>(j) * n;
            for (int t = 0; t < n; ++t) {
                double acc = 0.0;
                for (int i = 0; i <= j; ++i)
                    acc += p.corr.chol[static_cast<std::size_t>(j) * d + i] *
                           uncorr_rows[static_cast<std::size_t>(i) * n + t];
                dst[t] = acc;
            }
        }
        incr = corr_rows.data();
    }

    out.dim = d;
    out.steps = n;
    out.spot.assign(p.spot.begin(), p.spot.end());
    out.c0.resize(static_cast<std::size_t>(d) * n);
    out.c1.resize(static_cast<std::size_t>(d) * n);
    for (int j = 0; j < d; ++j) {
        double loading = z0_loadings[j];
        if (!identity) {
            loading = 0.0;
            for (int i = 0; i <= j; ++i)
                loading += p.corr.chol[static_cast<std::size_t>(j) * d + i] * z0_loadings[i];
        }
        const double c1j = p.sigma[j] * bridge_loading * loading;
        const double base = 1.0 + p.drift[j] * dt;
        const double* src = incr + static_cast<std::size_t>(j) * n;
        double* a = out.c0.data() + static_cast<std::size_t>(j) * n;
        double* b = out.c1.data() + static_cast<std::size_t>(j) * n;
        for (int t = 0; t < n; ++t) {
            a[t] = base + p.sigma[j] * src[t];
            b[t] = c1j;
        }
    }
}

// Variance-path coefficients: corr_term[n] is the part of the asset diffusion
// driven by the volatility Brownian(s), orth_coeff[n] multiplies the asset's
// independent increment, vol_used[n] is f3(v_hat) (optional output).
void heston_step_coeffs(const HestonParams& p, SchemeKind scheme,
                        std::span<const std::span<const double>> vol_incr_blocks, double dt,
                        std::vector<double>& corr_term, std::vector<double>& orth_coeff,
                        std::vector<double>& ou_state, std::vector<double>* vol_used) {
    const int n = static_cast<int>(vol_incr_blocks[0].size());
    corr_term.resize(n);
    orth_coeff.resize(n);
    if (vol_used) vol_used->resize(n);
    const double orth_scale = std::sqrt(1.0 - p.rho * p.rho);

    switch (scheme) {
        case SchemeKind::EulerFullTruncation:
        case SchemeKind::EulerPartialTruncation:
        case SchemeKind::EulerReflection: {
            if (vol_incr_blocks.size() != 1)
                throw std::invalid_argument("heston: Euler variants use one volatility factor");
            const std::span<const double> dwv = vol_incr_blocks[0];
            double state = p.v0;
            for (int t = 0; t < n; ++t) {
                double f1, f2, f3;
                if (scheme == SchemeKind::EulerFullTruncation) {
                    f1 = state;
                    f2 = f3 = std::max(state, 0.0);
                } else if (scheme == SchemeKind::EulerPartialTruncation) {
                    f1 = f2 = state;
                    f3 = std::max(state, 0.0);
                } else {
                    f1 = f2 = f3 = std::abs(state);
                }
                const double sq = std::sqrt(f3);
                corr_term[t] = p.rho * sq * dwv[t];
                orth_coeff[t] = orth_scale * sq;
                if (vol_used) (*vol_used)[t] = f3;
                state = f1 + p.kappa * (p.theta - f2) * dt + p.xi * sq * dwv[t];
            }
            break;
        }
        case SchemeKind::Abr: {
            if (vol_incr_blocks.size() != 1)
                throw std::invalid_argument("heston: ABR uses one volatility factor");
            const std::span<const double> dwv = vol_incr_blocks[0];
            const double ekdt = std::exp(-p.kappa * dt);
            const double e2kdt = std::exp(-2.0 * p.kappa * dt);
            double v = p.v0;
            for (int t = 0; t < n; ++t) {
                const double sq = std::sqrt(v);
                corr_term[t] = p.rho * sq * dwv[t];
                orth_coeff[t] = orth_scale * sq;
                if (vol_used) (*vol_used)[t] = v;
                const double mean = ekdt * v + (1.0 - ekdt) * p.theta;
                const double ratio =
                    0.5 * p.xi * p.xi / p.kappa * v * (1.0 - e2kdt) / (mean * mean);
                const double arg = 1.0 + ratio;
                if (!(arg > 0.0) || !std::isfinite(arg))
                    throw std::runtime_error("heston-abr: log argument out of domain");
                const double gamma2 = std::log(arg) / dt;
                v = mean * std::exp(-0.5 * gamma2 * dt + std::sqrt(gamma2) * dwv[t]);
            }
            break;
        }
        case SchemeKind::HestonOu: {
            const int count = static_cast<int>(vol_incr_blocks.size());
            const double alpha = -0.5 * p.kappa;
            const double beta = 0.5 * p.xi;
            ou_state.assign(count, std::sqrt(p.v0 / count));
            for (int t = 0; t < n; ++t) {
                double v = 0.0;
                double mixed = 0.0;
                for (int i = 0; i < count; ++i) {
                    v += ou_state[i] * ou_state[i];
                    mixed += ou_state[i] * vol_incr_blocks[i][t];
                }
                // Asset diffusion: rho * sum_i X_i dW_i + sqrt(1-rho^2) * sqrt(v) dW_perp,
                // i.e. the variance-driving Brownian is sum_i X_i dW_i / sqrt(v).
                corr_term[t] = p.rho * mixed;
                orth_coeff[t] = orth_scale * std::sqrt(v);
                if (vol_used) (*vol_used)[t] = v;
                for (int i = 0; i < count; ++i)
                    ou_state[i] += alpha * ou_state[i] * dt + beta * vol_incr_blocks[i][t];
            }
            break;
        }
    }
}

void validate_heston_scheme(const HestonParams& p, SchemeKind scheme, std::size_t blocks) {
    p.validate();
    if (scheme == SchemeKind::HestonOu) {
        const int count = heston_ou_integer_count(p);
        if (blocks != static_cast<std::size_t>(count))
            throw std::invalid_argument("heston-ou: expected one volatility factor block per OU "
                                        "process");
    } else if (blocks != 1) {
        throw std::invalid_argument("heston: scheme uses exactly one volatility factor block");
    }
    if (scheme == SchemeKind::Abr && !(p.xi > 0.0))
        throw std::invalid_argument("heston-abr: xi must be positive");
}

void fill_heston_coeffs(ConditionedTerminal& out, const HestonParams& p,
                        const std::vector<double>& corr_term, const std::vector<double>& orth_coeff,
                        const std::vector<double>& orth_base, double z0_loading,
                        const TimeGrid& grid) {
    const int n = grid.steps;
    const double dt = grid.dt();
    const double bridge_loading = dt / std::sqrt(grid.horizon) * z0_loading;
    out.dim = 1;
    out.steps = n;
    out.spot.assign(1, p.spot);
    out.c0.resize(n);
    out.c1.resize(n);
    const double base = 1.0 + p.mu * dt;
    for (int t = 0; t < n; ++t) {
        out.c0[t] = base + corr_term[t] + orth_coeff[t] * orth_base[t];
        out.c1[t] = orth_coeff[t] * bridge_loading;
    }
}

void bridge_with_offset(std::vector<double>& zbuf, double z0, std::span<const double> rest,
                        const TimeGrid& grid, std::span<double> increments) {
    zbuf.resize(grid.steps);
    zbuf[0] = z0;
    std::copy(rest.begin(), rest.end(), zbuf.begin() + 1);
    bridge_increments(std::span<const double>(zbuf), grid, increments);
}

} // namespace

void build_gbm_conditioned(ConditionedTerminal& out, ModelWorkspace& ws, const GBMParams& p,
                           std::span<const double> z0_offsets, std::span<const double> z0_loadings,
                           std::span<const std::span<const double>> orth_factors,
                           const TimeGrid& grid) {
    const int d = p.dim;
    const int n = grid.steps;
    if (static_cast<int>(z0_offsets.size()) != d || static_cast<int>(z0_loadings.size()) != d ||
        static_cast<int>(orth_factors.size()) != d)
        throw std::invalid_argument("build_gbm_conditioned: asset count mismatch");

    ws.rows.resize(static_cast<std::size_t>(d) * n);
    for (int j = 0; j < d; ++j) {
        if (static_cast<int>(orth_factors[j].size()) != n - 1)
            throw std::invalid_argument("build_gbm_conditioned: expected N-1 orthogonal factors");
        bridge_with_offset(ws.zbuf, z0_offsets[j], orth_factors[j], grid,
                           std::span<double>(ws.rows.data() + static_cast<std::size_t>(j) * n, n));
    }
    fill_gbm_coeffs(out, p, ws.rows, ws.rows2, z0_loadings, grid);
}

void build_gbm_conditioned_pair(ConditionedTerminal& fine, ConditionedTerminal& coarse,
                                ModelWorkspace& ws, const GBMParams& p,
                                std::span<const double> z0_offsets,
                                std::span<const double> z0_loadings,
                                std::span<const std::span<const double>> orth_factors,
                                const TimeGrid& fine_grid) {
    build_gbm_conditioned(fine, ws, p, z0_offsets, z0_loadings, orth_factors, fine_grid);

    const int d = p.dim;
    const int nf = fine_grid.steps;
    if (nf < 2) throw std::invalid_argument("build_gbm_conditioned_pair: need at least two steps");
    const int nc = nf / 2;
    const TimeGrid coarse_grid(fine_grid.horizon, nc);

    // ws.rows still holds the fine uncorrelated increments.
    std::vector<double> coarse_rows(static_cast<std::size_t>(d) * nc);
    for (int j = 0; j < d; ++j)
        coarsen_pairwise(
            std::span<const double>(ws.rows.data() + static_cast<std::size_t>(j) * nf, nf),
            std::span<double>(coarse_rows.data() + static_cast<std::size_t>(j) * nc, nc));
    fill_gbm_coeffs(coarse, p, coarse_rows, ws.rows2, z0_loadings, coarse_grid);
}

void build_heston_conditioned(ConditionedTerminal& out, ModelWorkspace& ws, const HestonParams& p,
                              SchemeKind scheme,
                              std::span<const std::span<const double>> vol_factor_blocks,
                              std::span<const double> orth_factors, const TimeGrid& grid,
                              double z0_offset, double z0_loading) {
    validate_heston_scheme(p, scheme, vol_factor_blocks.size());
    const int n = grid.steps;
    const int blocks = static_cast<int>(vol_factor_blocks.size());
    if (static_cast<int>(orth_factors.size()) != n - 1)
        throw std::invalid_argument("build_heston_conditioned: expected N-1 orthogonal factors");

    ws.vol_incr.resize(static_cast<std::size_t>(blocks) * n);
    std::vector<std::span<const double>> incr_spans(blocks);
    for (int i = 0; i < blocks; ++i) {
        if (static_cast<int>(vol_factor_blocks[i].size()) != n)
            throw std::invalid_argument("build_heston_conditioned: volatility factor block size");
        bridge_increments(vol_factor_blocks[i], grid,
                          std::span<double>(ws.vol_incr.data() + static_cast<std::size_t>(i) * n, n));
        incr_spans[i] = std::span<const double>(ws.vol_incr.data() + static_cast<std::size_t>(i) * n, n);
    }

    heston_step_coeffs(p, scheme, incr_spans, grid.dt(), ws.corr_term, ws.orth_coeff, ws.ou_state,
                       nullptr);

    ws.orth_base.resize(n);
    bridge_with_offset(ws.zbuf, z0_offset, orth_factors, grid, std::span<double>(ws.orth_base));
    fill_heston_coeffs(out, p, ws.corr_term, ws.orth_coeff, ws.orth_base, z0_loading, grid);
}

void build_heston_conditioned_pair(ConditionedTerminal& fine, ConditionedTerminal& coarse,
                                   ModelWorkspace& ws, const HestonParams& p, SchemeKind scheme,
                                   std::span<const std::span<const double>> vol_factor_blocks,
                                   std::span<const double> orth_factors, const TimeGrid& fine_grid,
                                   double z0_offset, double z0_loading) {
    build_heston_conditioned(fine, ws, p, scheme, vol_factor_blocks, orth_factors, fine_grid,
                             z0_offset, z0_loading);

    const int nf = fine_grid.steps;
    if (nf < 2) throw std::invalid_argument("build_heston_conditioned_pair: need two steps");
    const int nc = nf / 2;
    const int blocks = static_cast<int>(vol_factor_blocks.size());
    const TimeGrid coarse_grid(fine_grid.horizon, nc);

    // Coarse increments: pairwise sums of the fine volatility and asset
    // increments (ws.vol_incr and ws.orth_base hold the fine ones).
    std::vector<double> coarse_vol(static_cast<std::size_t>(blocks) * nc);
    std::vector<std::span<const double>> incr_spans(blocks);
    for (int i = 0; i < blocks; ++i) {
        coarsen_pairwise(
            std::span<const double>(ws.vol_incr.data() + static_cast<std::size_t>(i) * nf, nf),
            std::span<double>(coarse_vol.data() + static_cast<std::size_t>(i) * nc, nc));
        incr_spans[i] =
            std::span<const double>(coarse_vol.data() + static_cast<std::size_t>(i) * nc, nc);
    }
    std::vector<double> coarse_orth(nc);
    coarsen_pairwise(std::span<const double>(ws.orth_base.data(), nf),
                     std::span<double>(coarse_orth));

    std::vector<double> corr_term, orth_coeff;
    heston_step_coeffs(p, scheme, incr_spans, coarse_grid.dt(), corr_term, orth_coeff, ws.ou_state,
                       nullptr);
    fill_heston_coeffs(coarse, p, corr_term, orth_coeff, coarse_orth, z0_loading, coarse_grid);
}

TerminalResult gbm_terminal(const GBMParams& p, double y1, std::span<const double> z0_loadings,
                            std::span<const GaussianVector> conditioned, const TimeGrid& grid) {
    p.validate();
    const int d = p.dim;
    std::vector<double> offsets(d);
    std::vector<std::span<const double>> orth(d);
    for (int j = 0; j < d; ++j) {
        if (static_cast<int>(conditioned[j].size()) != grid.steps)
            throw std::invalid_argument("gbm_terminal: factor vector length must equal steps");
        offsets[j] = conditioned[j].z[0];
        orth[j] = std::span<const double>(conditioned[j].z.data() + 1, grid.steps - 1);
    }
    ConditionedTerminal ct;
    ModelWorkspace ws;
    build_gbm_conditioned(ct, ws, p, offsets, z0_loadings, orth, grid);
    TerminalResult r;
    r.value.resize(d);
    r.dvalue_dy1.resize(d);
    ct.eval(y1, r.value, r.dvalue_dy1);
    return r;
}

TerminalResult heston_terminal(const HestonParams& p, SchemeKind scheme, double y1,
                               std::span<const GaussianVector> vol_factors,
                               const GaussianVector& asset_orth_factors, const TimeGrid& grid) {
    std::vector<std::span<const double>> blocks(vol_factors.size());
    for (std::size_t i = 0; i < vol_factors.size(); ++i)
        blocks[i] = std::span<const double>(vol_factors[i].z);
    if (static_cast<int>(asset_orth_factors.size()) != grid.steps)
        throw std::invalid_argument("heston_terminal: factor vector length must equal steps");
    ConditionedTerminal ct;
    ModelWorkspace ws;
    build_heston_conditioned(
        ct, ws, p, scheme, blocks,
        std::span<const double>(asset_orth_factors.z.data() + 1, grid.steps - 1), grid,
        asset_orth_factors.z[0], 1.0);
    TerminalResult r;
    r.value.resize(1);
    r.dvalue_dy1.resize(1);
    ct.eval(y1, r.value, r.dvalue_dy1);
    return r;
}

std::vector<double> heston_vol_values(const HestonParams& p, SchemeKind scheme,
                                      std::span<const std::span<const double>> vol_factor_blocks,
                                      const TimeGrid& grid) {
    validate_heston_scheme(p, scheme, vol_factor_blocks.size());
    const int n = grid.steps;
    const int blocks = static_cast<int>(vol_factor_blocks.size());
    std::vector<double> incr(static_cast<std::size_t>(blocks) * n);
    std::vector<std::span<const double>> incr_spans(blocks);
    for (int i = 0; i < blocks; ++i) {
        bridge_increments(vol_factor_blocks[i], grid,
                          std::span<double>(incr.data() + static_cast<std::size_t>(i) * n, n));
        incr_spans[i] = std::span<const double>(incr.data() + static_cast<std::size_t>(i) * n, n);
    }
    std::vector<double> corr_term, orth_coeff, ou_state, vol_used;
    heston_step_coeffs(p, scheme, incr_spans, grid.dt(), corr_term, orth_coeff, ou_state,
                       &vol_used);
    return vol_used;
}

} // namespace numsmooth
