#pragma once

#include "numsmooth/brownian_bridge.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace numsmooth {

struct GBMParams {
    int dim = 1;
    std::vector<double> spot;   // S0 > 0 per asset
    std::vector<double> sigma;  // >= 0 per asset
    std::vector<double> drift;  // mu per asset
    CorrelationStructure corr = CorrelationStructure::identity(1);

    static GBMParams single(double S0, double sigma, double mu = 0.0);
    void validate() const;
};

struct HestonParams {
    double spot;   // S0 > 0
    double v0;     // >= 0
    double mu;
    double kappa;  // > 0
    double theta;  // >= 0
    double xi;     // >= 0 (OU scheme additionally requires xi > 0)
    double rho;    // in (-1, 1)

    void validate() const;
};

enum class SchemeKind {
    EulerFullTruncation,
    EulerPartialTruncation,
    EulerReflection,
    Abr,
    HestonOu,
};

const char* scheme_name(SchemeKind s);
SchemeKind scheme_from_name(const std::string& name);

// Number of squared OU processes representing the CIR variance: 4*theta*kappa/xi^2.
double heston_ou_nstar(const HestonParams& p);
// Throws unless nstar is within 1e-9 of a positive integer.
int heston_ou_integer_count(const HestonParams& p);

// Convex two-point blend for non-integer OU count nstar = n + p:
// (1-p)*estimate(n) + p*estimate(n+1).
double heston_ou_blend(double nstar, const std::function<double(int)>& estimate);

// Terminal values and their derivative with respect to the smoothing coordinate.
struct TerminalResult {
    std::vector<double> value;
    std::vector<double> dvalue_dy1;
};

// Conditioned terminal evaluator: with everything except the smoothing
// coordinate fixed, each forward-Euler step factor is affine in y1, so the
// terminal value per asset is S0 * prod_n (c0[n] + c1[n] * y1) and the
// sensitivity follows by the forward product rule.
struct ConditionedTerminal {
    int dim = 0;
    int steps = 0;
    std::vector<double> spot; // dim
    std::vector<double> c0;   // dim x steps, row-major
    std::vector<double> c1;   // dim x steps, row-major

    void eval(double y1, std::span<double> value, std::span<double> dvalue) const;
};

// Scratch buffers reused across builder calls.
struct ModelWorkspace {
    std::vector<double> zbuf;
    std::vector<double> rows;
    std::vector<double> rows2;
    std::vector<double> vol_incr;
    std::vector<double> ou_state;
    std::vector<double> corr_term;
    std::vector<double> orth_coeff;
    std::vector<double> orth_base;
};

// GBM: orth_factors[j] holds the N-1 non-coarse bridge factors of asset j;
// the coarse factor of asset j is z0_offset[j] + z0_loading[j] * y1 (offsets
// and loadings come from the rotation of the coarse factors).
void build_gbm_conditioned(ConditionedTerminal& out, ModelWorkspace& ws, const GBMParams& p,
                           std::span<const double> z0_offsets, std::span<const double> z0_loadings,
                           std::span<const std::span<const double>> orth_factors,
                           const TimeGrid& grid);

// Fine and coarse evaluators from the same draws: coarse increments are the
// pairwise sums of the fine ones, so both share the coarse factors exactly.
void build_gbm_conditioned_pair(ConditionedTerminal& fine, ConditionedTerminal& coarse,
                                ModelWorkspace& ws, const GBMParams& p,
                                std::span<const double> z0_offsets,
                                std::span<const double> z0_loadings,
                                std::span<const std::span<const double>> orth_factors,
                                const TimeGrid& fine_grid);

// Heston: the volatility path is simulated first (it does not depend on y1);
// the asset factor at step n is 1 + mu*dt + corr_term[n] + orth_coeff[n]*dW_perp[n]
// where dW_perp is built from (y1, orth_factors).
// vol_factor_blocks holds one N-vector of factors per volatility Brownian
// (one block except for the OU scheme with n > 1).
void build_heston_conditioned(ConditionedTerminal& out, ModelWorkspace& ws, const HestonParams& p,
                              SchemeKind scheme,
                              std::span<const std::span<const double>> vol_factor_blocks,
                              std::span<const double> orth_factors, const TimeGrid& grid,
                              double z0_offset = 0.0, double z0_loading = 1.0);

void build_heston_conditioned_pair(ConditionedTerminal& fine, ConditionedTerminal& coarse,
                                   ModelWorkspace& ws, const HestonParams& p, SchemeKind scheme,
                                   std::span<const std::span<const double>> vol_factor_blocks,
                                   std::span<const double> orth_factors, const TimeGrid& fine_grid,
                                   double z0_offset = 0.0, double z0_loading = 1.0);

// One-shot evaluations (convenience surface over the builders).
TerminalResult gbm_terminal(const GBMParams& p, double y1, std::span<const double> z0_loadings,
                            std::span<const GaussianVector> conditioned, const TimeGrid& grid);

TerminalResult heston_terminal(const HestonParams& p, SchemeKind scheme, double y1,
                               std::span<const GaussianVector> vol_factors,
                               const GaussianVector& asset_orth_factors, const TimeGrid& grid);

// Per-step variance values f3(v_hat) actually used by the asset diffusion.
std::vector<double> heston_vol_values(const HestonParams& p, SchemeKind scheme,
                                      std::span<const std::span<const double>> vol_factor_blocks,
                                      const TimeGrid& grid);

} // namespace numsmooth
