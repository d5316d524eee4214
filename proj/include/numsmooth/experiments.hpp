#pragma once

#include "numsmooth/asgq.hpp"
#include "numsmooth/estimators.hpp"
#include "numsmooth/mlmc.hpp"
#include "numsmooth/results.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace numsmooth {

// Flat experiment description; presets fill one of these and config files
// override individual keys.
struct ExperimentConfig {
    std::string name = "custom";
    std::string method = "mlmc"; // asgq | mlmc | mc | scheme-comparison
    std::string model = "gbm";   // gbm | heston
    std::string payoff = "call"; // call | digital | basket-call | density
    std::string scheme = "ou";
    std::string mlmc_mode = "tol"; // tol | rates

    int dim = 1;
    double spot = 100.0;
    double sigma = 0.2;
    double asset_corr = 0.0;
    double drift = 0.0;
    double strike = 100.0;
    double upoint = 1.0;
    double horizon = 1.0;

    double v0 = 0.04;
    double kappa = 1.0;
    double theta = 0.0025;
    double xi = 0.1;
    double rho_sv = -0.9;

    bool smoothing = true;
    bool richardson = false;
    int steps = 4;

    int nq = 8;
    double tol_newton = 1e-3;
    double nq_growth = 0.5;
    double toln_decay = 1.0;

    double asgq_tol = 1e-4;
    long long max_evals = 1000000;

    int coarsest_level = 2;
    int finest_level = 8;
    int max_level = 10;
    long long samples = 20000;
    long long screening = 1000;
    double tol = 1e-2;

    std::uint64_t seed = 20240;
    std::optional<double> reference;
    std::vector<double> sweep_tols;
    std::string out;
};

std::vector<std::string> preset_names();
ExperimentConfig preset(const std::string& name);
ExperimentConfig parse_config_file(const std::string& path);

// Builders shared by the runner and the verification suites.
GBMParams make_gbm_params(const ExperimentConfig& c);
HestonParams make_heston_params(const ExperimentConfig& c);
Payoff make_payoff(const ExperimentConfig& c);
SmoothingPlan make_plan(const ExperimentConfig& c);
SmoothingSchedule make_schedule(const ExperimentConfig& c);
std::unique_ptr<CoupledSampler> make_sampler(const ExperimentConfig& c, int coarsest_level,
                                             EstimatorKind kind);
Integrand make_integrand(const ExperimentConfig& c, int steps, int& dim_out);

struct ExperimentOutcome {
    std::vector<ResultRow> rows;
    bool converged = true;
};

ExperimentOutcome run_experiment(const ExperimentConfig& config);
ExperimentOutcome run_sweep(ExperimentConfig config, const std::vector<double>& tols);

} // namespace numsmooth
