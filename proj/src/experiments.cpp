#include "numsmooth/experiments.hpp"

#include "numsmooth/asgq.hpp"
#include "numsmooth/brownian_bridge.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace numsmooth {

namespace {

double now_seconds(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double ls_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

int level_of_steps(int steps) {
    if (!is_power_of_two(steps)) throw std::invalid_argument("steps must be a power of two");
    int level = 0;
    while ((1 << level) < steps) ++level;
    return level;
}

std::map<std::string, ExperimentConfig> build_presets() {
    std::map<std::string, ExperimentConfig> p;

    // Sparse-grid estimates of the option-pricing cases, step counts and
    // Richardson pairs chosen so the discretization bias sits well inside
    // each tolerance.
    {
        ExperimentConfig c;
        c.name = "gbm-digital-asgq";
        c.method = "asgq";
        c.model = "gbm";
        c.payoff = "digital";
        c.sigma = 0.4;
        c.steps = 4;
        c.richardson = true;
        c.nq = 32;
        c.tol_newton = 1e-8;
        c.asgq_tol = 1e-5;
        c.max_evals = 300000;
        c.reference = 0.42074;
        p[c.name] = c;
    }
    {
        ExperimentConfig c;
        c.name = "gbm-call-asgq";
        c.method = "asgq";
        c.model = "gbm";
        c.payoff = "call";
        c.sigma = 0.4;
        c.steps = 8;
        c.richardson = true;
        c.nq = 32;
        c.tol_newton = 1e-8;
        c.asgq_tol = 5e-4;
        c.max_evals = 500000;
        c.reference = 15.8519;
        p[c.name] = c;
    }
    {
        ExperimentConfig c;
        c.name = "basket4-asgq";
        c.method = "asgq";
        c.model = "gbm";
        c.payoff = "basket-call";
        c.dim = 4;
        c.sigma = 0.4;
        c.asset_corr = 0.3;
        c.steps = 2;
        c.richardson = false;
        c.nq = 32;
        c.tol_newton = 1e-8;
        c.asgq_tol = 5e-4;
        c.max_evals = 300000;
        c.reference = 11.04;
        p[c.name] = c;
    }
    {
        ExperimentConfig c;
        c.name = "heston-digital-asgq";
        c.method = "asgq";
        c.model = "heston";
        c.scheme = "ou";
        c.payoff = "digital";
        c.steps = 4;
        c.richardson = true;
        c.nq = 32;
        c.tol_newton = 1e-8;
        c.asgq_tol = 1e-4;
        c.max_evals = 800000;
        c.reference = 0.5145;
        p[c.name] = c;
    }
    {
        ExperimentConfig c;
        c.name = "heston-call-asgq";
        c.method = "asgq";
        c.model = "heston";
        c.scheme = "ou";
        c.payoff = "call";
        c.steps = 8;
        c.richardson = true;
        c.nq = 32;
        c.tol_newton = 1e-8;
        c.asgq_tol = 1e-3;
        c.max_evals = 800000;
        c.reference = 6.332542;
        p[c.name] = c;
    }

    // Multilevel rate and kurtosis diagnostics.
    {
        ExperimentConfig c;
        c.name = "gbm-digital-mlmc-rates";
        c.method = "mlmc";
        c.mlmc_mode = "rates";
        c.model = "gbm";
        c.payoff = "digital";
        c.sigma = 0.2;
        c.coarsest_level = 2;
        c.finest_level = 8;
        c.samples = 20000;
        c.nq = 8;
        c.tol_newton = 1e-3;
        c.reference = 0.4601721627;
        p[c.name] = c;
        c.name = "gbm-digital-mlmc-rates-raw";
        c.smoothing = false;
        c.samples = 100000;
        p[c.name] = c;
    }
    {
        ExperimentConfig c;
        c.name = "heston-digital-mlmc-ou";
        c.method = "mlmc";
        c.mlmc_mode = "rates";
        c.model = "heston";
        c.scheme = "ou";
        c.payoff = "digital";
        c.coarsest_level = 3;
        c.finest_level = 7;
        c.samples = 20000;
        c.nq = 32;
        c.tol_newton = 1e-3;
        c.reference = 0.5145;
        p[c.name] = c;
        c.name = "heston-digital-mlmc-ft";
        c.scheme = "ft";
        p[c.name] = c;
        c.name = "heston-digital-mlmc-raw";
        c.scheme = "ft";
        c.smoothing = false;
        c.samples = 100000;
        p[c.name] = c;
    }

    // Tolerance-to-work sweeps: the smoothed estimator runs in its
    // bias-converged regime, the raw one starts at a single step so the bias
    // constraint binds across the sweep.
    {
        ExperimentConfig c;
        c.name = "gbm-digital-mlmc-sweep";
        c.method = "mlmc";
        c.mlmc_mode = "tol";
        c.model = "gbm";
        c.payoff = "digital";
        c.sigma = 0.2;
        c.coarsest_level = 2;
        c.max_level = 10;
        c.nq = 8;
        c.tol_newton = 1e-3;
        c.seed = 12345;
        c.sweep_tols = {4e-2, 2e-2, 1e-2, 5e-3};
        c.tol = 5e-3;
        c.reference = 0.4601721627;
        p[c.name] = c;
        c.name = "gbm-digital-mlmc-sweep-raw";
        c.smoothing = false;
        c.coarsest_level = 0;
        p[c.name] = c;
    }

    // Density estimation.
    {
        ExperimentConfig c;
        c.name = "density-gbm-mlmc";
        c.method = "mlmc";
        c.mlmc_mode = "tol";
        c.model = "gbm";
        c.payoff = "density";
        c.spot = 1.0;
        c.sigma = 0.2;
        c.upoint = 1.0;
        c.coarsest_level = 3;
        c.max_level = 10;
        c.tol = 1e-2;
        c.tol_newton = 1e-2;
        c.reference = 1.9848;
        p[c.name] = c;
        c.name = "density-gbm-mlmc-rates";
        c.mlmc_mode = "rates";
        c.finest_level = 10;
        c.samples = 40000;
        p[c.name] = c;
    }
    {
        ExperimentConfig c;
        c.name = "density-heston-mlmc-rates";
        c.method = "mlmc";
        c.mlmc_mode = "rates";
        c.model = "heston";
        c.scheme = "ou";
        c.payoff = "density";
        c.spot = 1.0;
        c.upoint = 1.0;
        c.coarsest_level = 2;
        c.finest_level = 7;
        c.samples = 20000;
        c.tol_newton = 1e-2;
        p[c.name] = c;
    }

    // Plain Monte Carlo baseline.
    {
        ExperimentConfig c;
        c.name = "gbm-call-mc";
        c.method = "mc";
        c.model = "gbm";
        c.payoff = "call";
        c.sigma = 0.4;
        c.steps = 16;
        c.richardson = true;
        c.samples = 400000;
        c.nq = 32;
        c.tol_newton = 1e-8;
        c.reference = 15.8519;
        p[c.name] = c;
    }

    // Variance-scheme comparison: weak-error rates and first-difference decay
    // along the volatility coordinates.
    {
        ExperimentConfig c;
        c.name = "scheme-comparison";
        c.method = "scheme-comparison";
        c.model = "heston";
        c.payoff = "call";
        c.steps = 4;
        c.samples = 300000;
        c.nq = 32;
        c.tol_newton = 1e-8;
        c.reference = 6.332542;
        p[c.name] = c;
    }
    return p;
}

const std::map<std::string, ExperimentConfig>& presets() {
    static const std::map<std::string, ExperimentConfig> map = build_presets();
    return map;
}

} // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& [name, config] : presets()) names.push_back(name);
    return names;
}

ExperimentConfig preset(const std::string& name) {
    auto it = presets().find(name);
    if (it == presets().end()) throw std::invalid_argument("unknown preset: " + name);
    return it->second;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    ExperimentConfig c;
    std::string line;
    bool from_preset = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) continue;

        if (key == "preset") {
            c = preset(value);
            from_preset = true;
        } else if (key == "name") c.name = value;
        else if (key == "method") c.method = value;
        else if (key == "model") c.model = value;
        else if (key == "payoff") c.payoff = value;
        else if (key == "scheme") c.scheme = value;
        else if (key == "mlmc_mode") c.mlmc_mode = value;
        else if (key == "dim") c.dim = std::stoi(value);
        else if (key == "spot") c.spot = std::stod(value);
        else if (key == "sigma") c.sigma = std::stod(value);
        else if (key == "asset_corr") c.asset_corr = std::stod(value);
        else if (key == "drift") c.drift = std::stod(value);
        else if (key == "strike") c.strike = std::stod(value);
        else if (key == "upoint") c.upoint = std::stod(value);
        else if (key == "horizon") c.horizon = std::stod(value);
        else if (key == "v0") c.v0 = std::stod(value);
        else if (key == "kappa") c.kappa = std::stod(value);
        else if (key == "theta") c.theta = std::stod(value);
        else if (key == "xi") c.xi = std::stod(value);
        else if (key == "rho_sv") c.rho_sv = std::stod(value);
        else if (key == "smoothing") c.smoothing = value == "1" || value == "on" || value == "true";
        else if (key == "richardson") c.richardson = value == "1" || value == "on" || value == "true";
        else if (key == "steps") c.steps = std::stoi(value);
        else if (key == "nq") c.nq = std::stoi(value);
        else if (key == "tol_newton") c.tol_newton = std::stod(value);
        else if (key == "nq_growth") c.nq_growth = std::stod(value);
        else if (key == "toln_decay") c.toln_decay = std::stod(value);
        else if (key == "asgq_tol") c.asgq_tol = std::stod(value);
        else if (key == "max_evals") c.max_evals = std::stoll(value);
        else if (key == "coarsest_level") c.coarsest_level = std::stoi(value);
        else if (key == "finest_level") c.finest_level = std::stoi(value);
        else if (key == "max_level") c.max_level = std::stoi(value);
        else if (key == "samples") c.samples = std::stoll(value);
        else if (key == "screening") c.screening = std::stoll(value);
        else if (key == "tol") c.tol = std::stod(value);
        else if (key == "seed") c.seed = std::stoull(value);
        else if (key == "reference") c.reference = std::stod(value);
        else if (key == "out") c.out = value;
        else if (key == "sweep_tols") {
            c.sweep_tols.clear();
            std::stringstream ss(value);
            std::string tok;
            while (std::getline(ss, tok, ',')) c.sweep_tols.push_back(std::stod(tok));
        } else {
            throw std::invalid_argument("unknown config key '" + key + "' on line " +
                                        std::to_string(lineno));
        }
    }
    if (!from_preset && c.name == "custom") c.name = path;
    return c;
}

GBMParams make_gbm_params(const ExperimentConfig& c) {
    GBMParams p;
    p.dim = c.dim;
    p.spot.assign(c.dim, c.spot);
    p.sigma.assign(c.dim, c.sigma);
    p.drift.assign(c.dim, c.drift);
    p.corr = c.dim > 1 ? CorrelationStructure::uniform(c.dim, c.asset_corr)
                       : CorrelationStructure::identity(1);
    p.validate();
    return p;
}

HestonParams make_heston_params(const ExperimentConfig& c) {
    HestonParams p{c.spot, c.v0, c.drift, c.kappa, c.theta, c.xi, c.rho_sv};
    p.validate();
    return p;
}

Payoff make_payoff(const ExperimentConfig& c) {
    if (c.payoff == "call") return Payoff::call(c.strike);
    if (c.payoff == "digital") return Payoff::digital(c.strike);
    if (c.payoff == "basket-call") {
        const std::vector<double> w(c.dim, 1.0 / c.dim);
        return Payoff::basket_call(w, c.strike);
    }
    if (c.payoff == "density") return Payoff::density_point(c.upoint);
    throw std::invalid_argument("unknown payoff: " + c.payoff);
}

SmoothingPlan make_plan(const ExperimentConfig& c) {
    SmoothingPlan plan;
    plan.nq = c.nq;
    plan.tol_newton = c.tol_newton;
    return plan;
}

SmoothingSchedule make_schedule(const ExperimentConfig& c) {
    SmoothingSchedule s;
    s.nq0 = c.nq;
    s.tol_newton0 = c.tol_newton;
    s.nq_growth = c.nq_growth;
    s.tol_decay = c.toln_decay;
    return s;
}

std::unique_ptr<CoupledSampler> make_sampler(const ExperimentConfig& c, int coarsest_level,
                                             EstimatorKind kind) {
    if (c.payoff == "density" && kind != EstimatorKind::Density)
        throw std::invalid_argument("the density payoff requires the smoothed density estimator");
    if (c.model == "gbm")
        return std::make_unique<GbmCoupledSampler>(make_gbm_params(c), make_payoff(c),
                                                   make_plan(c), make_schedule(c), c.horizon,
                                                   coarsest_level, c.seed, kind);
    if (c.model == "heston")
        return std::make_unique<HestonCoupledSampler>(make_heston_params(c),
                                                      scheme_from_name(c.scheme), make_payoff(c),
                                                      make_plan(c), make_schedule(c), c.horizon,
                                                      coarsest_level, c.seed, kind);
    throw std::invalid_argument("unknown model: " + c.model);
}

Integrand make_integrand(const ExperimentConfig& c, int steps, int& dim_out) {
    if (c.model == "gbm") {
        auto integrand = std::make_shared<GbmSmoothedIntegrand>(
            make_gbm_params(c), make_payoff(c), make_plan(c), c.horizon, steps);
        dim_out = integrand->dim();
        return [integrand](std::span<const double> z) { return (*integrand)(z); };
    }
    if (c.model == "heston") {
        auto integrand = std::make_shared<HestonSmoothedIntegrand>(
            make_heston_params(c), scheme_from_name(c.scheme), make_payoff(c), make_plan(c),
            c.horizon, steps);
        dim_out = integrand->dim();
        return [integrand](std::span<const double> z) { return (*integrand)(z); };
    }
    throw std::invalid_argument("unknown model: " + c.model);
}

namespace {

EstimatorKind estimator_kind(const ExperimentConfig& c) {
    if (c.payoff == "density") return EstimatorKind::Density;
    return c.smoothing ? EstimatorKind::Smoothed : EstimatorKind::Unsmoothed;
}

void set_reference(ResultRow& row, const std::optional<double>& reference) {
    row.reference = reference;
    if (reference && *reference != 0.0)
        row.rel_error = std::abs(row.estimate - *reference) / std::abs(*reference);
}

ExperimentOutcome run_asgq(const ExperimentConfig& c) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentOutcome outcome;

    auto run_one = [&](int steps, double tol_scale) {
        int dim = 0;
        const Integrand f = make_integrand(c, steps, dim);
        ASGQConfig config;
        config.dim = dim;
        config.tol = c.asgq_tol * tol_scale;
        config.max_evals = c.max_evals;
        return asgq_adapt(config, f);
    };

    if (c.richardson) {
        const AdaptResult coarse = run_one(c.steps, 1.0);
        const AdaptResult fine = run_one(2 * c.steps, 1.0);
        ResultRow row;
        row.experiment = c.name;
        row.method = "asgq";
        row.param = "richardson(" + std::to_string(c.steps) + "," + std::to_string(2 * c.steps) +
                    ")";
        row.estimate = richardson_level1(coarse.estimate, fine.estimate);
        row.evals = static_cast<double>(coarse.evaluations + fine.evaluations);
        row.wall_s = now_seconds(t0);
        set_reference(row, c.reference);
        outcome.rows.push_back(row);
        outcome.converged = coarse.converged && fine.converged;
    } else {
        const AdaptResult r = run_one(c.steps, 1.0);
        ResultRow row;
        row.experiment = c.name;
        row.method = "asgq";
        row.param = "steps=" + std::to_string(c.steps);
        row.estimate = r.estimate;
        row.evals = static_cast<double>(r.evaluations);
        row.wall_s = now_seconds(t0);
        set_reference(row, c.reference);
        outcome.rows.push_back(row);
        outcome.converged = r.converged;
    }
    return outcome;
}

ExperimentOutcome run_mc(const ExperimentConfig& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const EstimatorKind kind = estimator_kind(c);
    const int level = level_of_steps(c.steps);

    ExperimentOutcome outcome;
    ResultRow row;
    row.experiment = c.name;
    row.method = "mc";

    if (c.richardson) {
        ExperimentConfig fine_cfg = c;
        fine_cfg.seed = c.seed + 1;
        const auto coarse_sampler = make_sampler(c, level, kind);
        const auto fine_sampler = make_sampler(fine_cfg, level + 1, kind);
        const McEstimate coarse = mc_estimate(*coarse_sampler, level, c.samples);
        const McEstimate fine = mc_estimate(*fine_sampler, level + 1, c.samples);
        row.param = "richardson(" + std::to_string(c.steps) + "," + std::to_string(2 * c.steps) +
                    ")";
        row.estimate = richardson_level1(coarse.estimate, fine.estimate);
        row.stat_err = std::sqrt(4.0 * fine.std_error * fine.std_error +
                                 coarse.std_error * coarse.std_error);
        row.evals = coarse.work + fine.work;
    } else {
        const auto sampler = make_sampler(c, level, kind);
        const McEstimate est = mc_estimate(*sampler, level, c.samples);
        row.param = "steps=" + std::to_string(c.steps);
        row.estimate = est.estimate;
        row.stat_err = est.std_error;
        row.evals = est.work;
    }
    row.wall_s = now_seconds(t0);
    set_reference(row, c.reference);
    outcome.rows.push_back(row);
    return outcome;
}

ResultRow levels_summary_row(const ExperimentConfig& c, const std::vector<LevelStats>& levels,
                             const char* mode) {
    ResultRow row;
    row.experiment = c.name;
    row.method = "mlmc";
    row.param = std::string(mode) + " levels " + std::to_string(levels.front().level) + ".." +
                std::to_string(levels.back().level);
    double estimate = 0.0, work = 0.0;
    for (const auto& s : levels) {
        estimate += s.mean();
        work += s.cost_per_sample * static_cast<double>(s.samples);
    }
    row.estimate = estimate;
    row.evals = work;
    const RateFit fit = fit_rates(levels);
    if (fit.available) {
        row.alpha = fit.alpha;
        row.beta = fit.beta;
        row.gamma = fit.gamma;
    }
    if (levels.back().kurtosis_defined()) row.kurtosis_finest = levels.back().kurtosis();
    return row;
}

ExperimentOutcome run_mlmc(const ExperimentConfig& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const EstimatorKind kind = estimator_kind(c);
    const auto sampler = make_sampler(c, c.coarsest_level, kind);

    ExperimentOutcome outcome;
    if (c.mlmc_mode == "rates") {
        const auto levels =
            mlmc_level_diagnostics(*sampler, c.coarsest_level, c.finest_level, c.samples);
        ResultRow row = levels_summary_row(c, levels, "rates");
        row.wall_s = now_seconds(t0);
        set_reference(row, c.reference);
        outcome.rows.push_back(row);
        for (const auto& s : levels) {
            ResultRow lr;
            lr.experiment = c.name;
            lr.method = "mlmc";
            lr.param = "level=" + std::to_string(s.level);
            lr.estimate = s.mean();
            lr.stat_err = std::sqrt(s.variance() / static_cast<double>(s.samples));
            lr.evals = s.cost_per_sample * static_cast<double>(s.samples);
            if (s.kurtosis_defined()) lr.kurtosis_finest = s.kurtosis();
            outcome.rows.push_back(lr);
        }
        return outcome;
    }
    if (c.mlmc_mode != "tol")
        throw std::invalid_argument("unknown mlmc_mode: " + c.mlmc_mode);

    MLMCConfig config;
    config.coarsest_level = c.coarsest_level;
    config.max_level = c.max_level;
    config.tol = c.tol;
    config.seed = c.seed;
    config.screening_samples = c.screening;
    const MLMCResult r = mlmc_run(config, *sampler);

    ResultRow row;
    row.experiment = c.name;
    row.method = "mlmc";
    row.param = "tol=" + std::to_string(c.tol);
    row.estimate = r.estimate;
    row.stat_err = r.stat_error;
    row.evals = r.total_work;
    row.wall_s = now_seconds(t0);
    if (r.rates.available) {
        row.alpha = r.rates.alpha;
        row.beta = r.rates.beta;
        row.gamma = r.rates.gamma;
    }
    if (r.levels.back().kurtosis_defined()) row.kurtosis_finest = r.levels.back().kurtosis();
    set_reference(row, c.reference);
    outcome.rows.push_back(row);
    outcome.converged = r.converged;
    return outcome;
}

ExperimentOutcome run_scheme_comparison(const ExperimentConfig& c) {
    if (c.model != "heston")
        throw std::invalid_argument("scheme-comparison runs on the heston model");
    ExperimentOutcome outcome;
    const SchemeKind schemes[] = {SchemeKind::EulerFullTruncation, SchemeKind::Abr,
                                  SchemeKind::HestonOu};

    for (SchemeKind scheme : schemes) {
        const auto t0 = std::chrono::steady_clock::now();
        ExperimentConfig sc = c;
        sc.scheme = scheme_name(scheme);

        // Weak-error rate over N in {2,4,8,16} against the reference value.
        if (!c.reference)
            throw std::invalid_argument("scheme-comparison requires a reference value");
        std::vector<double> xs, ys;
        for (int level = 1; level <= 4; ++level) {
            const auto sampler = make_sampler(sc, level, EstimatorKind::Smoothed);
            const McEstimate est = mc_estimate(*sampler, level, c.samples);
            const double err = std::abs(est.estimate - *c.reference);
            xs.push_back(static_cast<double>(level));
            ys.push_back(std::log2(std::max(err, 1e-12)));
        }
        ResultRow weak;
        weak.experiment = c.name;
        weak.method = "scheme-comparison";
        weak.param = sc.scheme + ":weak-rate";
        weak.estimate = -ls_slope(xs, ys);
        weak.evals = static_cast<double>(c.samples) * 4.0;
        weak.wall_s = now_seconds(t0);
        outcome.rows.push_back(weak);

        // First-difference decay along the volatility coordinates at the base
        // step count.
        int dim = 0;
        const Integrand f = make_integrand(sc, c.steps, dim);
        NodeValueCache cache(dim);
        long long evals = 0;
        std::vector<double> rates;
        for (int coord = 0; coord < c.steps; ++coord) {
            std::vector<double> ks, logd;
            for (int k = 1; k <= 3; ++k) {
                MultiIndex beta(dim, 0);
                beta[coord] = k;
                const double d = std::abs(delta_quadrature(beta, f, cache, evals));
                ks.push_back(static_cast<double>(k));
                logd.push_back(std::log2(std::max(d, 1e-300)));
            }
            rates.push_back(-ls_slope(ks, logd));
        }
        ResultRow dd;
        dd.experiment = c.name;
        dd.method = "scheme-comparison";
        dd.param = sc.scheme + ":first-difference-decay";
        dd.estimate = 0.0;
        for (double r : rates) dd.estimate += r / rates.size();
        dd.evals = static_cast<double>(evals);
        dd.wall_s = now_seconds(t0);
        outcome.rows.push_back(dd);
    }
    return outcome;
}

} // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& config) {
    if (config.method == "asgq") return run_asgq(config);
    if (config.method == "mc") return run_mc(config);
    if (config.method == "mlmc") return run_mlmc(config);
    if (config.method == "scheme-comparison") return run_scheme_comparison(config);
    throw std::invalid_argument("unknown method: " + config.method);
}

ExperimentOutcome run_sweep(ExperimentConfig config, const std::vector<double>& tols) {
    if (config.method != "mlmc" || config.mlmc_mode != "tol")
        throw std::invalid_argument("sweep requires a tolerance-mode mlmc experiment");
    if (tols.empty()) throw std::invalid_argument("sweep requires a tolerance list");
    for (std::size_t i = 1; i < tols.size(); ++i)
        if (!(tols[i] < tols[i - 1]))
            throw std::invalid_argument("sweep tolerances must be strictly decreasing");

    const EstimatorKind kind = estimator_kind(config);
    const auto sampler = make_sampler(config, config.coarsest_level, kind);
    MLMCConfig base;
    base.coarsest_level = config.coarsest_level;
    base.max_level = config.max_level;
    base.seed = config.seed;
    base.screening_samples = config.screening;

    ExperimentOutcome outcome;
    const auto t0 = std::chrono::steady_clock::now();
    const auto rows = complexity_sweep(base, *sampler, tols);
    for (const auto& sweep_row : rows) {
        ResultRow row;
        row.experiment = config.name;
        row.method = "mlmc-sweep";
        row.param = "tol=" + std::to_string(sweep_row.tol);
        row.estimate = sweep_row.result.estimate;
        row.stat_err = sweep_row.result.stat_error;
        row.evals = sweep_row.result.allocated_work;
        row.wall_s = now_seconds(t0);
        if (sweep_row.result.rates.available) {
            row.alpha = sweep_row.result.rates.alpha;
            row.beta = sweep_row.result.rates.beta;
            row.gamma = sweep_row.result.rates.gamma;
        }
        set_reference(row, config.reference);
        outcome.rows.push_back(row);
        outcome.converged = outcome.converged && sweep_row.result.converged;
    }
    return outcome;
}

} // namespace numsmooth
