#include "numsmooth/experiments.hpp"
#include "numsmooth/results.hpp"

#include "CLI11.hpp"

#include <omp.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNotConverged = 3;

std::string resolve_output(const std::string& requested, const std::string& fallback_name) {
    std::string path = requested;
    if (path.empty()) path = fallback_name + ".csv";
    if (std::filesystem::path(path).is_relative()) {
        if (const char* dir = std::getenv("NUMSMOOTH_OUT_DIR"))
            path = (std::filesystem::path(dir) / path).string();
    }
    return path;
}

numsmooth::ExperimentConfig load_config(const std::string& spec) {
    if (std::filesystem::exists(spec)) return numsmooth::parse_config_file(spec);
    return numsmooth::preset(spec);
}

void print_rows(const std::vector<numsmooth::ResultRow>& rows) {
    std::printf("%s\n", numsmooth::kCsvHeader);
    for (const auto& row : rows) std::printf("%s\n", numsmooth::to_csv_line(row).c_str());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical-smoothing estimator toolkit"};
    app.require_subcommand(1);

    std::string target;
    double tol_override = 0.0;
    std::uint64_t seed_override = 0;
    int threads = 0;
    std::string out_override;
    std::string tols_csv;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("experiment", target, "preset name or config file")->required();
        cmd->add_option("--tol", tol_override, "tolerance override");
        cmd->add_option("--seed", seed_override, "seed override");
        cmd->add_option("--threads", threads, "cap worker threads");
        cmd->add_option("--out", out_override, "output CSV path");
    };

    CLI::App* run_cmd = app.add_subcommand("run", "run one experiment");
    add_common(run_cmd);

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "tolerance sweep of an mlmc experiment");
    add_common(sweep_cmd);
    sweep_cmd->add_option("--tols", tols_csv, "comma-separated decreasing tolerances");

    CLI::App* list_cmd = app.add_subcommand("list-presets", "list built-in experiments");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (list_cmd->parsed()) {
            for (const auto& name : numsmooth::preset_names()) {
                const auto c = numsmooth::preset(name);
                std::printf("%-32s %-18s %s/%s\n", name.c_str(), c.method.c_str(),
                            c.model.c_str(), c.payoff.c_str());
            }
            return kExitOk;
        }

        numsmooth::ExperimentConfig config = load_config(target);
        if (tol_override > 0.0) config.tol = tol_override;
        if (seed_override != 0) config.seed = seed_override;
        if (threads > 0) omp_set_num_threads(threads);
        if (!out_override.empty()) config.out = out_override;

        numsmooth::ExperimentOutcome outcome;
        if (sweep_cmd->parsed()) {
            std::vector<double> tols = config.sweep_tols;
            if (!tols_csv.empty()) {
                tols.clear();
                std::size_t pos = 0;
                while (pos < tols_csv.size()) {
                    const auto comma = tols_csv.find(',', pos);
                    tols.push_back(std::stod(tols_csv.substr(pos, comma - pos)));
                    if (comma == std::string::npos) break;
                    pos = comma + 1;
                }
            }
            outcome = numsmooth::run_sweep(config, tols);
        } else {
            outcome = numsmooth::run_experiment(config);
        }

        print_rows(outcome.rows);
        const std::string out_path = resolve_output(config.out, config.name);
        numsmooth::write_csv(out_path, outcome.rows);
        std::fprintf(stderr, "wrote %zu rows to %s\n", outcome.rows.size(), out_path.c_str());
        return outcome.converged ? kExitOk : kExitNotConverged;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNotConverged;
    }
}
