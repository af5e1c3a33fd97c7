// wavext: batch driver for space-time wave experiments.
//
//   wavext <experiment> --config <path> [--out <dir>] [--jobs <n>] [--check]
//
// Exit codes: 0 success, 2 configuration error, 3 solver failure,
// 4 acceptance thresholds not met (only with --check).

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "wavest/experiment.hpp"

namespace {

constexpr int exit_config = 2;
constexpr int exit_solver = 3;
constexpr int exit_check = 4;

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw wavest::ConfigError("cannot write " + path.string());
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Space-time finite element experiments for the acoustic wave equation"};
    std::string experiment;
    std::string config_path;
    std::string out_dir = ".";
    int jobs = 1;
    bool check = false;

    std::vector<std::string> names;
    for (const auto& [n, k] : wavest::experiment_names()) names.push_back(n);
    app.add_option("experiment", experiment, "Experiment to run")->required()->check(CLI::IsMember(names));
    app.add_option("--config", config_path, "Run configuration (key = value lines)")->required();
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--jobs", jobs, "Number of run cells executed concurrently")->check(CLI::PositiveNumber);
    app.add_flag("--check", check, "Exit with status 4 when acceptance thresholds are not met");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    try {
        const auto kind = wavest::parse_experiment(experiment);
        const auto cfg = wavest::load_config(config_path, kind);
        const std::filesystem::path dir(out_dir);
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) throw wavest::ConfigError("cannot create output directory " + out_dir);

        auto log = open_output(dir / "run.log");
        log << "experiment " << experiment << ", config " << config_path << ", jobs " << jobs << "\n";
        const auto results = wavest::run_experiment(cfg, jobs, [&](const wavest::RunResult& r) {
            char line[256];
            std::snprintf(line, sizeof line, "run %d: method %s bc %s p %d q %d mesh %d tau %.6g  %.2fs\n",
                          r.cell.run_id, wavest::to_string(r.cell.method).c_str(),
                          wavest::to_string(r.cell.bc).c_str(), r.cell.p, r.cell.q, r.cell.mesh, r.cell.tau,
                          r.seconds);
            log << line << std::flush;
            std::cerr << line;
        });

        auto csv = open_output(dir / "results.csv");
        wavest::write_csv(csv, cfg, results);
        auto rates = open_output(dir / "rates.txt");
        const auto report = wavest::rates_report(cfg, results);
        rates << report;
        std::cout << report;

        if (check) {
            const auto failures = wavest::check_results(cfg, results);
            for (const auto& f : failures) {
                std::cerr << "check failed: " << f << "\n";
                log << "check failed: " << f << "\n";
            }
            if (!failures.empty()) return exit_check;
            log << "all checks passed\n";
        }
        return 0;
    } catch (const wavest::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return exit_config;
    } catch (const wavest::InvalidArgument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return exit_config;
    } catch (const wavest::SolverFailure& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return exit_solver;
    }
}
