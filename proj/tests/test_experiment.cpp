#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "wavest/experiment.hpp"

using namespace wavest;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text, ExperimentKind kind) {
    std::istringstream in(text);
    return parse_config(in, kind);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("wavest_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(WAVEXT_BINARY) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const std::string small_solve = "preset = linear-in-time\np = 2\nq = 1\nq = 2\nmesh = 2\ntau = 0.5\ntau = 0.25\n";

} // namespace

TEST(Config, ParsesListsAndComments) {
    const auto cfg = parse("# header\nexperiment = converge-tau\n  p = 3  \nq = 1\nq = 2 # trailing\nmesh = 4\n"
                           "tau = 0.5\ntau = 0.25\nmethod = I\nmethod = mass\nbc_mode = naive\n",
                           ExperimentKind::ConvergeTau);
    EXPECT_EQ(cfg.p, std::vector<int>{3});
    EXPECT_EQ(cfg.q, (std::vector<int>{1, 2}));
    EXPECT_EQ(cfg.taus, (std::vector<double>{0.5, 0.25}));
    ASSERT_EQ(cfg.methods.size(), 2u);
    EXPECT_EQ(cfg.methods[1], MethodVariant::MassCoupling);
    EXPECT_EQ(cfg.bcs, std::vector<BcMode>{BcMode::NaiveLagrangeInTime});
    EXPECT_EQ(cfg.profiles, std::vector<std::string>{""});
    EXPECT_EQ(cfg.samples_per_slab, default_samples_per_slab);
}

TEST(Config, PqAndProfiles) {
    const auto pq = parse("pq = 1\npq = 2\nmesh = 2\ntau = 0.5\n", ExperimentKind::ConvergePQ);
    EXPECT_EQ(pq.p, pq.q);
    const auto est = parse("preset = estimator-poly\nprofile = cos4\nprofile = t^2.25\np = 4\nq = 1\nmesh = 2\ntau = 0.5\n",
                           ExperimentKind::Estimate);
    EXPECT_EQ(est.profiles, (std::vector<std::string>{"cos4", "t^2.25"}));
}

TEST(Config, Errors) {
    const std::string ok = "p = 2\nq = 1\nmesh = 2\ntau = 0.5\n";
    EXPECT_NO_THROW(parse(ok, ExperimentKind::Solve));
    EXPECT_THROW(parse("experiment = energy\n" + ok, ExperimentKind::Solve), ConfigError);
    EXPECT_THROW(parse("colour = red\n" + ok, ExperimentKind::Solve), ConfigError);
    EXPECT_THROW(parse("p = 2\nq = 1\nmesh = 2\n", ExperimentKind::Solve), ConfigError);
    EXPECT_THROW(parse("p = 2x\nq = 1\nmesh = 2\ntau = 0.5\n", ExperimentKind::Solve), ConfigError);
    EXPECT_THROW(parse("p = 2\nq = 0\nmesh = 2\ntau = 0.5\n", ExperimentKind::Solve), ConfigError);
    EXPECT_THROW(parse("p = 2\nq = 1\nmesh = 2\ntau = -0.5\n", ExperimentKind::Solve), ConfigError);
    EXPECT_THROW(parse("method = III\n" + ok, ExperimentKind::Solve), ConfigError);
    EXPECT_THROW(parse("bc_mode = exact\n" + ok, ExperimentKind::Solve), ConfigError);
    EXPECT_THROW(parse("preset = nowhere\n" + ok, ExperimentKind::Solve), ConfigError);
    EXPECT_THROW(parse("profile = cos4\n" + ok, ExperimentKind::Solve), ConfigError);
    EXPECT_THROW(parse("preset = estimator-poly\nprofile = sin\n" + ok, ExperimentKind::Solve), ConfigError);
    EXPECT_THROW(parse(ok, ExperimentKind::Estimate), ConfigError); // dirichlet-cos has g_D != 0
    EXPECT_THROW(parse("samples_per_slab = 2\n" + ok, ExperimentKind::Solve), ConfigError);
    EXPECT_THROW(parse("p 2\n" + ok, ExperimentKind::Solve), ConfigError);
    EXPECT_THROW(parse("p = 1\np = 2\nq = 1\nq = 1\nmesh = 2\ntau = 0.5\n", ExperimentKind::ConvergePQ), ConfigError);
    EXPECT_THROW(parse_experiment("converge-x"), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/file.cfg", ExperimentKind::Solve), ConfigError);
}

TEST(Config, ShippedConfigsParse) {
    for (const auto& [file, kind] :
         std::vector<std::pair<std::string, ExperimentKind>>{{"converge_h.cfg", ExperimentKind::ConvergeH},
                                                             {"converge_h_full.cfg", ExperimentKind::ConvergeH},
                                                             {"converge_tau.cfg", ExperimentKind::ConvergeTau},
                                                             {"converge_pq.cfg", ExperimentKind::ConvergePQ},
                                                             {"estimate_smooth.cfg", ExperimentKind::Estimate},
                                                             {"estimate_singular.cfg", ExperimentKind::Estimate},
                                                             {"energy.cfg", ExperimentKind::Energy},
                                                             {"solve.cfg", ExperimentKind::Solve}}) {
        EXPECT_NO_THROW(load_config(std::string(WAVEST_CONFIG_DIR) + "/" + file, kind)) << file;
    }
}

TEST(RunMatrix, ExpansionOrder) {
    const auto cfg = parse("method = I\nmethod = II\np = 2\nq = 1\nq = 2\nmesh = 2\nmesh = 4\ntau = 0.5\n",
                           ExperimentKind::Solve);
    const auto cells = expand(cfg);
    ASSERT_EQ(cells.size(), 8u);
    for (std::size_t k = 0; k < cells.size(); ++k) EXPECT_EQ(cells[k].run_id, static_cast<int>(k) + 1);
    EXPECT_EQ(cells[0].method, MethodVariant::GradientCoupling);
    EXPECT_EQ(cells[4].method, MethodVariant::MassCoupling);
    EXPECT_EQ(cells[1].mesh, 4);
    EXPECT_EQ(cells[2].q, 2);

    const auto pq = parse("pq = 1\npq = 2\npq = 3\nmesh = 2\ntau = 0.5\n", ExperimentKind::ConvergePQ);
    const auto pcells = expand(pq);
    ASSERT_EQ(pcells.size(), 3u);
    for (const auto& c : pcells) EXPECT_EQ(c.p, c.q);
}

TEST(RunMatrix, TauMustDivideFinalTime) {
    const auto cfg = parse("p = 2\nq = 1\nmesh = 2\ntau = 0.3\n", ExperimentKind::Solve);
    EXPECT_THROW(run_cell(cfg, expand(cfg).front()), ConfigError);
}

TEST(RunMatrix, CellResults) {
    const auto cfg = parse(small_solve, ExperimentKind::Solve);
    const auto results = run_experiment(cfg);
    ASSERT_EQ(results.size(), 4u);
    for (const auto& r : results) {
        ASSERT_TRUE(r.err_u.has_value());
        EXPECT_LE(*r.err_u, 1e-10);
        EXPECT_FALSE(r.eta.has_value());
        EXPECT_NEAR(r.h, std::sqrt(2.0) / 2.0, 1e-15);
    }
    // 2 fields x 25 dofs x (N q + 1) time coefficients
    EXPECT_EQ(results[0].spacetime_dofs, 2LL * 25 * 3);
    EXPECT_EQ(results[3].spacetime_dofs, 2LL * 25 * 9);
}

TEST(Csv, Formatting) {
    EXPECT_EQ(format_number(0.5), "5.00000000000e-01");
    EXPECT_EQ(format_number(-1234.5), "-1.23450000000e+03");
    EXPECT_EQ(format_optional(std::nullopt), "");
    EXPECT_EQ(csv_field("plain"), "plain");
    EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
    EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    EXPECT_EQ(csv_field("two\nlines"), "\"two\nlines\"");
}

TEST(Csv, RowsAndDeterminism) {
    const auto cfg = parse(small_solve, ExperimentKind::Solve);
    std::ostringstream a;
    std::ostringstream b;
    std::ostringstream c;
    write_csv(a, cfg, run_experiment(cfg, 1));
    write_csv(b, cfg, run_experiment(cfg, 1));
    write_csv(c, cfg, run_experiment(cfg, 3));
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(a.str(), c.str());

    std::istringstream in(a.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, std::string(csv_header()) + "\r");
    std::getline(in, line);
    EXPECT_EQ(line.rfind("1,solve,I,ptau,2,1,", 0), 0u);
    // eta, osc_f and effectivity are empty outside the estimate experiment
    EXPECT_NE(line.find(",,,"), std::string::npos);
    int rows = 1;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 4);
}

TEST(Rates, SeriesAndReport) {
    const auto cfg = parse("preset = dirichlet-cos\np = 6\nq = 1\nq = 2\nmesh = 4\ntau = 0.25\ntau = 0.125\ntau = 0.0625\n",
                           ExperimentKind::ConvergeTau);
    const auto results = run_experiment(cfg);
    const auto series = rate_series(cfg, results);
    ASSERT_EQ(series.size(), 2u);
    EXPECT_EQ(series[0].rows.size(), 3u);
    const auto rates = series_rates(cfg.experiment, series[1]);
    ASSERT_FALSE(rates.empty());
    EXPECT_EQ(rates[0].quantity, "err_u");
    EXPECT_NEAR(*rates[0].rates.back(), 3.0, 0.3);
    const auto report = rates_report(cfg, results);
    EXPECT_NE(report.find("q=2"), std::string::npos);
    EXPECT_NE(report.find("err_ustar"), std::string::npos);
    EXPECT_TRUE(check_results(cfg, results).empty());
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch("cli");
    const std::string cfgdir = WAVEST_CONFIG_DIR;
    EXPECT_EQ(run_cli("solve --config " + cfgdir + "/solve.cfg --out " + dir.string()), 0);
    EXPECT_TRUE(fs::exists(dir / "results.csv"));
    EXPECT_TRUE(fs::exists(dir / "rates.txt"));
    EXPECT_TRUE(fs::exists(dir / "run.log"));

    EXPECT_EQ(run_cli("energy --check --config " + cfgdir + "/energy.cfg --out " + dir.string()), 0);
    EXPECT_EQ(run_cli("solve --config /nonexistent.cfg --out " + dir.string()), 2);
    EXPECT_EQ(run_cli("warp --config " + cfgdir + "/solve.cfg --out " + dir.string()), 2);
    EXPECT_EQ(run_cli("solve"), 2);
    EXPECT_EQ(run_cli("solve --jobs 0 --config " + cfgdir + "/solve.cfg"), 2);
    EXPECT_EQ(run_cli("energy --config " + cfgdir + "/solve.cfg --out " + dir.string()), 2);

    // a temporally underresolved h-study cannot show the spatial rate
    {
        std::ofstream bad(dir / "bad_h.cfg");
        bad << "p = 2\nq = 1\nmesh = 2\nmesh = 4\ntau = 0.5\n";
    }
    EXPECT_EQ(run_cli("converge-h --config " + (dir / "bad_h.cfg").string() + " --out " + dir.string()), 0);
    EXPECT_EQ(run_cli("converge-h --check --config " + (dir / "bad_h.cfg").string() + " --out " + dir.string()), 4);
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    const std::string cfg = std::string(WAVEST_CONFIG_DIR) + "/solve.cfg";
    ASSERT_EQ(run_cli("solve --config " + cfg + " --out " + a.string()), 0);
    ASSERT_EQ(run_cli("solve --jobs 2 --config " + cfg + " --out " + b.string()), 0);
    EXPECT_EQ(slurp(a / "results.csv"), slurp(b / "results.csv"));
    EXPECT_EQ(slurp(a / "rates.txt"), slurp(b / "rates.txt"));
}
