#include "hnmx/harness.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hnmx_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// drop `#` comment lines before comparing outputs
std::string strip_comments(const std::string& s) {
  std::istringstream in(s);
  std::string line, out;
  while (std::getline(in, line))
    if (line.empty() || line[0] != '#')
      out += line + '\n';
  return out;
}

hnmx::ConfigMap parse(const std::string& text) {
  std::istringstream in(text);
  return hnmx::parse_config_text(in);
}

TEST(ObservedRates, Examples) {
  const auto r = hnmx::observed_rates({{0.1, 1e-2}, {0.05, 2.5e-3}});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_DOUBLE_EQ(r[0], 2.0);
  EXPECT_DOUBLE_EQ(hnmx::observed_rates({{0.1, 3e-3}, {0.05, 3e-3}})[0], 0.0);
}

TEST(ObservedRates, PublishedErrorSequence) {
  const auto r = hnmx::observed_rates({{0.2, 4.4878e-3}, {0.1, 1.1275e-3}, {0.05, 2.8143e-4}});
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(r[0], 1.99, 0.005);
  EXPECT_NEAR(r[1], 2.00, 0.005);
}

TEST(ObservedRates, Errors) {
  EXPECT_THROW(hnmx::observed_rates({{0.1, 0.0}}), std::invalid_argument);
  EXPECT_THROW(hnmx::observed_rates({{0.1, 1e-3}, {0.03, 1e-4}}), std::invalid_argument);
}

TEST(Config, ParsesTextWithComments) {
  const auto m = parse("# comment\nexperiment = energy\n\n alpha=0.1,0.3  # trailing\n");
  EXPECT_EQ(m.at("experiment"), "energy");
  EXPECT_EQ(m.at("alpha"), "0.1,0.3");
  EXPECT_THROW(parse("no equals sign\n"), hnmx::ConfigError);
}

TEST(Config, Defaults) {
  const auto cm = hnmx::make_config({{"experiment", "cm-check"}});
  EXPECT_EQ(cm.alphas.size(), 19u);
  EXPECT_EQ(cm.betas.size(), 19u);
  EXPECT_EQ(cm.J, 1000u);
  EXPECT_EQ(cm.k_max, 3);
  EXPECT_EQ(cm.taus, std::vector<double>{0.01});

  const auto cv = hnmx::make_config({{"experiment", "convergence"}});
  EXPECT_EQ(cv.nx, 100);
  EXPECT_EQ(cv.taus, (std::vector<double>{0.1, 0.05, 0.025}));

  const auto en = hnmx::make_config({{"experiment", "energy"}});
  EXPECT_EQ(en.nx, 32);
  EXPECT_EQ(en.alphas.size(), 5u);
}

TEST(Config, RejectsBadInput) {
  auto field_of = [](const hnmx::ConfigMap& m) {
    try {
      (void)hnmx::make_config(m);
    } catch (const hnmx::ConfigError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(field_of({{"experiment", "weights"}, {"bogus", "1"}}), "bogus");
  EXPECT_EQ(field_of({{"alpha", "0.5"}}), "experiment");
  EXPECT_EQ(field_of({{"experiment", "plot"}}), "experiment");
  EXPECT_EQ(field_of({{"experiment", "weights"}, {"alpha", "1.0"}}), "alpha");
  EXPECT_EQ(field_of({{"experiment", "weights"}, {"alpha", "abc"}}), "alpha");
  EXPECT_EQ(field_of({{"experiment", "weights"}, {"scheme", "rk4"}}), "scheme");
  EXPECT_EQ(field_of({{"experiment", "energy"}, {"tau", "0.3"}}), "tau");
  EXPECT_EQ(field_of({{"experiment", "convergence"}, {"tau", "0.1,0.04"}}), "tau");
  EXPECT_EQ(field_of({{"experiment", "convergence"}, {"tau_ref", "0.01"}}), "tau_ref");
  EXPECT_EQ(field_of({{"experiment", "cm-check"}, {"J", "2"}, {"kmax", "3"}}), "kmax");
  EXPECT_EQ(field_of({{"experiment", "energy"}, {"eps_inf", "0.5"}}), "eps_inf");
  // alpha = 1 is fine where the stepper handles it
  EXPECT_EQ(field_of({{"experiment", "energy"}, {"alpha", "1"}}), "<none>");
}

TEST(Run, WeightsCsvAndChecks) {
  auto c = hnmx::make_config({{"experiment", "weights"}, {"J", "50"}, {"check", "true"}});
  c.out_dir = scratch_dir("weights");
  const auto res = hnmx::run(c);
  ASSERT_EQ(res.files.size(), 1u);
  EXPECT_EQ(res.files[0].filename(), "weights_cm2.csv");
  EXPECT_TRUE(res.all_passed());
  const std::string body = strip_comments(slurp(res.files[0]));
  EXPECT_EQ(body.rfind("j,w_j\n0,", 0), 0u);
}

TEST(Run, RerunsAreByteIdentical) {
  auto c = hnmx::make_config({{"experiment", "cm-check"},
                              {"grid_step", "0.25"},
                              {"J", "200"},
                              {"threads", "3"}});
  c.out_dir = scratch_dir("rerun_a");
  const auto a = slurp(hnmx::run(c).files.at(0));
  c.out_dir = scratch_dir("rerun_b");
  c.threads = 1;
  const auto b = slurp(hnmx::run(c).files.at(0));
  EXPECT_EQ(strip_comments(a), strip_comments(b));
  EXPECT_EQ(a.front(), '#');
}

TEST(Run, EnergyExperimentPasses) {
  auto c = hnmx::make_config({{"experiment", "energy"},
                              {"alpha", "0.5"},
                              {"beta", "0.5"},
                              {"nx", "6"},
                              {"T", "0.2"},
                              {"tau", "0.02"},
                              {"check", "1"}});
  c.out_dir = scratch_dir("energy");
  const auto res = hnmx::run(c);
  ASSERT_EQ(res.files.size(), 1u);
  EXPECT_EQ(res.files[0].filename(), "energy_a0.5_b0.5.csv");
  ASSERT_EQ(res.checks.size(), 1u);
  EXPECT_TRUE(res.checks[0].passed) << res.checks[0].detail;
}

TEST(Run, KernelExperiment) {
  auto c = hnmx::make_config({{"experiment", "kernel"}, {"points", "5"}, {"check", "true"}});
  c.out_dir = scratch_dir("kernel");
  const auto res = hnmx::run(c);
  EXPECT_TRUE(res.all_passed());
  const std::string body = strip_comments(slurp(res.files.at(0)));
  EXPECT_EQ(std::count(body.begin(), body.end(), '\n'), 6);
}

#ifdef HNMX_CLI_PATH
int run_cli(const std::string& args) {
  const std::string cmd = std::string(HNMX_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch_dir("cli");
  EXPECT_EQ(run_cli("weights --J 20 --check --out " + dir.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "weights_cm2.csv"));
  EXPECT_EQ(run_cli("weights --alpha 1.5 --out " + dir.string()), 2);
  EXPECT_NE(run_cli("not-an-experiment"), 0);
  EXPECT_EQ(run_cli("energy --nx 2 --T 0.3 --tau 0.2 --out " + dir.string()), 2);
}

TEST(Cli, ConfigFileAndEnvFallback) {
  const auto dir = scratch_dir("cli_env");
  const auto cfg = dir / "run.cfg";
  std::ofstream(cfg) << "# kernel samples\nalpha = 0.3\nbeta = 0.8\npoints = 4\n";
  const std::string env = "HNMX_OUT=" + dir.string() + " ";
  const int status = std::system((env + HNMX_CLI_PATH + " kernel --config " + cfg.string() +
                                  " > /dev/null 2>&1")
                                     .c_str());
  EXPECT_EQ(WEXITSTATUS(status), 0);
  const std::string body = slurp(dir / "kernel.csv");
  EXPECT_NE(body.find("alpha=0.3"), std::string::npos);
  EXPECT_NE(body.find("beta=0.8"), std::string::npos);
}
#endif

} // namespace
