#pragma once

// Experiment driver behind the `hnmx` command line tool. A run is described
// by a flat key=value map (config file, then command-line overrides) and
// produces CSV files, each starting with a `#` line that records the resolved
// configuration.

#include "hnmx/cm_check.hpp"
#include "hnmx/convergence.hpp"
#include "hnmx/cq_weights.hpp"
#include "hnmx/hn_stepper.hpp"
#include "hnmx/maxwell_fem.hpp"
#include "hnmx/special_fn.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace hnmx {

enum class Experiment { Weights, CmCheck, Kernel, Convergence, Energy };

inline std::optional<Experiment> parse_experiment(std::string_view s) noexcept {
  if (s == "weights") return Experiment::Weights;
  if (s == "cm-check") return Experiment::CmCheck;
  if (s == "kernel") return Experiment::Kernel;
  if (s == "convergence") return Experiment::Convergence;
  if (s == "energy") return Experiment::Energy;
  return std::nullopt;
}

inline std::string_view to_string(Experiment e) noexcept {
  switch (e) {
  case Experiment::Weights: return "weights";
  case Experiment::CmCheck: return "cm-check";
  case Experiment::Kernel: return "kernel";
  case Experiment::Convergence: return "convergence";
  case Experiment::Energy: return "energy";
  }
  return "?";
}

class ConfigError : public std::invalid_argument {
public:
  ConfigError(const std::string& field, const std::string& reason)
      : std::invalid_argument("config field '" + field + "': " + reason), field_(field) {}
  [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

using ConfigMap = std::map<std::string, std::string>;

/// Parse `key = value` lines; blank lines and `#` comments are skipped.
inline ConfigMap parse_config_text(std::istream& in) {
  ConfigMap m;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
      return std::string{};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno), "expected key=value");
    std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw ConfigError("line " + std::to_string(lineno), "empty key");
    m[key] = trim(line.substr(eq + 1));
  }
  return m;
}

inline ConfigMap parse_config_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in)
    throw ConfigError("config", "cannot open " + p.string());
  return parse_config_text(in);
}

struct ExperimentConfig {
  Experiment experiment = Experiment::Weights;
  Scheme scheme = Scheme::CM2;
  std::vector<double> alphas;
  std::vector<double> betas;
  std::vector<double> taus;
  int nx = 0, ny = 0;
  double T = 1.0;
  std::size_t J = 1000;
  int k_max = 3;
  double grid_step = 0.05;
  double tol = 1e-13;
  ErrorMode mode = ErrorMode::VsReference;
  double tau_ref = 0.0;
  double eps_inf = 1.0;
  double delta_eps = 1.0;
  double t_min = 1e-3, t_max = 10.0;
  int points = 41;
  std::filesystem::path out_dir = ".";
  bool check = false;
  unsigned threads = 0;

  /// Resolved configuration as one `# key=value ...` line.
  [[nodiscard]] std::string describe() const {
    std::ostringstream os;
    os.precision(12);
    auto list = [&os](const std::vector<double>& v) {
      for (std::size_t i = 0; i < v.size(); ++i)
        os << (i ? "," : "") << v[i];
    };
    os << "# hnmx experiment=" << to_string(experiment) << " scheme=" << to_string(scheme)
       << " alpha=";
    list(alphas);
    os << " beta=";
    list(betas);
    os << " tau=";
    list(taus);
    os << " nx=" << nx << " ny=" << ny << " T=" << T << " J=" << J << " kmax=" << k_max
       << " grid_step=" << grid_step << " tol=" << tol
       << " mode=" << (mode == ErrorMode::VsReference ? "reference" : "exact")
       << " tau_ref=" << tau_ref << " eps_inf=" << eps_inf << " delta_eps=" << delta_eps;
    if (experiment == Experiment::Kernel)
      os << " t_min=" << t_min << " t_max=" << t_max << " points=" << points;
    return os.str();
  }
};

namespace detail {

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    // accept simple fractions such as 1/320
    if (const auto slash = v.find('/'); slash != std::string::npos) {
      const double num = std::stod(v.substr(0, slash));
      const double den = std::stod(v.substr(slash + 1), &pos);
      if (pos != v.size() - slash - 1 || den == 0.0)
        throw std::invalid_argument("bad fraction");
      return num / den;
    }
    const double d = std::stod(v, &pos);
    if (pos != v.size())
      throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key, "not a number: '" + v + "'");
  }
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty())
      out.push_back(parse_double(key, item));
  if (out.empty())
    throw ConfigError(key, "empty list");
  return out;
}

inline long parse_int(const std::string& key, const std::string& v) {
  const double d = parse_double(key, v);
  if (d != std::floor(d))
    throw ConfigError(key, "not an integer: '" + v + "'");
  return static_cast<long>(d);
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError(key, "not a boolean: '" + v + "'");
}

inline void require_unit_open(const std::string& key, const std::vector<double>& v,
                              bool allow_one) {
  for (double x : v)
    if (!(x > 0.0 && (allow_one ? x <= 1.0 : x < 1.0)))
      throw ConfigError(key, allow_one ? "values must lie in (0,1]" : "values must lie in (0,1)");
}

inline std::string fmt_param(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

} // namespace detail

/// Build and validate a configuration. Every required field is checked here,
/// before any computation starts.
inline ExperimentConfig make_config(const ConfigMap& m) {
  using namespace detail;
  static const std::vector<std::string> known{
      "experiment", "scheme", "alpha", "beta", "tau",   "nx",     "ny",        "T",
      "J",          "kmax",   "grid_step", "tol", "mode", "tau_ref", "eps_inf", "delta_eps",
      "t_min",      "t_max",  "points", "out", "check", "threads"};
  for (const auto& [k, v] : m)
    if (std::find(known.begin(), known.end(), k) == known.end())
      throw ConfigError(k, "unknown key");

  ExperimentConfig c;
  auto get = [&m](const char* k) -> const std::string* {
    const auto it = m.find(k);
    return it == m.end() ? nullptr : &it->second;
  };

  const std::string* ex = get("experiment");
  if (!ex)
    throw ConfigError("experiment", "missing");
  const auto e = parse_experiment(*ex);
  if (!e)
    throw ConfigError("experiment", "unknown experiment '" + *ex + "'");
  c.experiment = *e;

  if (auto v = get("scheme")) {
    const auto s = parse_scheme(*v);
    if (!s)
      throw ConfigError("scheme", "expected cm2, bdf1 or bdf2");
    c.scheme = *s;
  }
  if (auto v = get("alpha")) c.alphas = parse_list("alpha", *v);
  if (auto v = get("beta")) c.betas = parse_list("beta", *v);
  if (auto v = get("tau")) c.taus = parse_list("tau", *v);
  if (auto v = get("nx")) c.nx = static_cast<int>(parse_int("nx", *v));
  if (auto v = get("ny")) c.ny = static_cast<int>(parse_int("ny", *v));
  if (auto v = get("T")) c.T = parse_double("T", *v);
  if (auto v = get("J")) {
    const long j = parse_int("J", *v);
    if (j < 0)
      throw ConfigError("J", "must be >= 0");
    c.J = static_cast<std::size_t>(j);
  }
  if (auto v = get("kmax")) c.k_max = static_cast<int>(parse_int("kmax", *v));
  if (auto v = get("grid_step")) c.grid_step = parse_double("grid_step", *v);
  if (auto v = get("tol")) c.tol = parse_double("tol", *v);
  if (auto v = get("mode")) {
    if (*v == "reference" || *v == "vs_reference")
      c.mode = ErrorMode::VsReference;
    else if (*v == "exact" || *v == "vs_exact")
      c.mode = ErrorMode::VsExact;
    else
      throw ConfigError("mode", "expected 'reference' or 'exact'");
  }
  if (auto v = get("tau_ref")) c.tau_ref = parse_double("tau_ref", *v);
  if (auto v = get("eps_inf")) c.eps_inf = parse_double("eps_inf", *v);
  if (auto v = get("delta_eps")) c.delta_eps = parse_double("delta_eps", *v);
  if (auto v = get("t_min")) c.t_min = parse_double("t_min", *v);
  if (auto v = get("t_max")) c.t_max = parse_double("t_max", *v);
  if (auto v = get("points")) c.points = static_cast<int>(parse_int("points", *v));
  if (auto v = get("out")) c.out_dir = *v;
  if (auto v = get("check")) c.check = parse_bool("check", *v);
  if (auto v = get("threads")) {
    const long t = parse_int("threads", *v);
    if (t < 0)
      throw ConfigError("threads", "must be >= 0");
    c.threads = static_cast<unsigned>(t);
  }

  // experiment-specific defaults and validation
  switch (c.experiment) {
  case Experiment::Weights:
  case Experiment::Kernel:
    if (c.alphas.empty()) c.alphas = {0.5};
    if (c.betas.empty()) c.betas = {0.5};
    if (c.alphas.size() != 1 || c.betas.size() != 1)
      throw ConfigError("alpha", "this experiment takes a single (alpha, beta)");
    break;
  case Experiment::CmCheck:
    if (!(c.grid_step > 0.0 && c.grid_step < 1.0))
      throw ConfigError("grid_step", "must lie in (0,1)");
    if (c.alphas.empty()) c.alphas = unit_grid(c.grid_step);
    if (c.betas.empty()) c.betas = unit_grid(c.grid_step);
    if (c.k_max < 0)
      throw ConfigError("kmax", "must be >= 0");
    if (static_cast<std::size_t>(c.k_max) > c.J)
      throw ConfigError("kmax", "must not exceed J");
    break;
  case Experiment::Convergence:
    if (c.alphas.empty()) c.alphas = {0.5};
    if (c.betas.empty()) c.betas = {0.5};
    if (c.taus.empty()) c.taus = {0.1, 0.05, 0.025};
    if (c.nx == 0) c.nx = 100;
    if (c.ny == 0) c.ny = c.nx;
    break;
  case Experiment::Energy:
    if (c.alphas.empty()) c.alphas = {0.1, 0.3, 0.5, 0.7, 0.9};
    if (c.betas.empty()) c.betas = {0.4};
    if (c.nx == 0) c.nx = 32;
    if (c.ny == 0) c.ny = c.nx;
    break;
  }
  if (c.taus.empty()) c.taus = {0.01};

  for (double t : c.taus)
    if (!(t > 0.0))
      throw ConfigError("tau", "values must be positive");
  // CM2 weights need alpha < 1; the stepper routes alpha = 1 to BDF1 itself
  const bool raw_cm2 = c.scheme == Scheme::CM2 && (c.experiment == Experiment::Weights ||
                                                   c.experiment == Experiment::CmCheck);
  const bool alpha_one_ok = !raw_cm2;
  require_unit_open("alpha", c.alphas, alpha_one_ok);
  require_unit_open("beta", c.betas, true);

  if (c.experiment == Experiment::Convergence || c.experiment == Experiment::Energy) {
    if (c.nx < 1 || c.ny < 1)
      throw ConfigError("nx", "mesh must have at least one cell per direction");
    if (!(c.T > 0.0))
      throw ConfigError("T", "must be positive");
    for (double t : c.taus) {
      const double n = c.T / t;
      if (std::fabs(n - std::round(n)) > 1e-9 * std::max(1.0, n))
        throw ConfigError("tau", "T/tau must be an integer step count");
    }
    if (!(c.eps_inf >= 1.0))
      throw ConfigError("eps_inf", "must be >= 1");
    if (!(c.delta_eps >= 0.0))
      throw ConfigError("delta_eps", "must be >= 0");
  }
  if (c.experiment == Experiment::Convergence) {
    for (std::size_t i = 1; i < c.taus.size(); ++i)
      if (std::fabs(c.taus[i - 1] / c.taus[i] - 2.0) > 1e-9)
        throw ConfigError("tau", "convergence step sizes must halve");
    if (c.mode == ErrorMode::VsReference && c.tau_ref > 0.0) {
      const double tmin = *std::min_element(c.taus.begin(), c.taus.end());
      if (c.tau_ref > tmin / 8.0 * (1.0 + 1e-12))
        throw ConfigError("tau_ref", "must be <= min(tau)/8");
      const double r = tmin / c.tau_ref;
      if (std::fabs(r - std::round(r)) > 1e-9 * r)
        throw ConfigError("tau_ref", "min(tau)/tau_ref must be an integer");
    }
  }
  if (c.experiment == Experiment::Kernel) {
    if (!(c.t_min > 0.0 && c.t_max > c.t_min))
      throw ConfigError("t_min", "need 0 < t_min < t_max");
    if (c.points < 2)
      throw ConfigError("points", "need at least 2 points");
  }
  if (!(c.tol >= 0.0))
    throw ConfigError("tol", "must be >= 0");
  return c;
}

struct CheckResult {
  std::string name;
  bool passed;
  std::string detail;
};

struct RunResult {
  std::vector<std::filesystem::path> files;
  std::vector<CheckResult> checks;

  [[nodiscard]] bool all_passed() const noexcept {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }
};

namespace detail {

inline std::ofstream open_csv(const ExperimentConfig& c, const std::string& name,
                              RunResult& res) {
  std::filesystem::create_directories(c.out_dir);
  const auto path = c.out_dir / name;
  std::ofstream os(path);
  if (!os)
    throw std::runtime_error("cannot write " + path.string());
  os << c.describe() << '\n';
  res.files.push_back(path);
  return os;
}

/// Run f(i) for i in [0, n) on up to `threads` workers; first exception wins.
template <typename F>
void parallel_for(std::size_t n, unsigned threads, F&& f) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure)
          failure = std::current_exception();
      }
    }
  };
  unsigned nt = threads ? threads : std::thread::hardware_concurrency();
  nt = std::max(1u, std::min<unsigned>(nt, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < nt; ++t)
    pool.emplace_back(worker);
  worker();
  for (auto& th : pool)
    th.join();
  if (failure)
    std::rethrow_exception(failure);
}

inline void run_weights(const ExperimentConfig& c, RunResult& res) {
  const double a = c.alphas[0], b = c.betas[0], tau = c.taus[0];
  const auto w = make_weights(c.scheme, a, b, tau, c.J);
  auto os = open_csv(c, "weights_" + std::string(to_string(c.scheme)) + ".csv", res);
  os << "j,w_j\n";
  os.precision(17);
  for (std::size_t j = 0; j < w.size(); ++j)
    os << j << ',' << w[j] << '\n';

  if (c.check && c.scheme == Scheme::CM2) {
    const auto k = CM2Constants::for_alpha(a);
    const double w0 = std::pow(1.0 + std::pow(tau, -a) * std::pow(k.c, 1.0 - a), -b);
    const double err = std::fabs(w.w[0] - w0);
    res.checks.push_back({"w0 closed form", err <= 1e-13, "|w0 - formula| = " + std::to_string(err)});
    bool mono = true;
    for (std::size_t j = 0; j < w.size(); ++j)
      mono = mono && w[j] >= 0.0 && (j == 0 || w[j] <= w[j - 1]);
    res.checks.push_back({"weights nonnegative and nonincreasing", mono, ""});
  }
}

inline void run_cm_check(const ExperimentConfig& c, RunResult& res) {
  SweepOptions opt;
  opt.scheme = c.scheme;
  opt.alphas = c.alphas;
  opt.betas = c.betas;
  opt.tau = c.taus[0];
  opt.J = c.J;
  opt.k_max = c.k_max;
  opt.threads = c.threads;
  const auto reports = sweep_grid(opt);
  auto os = open_csv(c, "cm_check_" + std::string(to_string(c.scheme)) + ".csv", res);
  write_sweep_csv(os, reports, c.tol);

  if (!c.check)
    return;
  if (c.scheme == Scheme::BDF2) {
    // the classical second-order weights are expected to lose CM
    std::vector<int> failing(c.k_max + 1, 0);
    for (const auto& r : reports)
      for (int k = 0; k <= c.k_max; ++k)
        failing[k] += r.indices[k] < -1e-8 ? 1 : 0;
    bool ok = true;
    std::string counts;
    for (int k = 1; k <= c.k_max; ++k) {
      ok = ok && failing[k] > 0 && failing[k] >= failing[k - 1];
      counts += " k" + std::to_string(k) + "=" + std::to_string(failing[k]);
    }
    res.checks.push_back({"bdf2 loses complete monotonicity", ok, "failing cells:" + counts});
  } else {
    double worst = 0.0;
    for (const auto& r : reports)
      for (double v : r.indices)
        worst = std::min(worst, v);
    res.checks.push_back({std::string(to_string(c.scheme)) + " Index_k >= -tol on grid",
                          worst >= -c.tol, "min index = " + std::to_string(worst)});
  }
}

inline void run_kernel(const ExperimentConfig& c, RunResult& res) {
  const double a = c.alphas[0], b = c.betas[0];
  auto os = open_csv(c, "kernel.csv", res);
  os << "t,omega,integral_s0\n";
  os.precision(17);
  const double la = std::log(c.t_min), lb = std::log(c.t_max);
  double prev = std::numeric_limits<double>::infinity();
  bool ok = true;
  for (int i = 0; i < c.points; ++i) {
    const double t = std::exp(la + (lb - la) * i / (c.points - 1));
    const double w = hn_kernel(a, b, t);
    os << t << ',' << w << ',' << prabhakar_integral_monomial(a, b, 0, t) << '\n';
    ok = ok && w > 0.0 && w < prev;
    prev = w;
  }
  if (c.check)
    res.checks.push_back({"kernel positive and decreasing", ok, ""});
}

inline void run_convergence_exp(const ExperimentConfig& c, RunResult& res) {
  const auto ops = assemble(build_mesh(c.nx, c.ny));
  struct Job {
    double a, b;
    ErrorReport rep;
  };
  std::vector<Job> jobs;
  for (double a : c.alphas)
    for (double b : c.betas)
      jobs.push_back({a, b, {}});
  parallel_for(jobs.size(), c.threads, [&](std::size_t i) {
    HNParams p{c.eps_inf, c.delta_eps, jobs[i].a, jobs[i].b};
    ConvergenceOptions opt{c.T, c.mode, c.tau_ref};
    jobs[i].rep = run_convergence(ops, p, c.taus, opt);
  });
  for (const auto& j : jobs) {
    auto os = open_csv(c, "convergence_a" + fmt_param(j.a) + "_b" + fmt_param(j.b) + ".csv", res);
    write_error_csv(os, j.rep);
    if (c.check) {
      bool ok = true;
      std::string rates;
      for (const auto& r : j.rep.rows)
        if (!std::isnan(r.rate_E)) {
          ok = ok && r.rate_E >= 1.8 && r.rate_E <= 2.2;
          rates += " " + std::to_string(r.rate_E);
        }
      res.checks.push_back({"E rates in [1.8,2.2] at (alpha,beta)=(" + fmt_param(j.a) + "," +
                                fmt_param(j.b) + ")",
                            ok, "rates:" + rates});
    }
  }
}

inline void run_energy_exp(const ExperimentConfig& c, RunResult& res) {
  const auto ops = assemble(build_mesh(c.nx, c.ny));
  const auto e0 = interpolate_E(
      ops.mesh, [](double x, double y, double) { return manufactured::e_shape(x, y); }, 0.0);
  const auto h0 = interpolate_H(
      ops.mesh, [](double x, double y, double) { return manufactured::h_shape(x, y); }, 0.0);

  struct Job {
    double a, b, tau;
    std::vector<EnergyRecord> trace;
  };
  std::vector<Job> jobs;
  for (double b : c.betas)
    for (double a : c.alphas)
      for (double tau : c.taus)
        jobs.push_back({a, b, tau, {}});
  parallel_for(jobs.size(), c.threads, [&](std::size_t i) {
    auto& j = jobs[i];
    const auto steps = static_cast<std::size_t>(std::llround(c.T / j.tau));
    HNStepper st(ops, {c.eps_inf, c.delta_eps, j.a, j.b}, j.tau, steps, SourceSet::zero(), e0,
                 h0, {c.scheme});
    j.trace = run_energy_trace(st, steps);
  });
  for (const auto& j : jobs) {
    std::string name = "energy_a" + fmt_param(j.a) + "_b" + fmt_param(j.b);
    if (c.taus.size() > 1)
      name += "_tau" + fmt_param(j.tau);
    auto os = open_csv(c, name + ".csv", res);
    write_energy_csv(os, j.trace);
    if (c.check) {
      const double e0v = j.trace.front().parts.total();
      double worst = -std::numeric_limits<double>::infinity();
      for (std::size_t n = 1; n < j.trace.size(); ++n)
        worst = std::max(worst, j.trace[n].parts.total() - j.trace[n - 1].parts.total());
      res.checks.push_back({"energy nonincreasing at (alpha,beta,tau)=(" + fmt_param(j.a) + "," +
                                fmt_param(j.b) + "," + fmt_param(j.tau) + ")",
                            worst <= 1e-10 * e0v,
                            "max increment / E0 = " + std::to_string(worst / e0v)});
    }
  }
}

} // namespace detail

/// Execute one experiment, writing its CSV files under `out_dir`.
inline RunResult run(const ExperimentConfig& c) {
  RunResult res;
  switch (c.experiment) {
  case Experiment::Weights: detail::run_weights(c, res); break;
  case Experiment::CmCheck: detail::run_cm_check(c, res); break;
  case Experiment::Kernel: detail::run_kernel(c, res); break;
  case Experiment::Convergence: detail::run_convergence_exp(c, res); break;
  case Experiment::Energy: detail::run_energy_exp(c, res); break;
  }
  return res;
}

} // namespace hnmx
