#pragma once

// Manufactured-solution runs and temporal convergence studies.
//
// Exact fields on (0,1)^2:
//   E = t^3       ((x^2+1) sin(pi y),  sin(pi x)(y-1/2))
//   P = (1-e^-t)  ((x^2+1) y(y-1),     x(x-1)(y-1/2))
//   H = e^-t      (x^3+1)(y^3+1)
// The sources are the residuals of these fields in the three equations; the
// memory term uses int_0^t omega(t-s) s^3 ds = 6 e^b_{a,ab+4}(t;-1).

#include "hnmx/hn_stepper.hpp"
#include "hnmx/special_fn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace hnmx {

namespace manufactured {

inline Vec2 e_shape(double x, double y) {
  using std::numbers::pi;
  return {(x * x + 1.0) * std::sin(pi * y), std::sin(pi * x) * (y - 0.5)};
}

inline Vec2 p_shape(double x, double y) {
  return {(x * x + 1.0) * y * (y - 1.0), x * (x - 1.0) * (y - 0.5)};
}

inline double h_shape(double x, double y) { return (x * x * x + 1.0) * (y * y * y + 1.0); }

inline Vec2 exact_E(double x, double y, double t) {
  const Vec2 s = e_shape(x, y);
  const double f = t * t * t;
  return {f * s[0], f * s[1]};
}

inline Vec2 exact_P(double x, double y, double t) {
  const Vec2 s = p_shape(x, y);
  const double f = -std::expm1(-t);
  return {f * s[0], f * s[1]};
}

inline double exact_H(double x, double y, double t) { return std::exp(-t) * h_shape(x, y); }

} // namespace manufactured

/// Sources making the manufactured fields an exact solution.
/// The g3 closure caches its time factor; the returned set is meant for a
/// single stepper (do not share one instance across threads).
inline SourceSet manufactured_sources(const HNParams& params) {
  params.validate();
  using std::numbers::pi;
  const double eps_inf = params.eps_inf;
  const double deps = params.delta_eps;
  const double a = params.alpha, b = params.beta;

  SourceSet s;
  s.g1 = [eps_inf](double x, double y, double t) -> Vec2 {
    const Vec2 e = manufactured::e_shape(x, y);
    const Vec2 p = manufactured::p_shape(x, y);
    const double em = std::exp(-t);
    // curl H = (dH/dy, -dH/dx)
    const double dhdy = em * (x * x * x + 1.0) * 3.0 * y * y;
    const double dhdx = em * 3.0 * x * x * (y * y * y + 1.0);
    const double dt_e = 3.0 * t * t;
    return {eps_inf * dt_e * e[0] + em * p[0] - dhdy,
            eps_inf * dt_e * e[1] + em * p[1] + dhdx};
  };
  s.g2 = [](double x, double y, double t) {
    // dH/dt + curl E, curl E = dE2/dx - dE1/dy
    const double curl_e =
        t * t * t * (pi * std::cos(pi * x) * (y - 0.5) - (x * x + 1.0) * pi * std::cos(pi * y));
    return -std::exp(-t) * manufactured::h_shape(x, y) + curl_e;
  };

  struct Cache {
    double t = std::numeric_limits<double>::quiet_NaN();
    double memory = 0.0;
  };
  auto cache = std::make_shared<Cache>();
  s.g3 = [deps, a, b, cache](double x, double y, double t) -> Vec2 {
    if (t != cache->t) {
      cache->memory = prabhakar_integral_monomial(a, b, 3, t);
      cache->t = t;
    }
    const Vec2 p = manufactured::exact_P(x, y, t);
    const Vec2 e = manufactured::e_shape(x, y);
    return {p[0] - deps * cache->memory * e[0], p[1] - deps * cache->memory * e[1]};
  };
  return s;
}

struct RateRow {
  double tau;
  double err;
  double rate; ///< NaN for the first row
};

/// rate_i = log2(err_{i-1} / err_i) for step sizes halving at each entry.
inline std::vector<double> observed_rates(const std::vector<std::pair<double, double>>& tau_err) {
  std::vector<double> rates;
  for (std::size_t i = 0; i < tau_err.size(); ++i) {
    if (!(tau_err[i].second > 0.0))
      throw std::invalid_argument("observed_rates: errors must be positive");
    if (i == 0)
      continue;
    const double q = tau_err[i - 1].first / tau_err[i].first;
    if (std::fabs(q - 2.0) > 1e-9)
      throw std::invalid_argument("observed_rates: step sizes must halve");
    rates.push_back(std::log2(tau_err[i - 1].second / tau_err[i].second));
  }
  return rates;
}

enum class ErrorMode { VsExact, VsReference };

struct ErrorRow {
  double tau = 0.0;
  double err_E = 0.0, rate_E = std::numeric_limits<double>::quiet_NaN();
  double err_H = 0.0, rate_H = std::numeric_limits<double>::quiet_NaN();
  double err_P = 0.0, rate_P = std::numeric_limits<double>::quiet_NaN();
};

struct ErrorReport {
  ErrorMode mode = ErrorMode::VsReference;
  double tau_ref = 0.0;
  std::vector<ErrorRow> rows;
};

struct ConvergenceOptions {
  double final_time = 1.0;
  ErrorMode mode = ErrorMode::VsReference;
  double tau_ref = 0.0; ///< 0: min(tau)/8
};

namespace detail {

inline std::size_t step_count(double T, double tau) {
  const double n = T / tau;
  const double r = std::round(n);
  if (r < 1.0 || std::fabs(n - r) > 1e-9 * std::max(1.0, r))
    throw std::invalid_argument("final time must be an integer multiple of tau");
  return static_cast<std::size_t>(r);
}

inline HNStepper manufactured_stepper(const AssembledOperators& ops, const HNParams& params,
                                      double tau, std::size_t steps) {
  const Eigen::VectorXd e0 = interpolate_E(ops.mesh, manufactured::exact_E, 0.0);
  const Eigen::VectorXd h0 = interpolate_H(ops.mesh, manufactured::exact_H, 0.0);
  return HNStepper(ops, params, tau, steps, manufactured_sources(params), e0, h0);
}

inline double edge_norm(const AssembledOperators& ops, const Eigen::VectorXd& d_full) {
  return std::sqrt(std::max(0.0, d_full.dot(ops.mass_full * d_full)));
}

inline double cell_norm(const AssembledOperators& ops, const Eigen::VectorXd& d) {
  return std::sqrt(d.dot(ops.mass_h.cwiseProduct(d)));
}

} // namespace detail

/// Max-over-time errors of the manufactured problem for each tau, with
/// observed rates. VsReference compares against a fine-step run on the same
/// mesh, which removes the spatial error floor.
inline ErrorReport run_convergence(const AssembledOperators& ops, const HNParams& params,
                                   std::vector<double> taus, const ConvergenceOptions& opt = {}) {
  if (taus.empty())
    throw std::invalid_argument("run_convergence: empty tau list");
  const double T = opt.final_time;
  ErrorReport report;
  report.mode = opt.mode;

  std::vector<FieldVectors> ref; // reference fields at multiples of tau_min
  std::size_t ref_stride = 0;
  if (opt.mode == ErrorMode::VsReference) {
    const double tau_min = *std::min_element(taus.begin(), taus.end());
    const double tau_ref = opt.tau_ref > 0.0 ? opt.tau_ref : tau_min / 8.0;
    if (tau_ref > tau_min / 8.0 * (1.0 + 1e-12))
      throw std::invalid_argument("run_convergence: tau_ref must be <= min(tau)/8");
    report.tau_ref = tau_ref;
    const std::size_t n_ref = detail::step_count(T, tau_ref);
    ref_stride = detail::step_count(tau_min, tau_ref);
    HNStepper st = detail::manufactured_stepper(ops, params, tau_ref, n_ref);
    ref.push_back(st.fields());
    for (std::size_t s = 1; s <= n_ref; ++s) {
      st.step();
      if (s % ref_stride == 0)
        ref.push_back(st.fields());
    }
  }

  const double tau_min = *std::min_element(taus.begin(), taus.end());
  std::vector<std::pair<double, double>> eE, eH, eP;
  for (double tau : taus) {
    const std::size_t n = detail::step_count(T, tau);
    const std::size_t stride = detail::step_count(tau, tau_min); // ref index per coarse step
    HNStepper st = detail::manufactured_stepper(ops, params, tau, n);
    ErrorRow row;
    row.tau = tau;
    for (std::size_t s = 0;; ++s) {
      const FieldVectors f = st.fields();
      double dE, dH, dP;
      if (opt.mode == ErrorMode::VsReference) {
        const FieldVectors& r = ref.at(s * stride);
        dE = detail::edge_norm(ops, f.e - r.e);
        dH = detail::cell_norm(ops, f.h - r.h);
        dP = detail::edge_norm(ops, f.p - r.p);
      } else {
        const double t = st.time();
        dE = l2_error_edge(ops.mesh, f.e, manufactured::exact_E, t);
        dH = l2_error_cell(ops.mesh, f.h, manufactured::exact_H, t);
        dP = l2_error_edge(ops.mesh, f.p, manufactured::exact_P, t);
      }
      row.err_E = std::max(row.err_E, dE);
      row.err_H = std::max(row.err_H, dH);
      row.err_P = std::max(row.err_P, dP);
      if (s == n)
        break;
      st.step();
    }
    report.rows.push_back(row);
    eE.emplace_back(tau, row.err_E);
    eH.emplace_back(tau, row.err_H);
    eP.emplace_back(tau, row.err_P);
  }

  // rates only between consecutive halving entries
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    auto& row = report.rows[i];
    const auto& prev = report.rows[i - 1];
    if (std::fabs(prev.tau / row.tau - 2.0) > 1e-9)
      continue;
    row.rate_E = observed_rates({eE[i - 1], eE[i]}).front();
    row.rate_H = observed_rates({eH[i - 1], eH[i]}).front();
    row.rate_P = observed_rates({eP[i - 1], eP[i]}).front();
  }
  return report;
}

inline void write_error_csv(std::ostream& os, const ErrorReport& rep) {
  os << "tau,err_E,rate_E,err_H,rate_H,err_P,rate_P\n";
  const auto old = os.precision(17);
  auto rate = [&os](double r) {
    if (!std::isnan(r))
      os << r;
  };
  for (const auto& r : rep.rows) {
    os << r.tau << ',' << r.err_E << ',';
    rate(r.rate_E);
    os << ',' << r.err_H << ',';
    rate(r.rate_H);
    os << ',' << r.err_P << ',';
    rate(r.rate_P);
    os << '\n';
  }
  os.precision(old);
}

} // namespace hnmx
