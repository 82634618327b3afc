#pragma once

// Convolution quadrature weights for the Havriliak-Negami kernel
// omega_{a,b} with Laplace transform (1 + s^a)^(-b).
//
// Classical CQ takes w(zeta) = (1 + (delta(zeta)/tau)^a)^(-b) for the BDF
// symbol delta. The CM2 scheme replaces (delta/tau)^a by
//   ((1-zeta)/tau)^a * G(zeta)^(1-a),   G(zeta) = c (1 - d zeta),
// with c = (2-a)/(2-2a), d = a/(2-a). -G is a (linear) Pick function, so
// w is Pick and positive on (-inf, 1): the weights are completely monotone,
// and the choice of c, d makes the scheme second order.

#include "hnmx/series.hpp"

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hnmx {

enum class Scheme { CM2, BDF1, BDF2 };

inline std::string_view to_string(Scheme s) noexcept {
  switch (s) {
  case Scheme::CM2: return "cm2";
  case Scheme::BDF1: return "bdf1";
  case Scheme::BDF2: return "bdf2";
  }
  return "?";
}

inline std::optional<Scheme> parse_scheme(std::string_view name) noexcept {
  if (name == "cm2" || name == "CM2") return Scheme::CM2;
  if (name == "bdf1" || name == "BDF1" || name == "bdf1-cq") return Scheme::BDF1;
  if (name == "bdf2" || name == "BDF2" || name == "bdf2-cq") return Scheme::BDF2;
  return std::nullopt;
}

/// Constants of the CM2 perturbation G(zeta) = -gamma1 zeta - gamma0 = c(1 - d zeta).
struct CM2Constants {
  double c;
  double d;
  double gamma0;
  double gamma1;

  static CM2Constants for_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
      throw std::domain_error("CM2Constants: alpha must lie in (0,1)");
    return {(2.0 - alpha) / (2.0 - 2.0 * alpha), alpha / (2.0 - alpha),
            -(2.0 - alpha) / (2.0 - 2.0 * alpha), alpha / (2.0 - 2.0 * alpha)};
  }
};

struct CQWeights {
  Scheme scheme = Scheme::CM2;
  double alpha = 0.5;
  double beta = 0.5;
  double tau = 0.01;
  std::vector<double> w;

  [[nodiscard]] std::size_t size() const noexcept { return w.size(); }
  [[nodiscard]] double operator[](std::size_t j) const { return w[j]; }
  [[nodiscard]] std::span<const double> view() const noexcept { return w; }
};

/// CM2 weights w_0..w_N. alpha in (0,1); beta in (0,1] (beta = 1 is the
/// Cole-Cole case, outside the range of the CM proof but still well defined).
inline CQWeights cm2_weights(double alpha, double beta, double tau, std::size_t order) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("cm2_weights: alpha must lie in (0,1); route alpha=1 to bdf1");
  if (!(beta > 0.0 && beta <= 1.0))
    throw std::domain_error("cm2_weights: beta must lie in (0,1]");
  if (!(tau > 0.0))
    throw std::domain_error("cm2_weights: tau must be positive");

  const auto k = CM2Constants::for_alpha(alpha);
  TruncatedSeries b = series_mul(binom_series(alpha, 1.0, order),
                                 binom_series(1.0 - alpha, k.d, order));
  b *= std::pow(tau, -alpha) * std::pow(k.c, 1.0 - alpha);
  b[0] += 1.0;
  return {Scheme::CM2, alpha, beta, tau, series_pow(b, -beta).vector()};
}

/// Classical CQ weights from BDF-1 or BDF-2, alpha, beta in (0,1].
inline CQWeights bdf_cq_weights(int bdf_order, double alpha, double beta, double tau,
                                std::size_t order) {
  if (bdf_order != 1 && bdf_order != 2)
    throw std::invalid_argument("bdf_cq_weights: order must be 1 or 2");
  if (!(alpha > 0.0 && alpha <= 1.0 && beta > 0.0 && beta <= 1.0))
    throw std::domain_error("bdf_cq_weights: alpha, beta must lie in (0,1]");
  if (!(tau > 0.0))
    throw std::domain_error("bdf_cq_weights: tau must be positive");

  // delta(zeta)/tau as a polynomial
  TruncatedSeries delta(order);
  if (bdf_order == 1) {
    delta[0] = 1.0;
    if (order >= 1) delta[1] = -1.0;
  } else {
    // (1-z) + (1-z)^2/2 = 3/2 - 2z + z^2/2
    delta[0] = 1.5;
    if (order >= 1) delta[1] = -2.0;
    if (order >= 2) delta[2] = 0.5;
  }
  delta *= 1.0 / tau;

  TruncatedSeries s = series_pow(delta, alpha);
  s[0] += 1.0;
  return {bdf_order == 1 ? Scheme::BDF1 : Scheme::BDF2, alpha, beta, tau,
          series_pow(s, -beta).vector()};
}

inline CQWeights make_weights(Scheme scheme, double alpha, double beta, double tau,
                              std::size_t order) {
  switch (scheme) {
  case Scheme::CM2: return cm2_weights(alpha, beta, tau, order);
  case Scheme::BDF1: return bdf_cq_weights(1, alpha, beta, tau, order);
  case Scheme::BDF2: return bdf_cq_weights(2, alpha, beta, tau, order);
  }
  throw std::invalid_argument("make_weights: unknown scheme");
}

/// tau^-1 delta(e^-tau) - 1 for the CM2 symbol
/// delta(zeta) = (1-zeta) (c(1 - d zeta))^((1-alpha)/alpha). O(tau^2).
inline double delta_consistency_residual(double alpha, double tau) {
  const auto k = CM2Constants::for_alpha(alpha);
  if (!(tau > 0.0))
    throw std::domain_error("delta_consistency_residual: tau must be positive");
  const double one_minus_q = -std::expm1(-tau);
  const double g = k.c * (1.0 - k.d * std::exp(-tau));
  const double r = (one_minus_q / tau) * std::pow(g, (1.0 - alpha) / alpha);
  return r - 1.0;
}

/// sum_{k=0..n} w_{n-k} u_k, with u sampled at t_0..t_n.
inline double discrete_convolution(std::span<const double> w, std::span<const double> u) {
  if (w.size() < u.size())
    throw std::invalid_argument("discrete_convolution: not enough weights");
  const std::size_t n = u.size() - 1;
  double acc = 0.0;
  for (std::size_t k = 0; k <= n; ++k)
    acc += w[n - k] * u[k];
  return acc;
}

} // namespace hnmx
