#pragma once

// Three-parameter Mittag-Leffler (Prabhakar) function and the
// Havriliak-Negami relaxation kernel built from it.
//
//   E^g_{r,m}(z) = 1/Gamma(g) * sum_k Gamma(k+g) / Gamma(r k + m) * z^k / k!
//   e^g_{r,m}(t; l) = t^(m-1) E^g_{r,m}(l t^r)
//
// The HN kernel is omega_{a,b}(t) = e^b_{a,ab}(t; -1), the inverse Laplace
// transform of (1 + s^a)^(-b).

#include "hnmx/errors.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

namespace hnmx {

struct PrabhakarParams {
  double rho = 1.0;    ///< exponent on k inside Gamma(rho k + mu)
  double mu = 1.0;     ///< offset
  double gamma = 1.0;  ///< Pochhammer power
  double lambda = -1.0; ///< multiplier used by prabhakar_e: z = lambda t^rho

  [[nodiscard]] bool valid() const noexcept { return rho > 0.0 && mu > 0.0 && gamma > 0.0; }
};

namespace detail {

inline constexpr int kMl3MaxTerms = 1000;
inline constexpr long double kMl3RelTol = 1e-16L;

// Kahan-Babuska (Neumaier) accumulator.
template <typename T>
struct CompensatedSum {
  T sum{};
  T carry{};

  void add(T x) noexcept {
    const T t = sum + x;
    if (std::fabs(sum) >= std::fabs(x))
      carry += (sum - t) + x;
    else
      carry += (x - t) + sum;
    sum = t;
  }
  [[nodiscard]] T value() const noexcept { return sum + carry; }
};

} // namespace detail

/// E^gamma_{rho,mu}(z) by direct series summation. Terms are advanced with the
/// ratio recurrence
///   t_{k+1}/t_k = (k+gamma)/(k+1) * Gamma(rho k+mu)/Gamma(rho k+rho+mu) * z
/// in extended precision, so no Gamma of a large argument is ever formed.
/// Intended for |z| <= 10; throws NumericalError if 1000 terms do not suffice
/// (small rho converges slowly: rho = 0.1 at z = -1.26 needs about 650).
inline double ml3(const PrabhakarParams& p, double z) {
  if (!p.valid())
    throw std::domain_error("ml3: require rho > 0, mu > 0, gamma > 0");

  using boost::math::tgamma_delta_ratio;
  using Real = long double;

  const Real rho = p.rho, mu = p.mu, gam = p.gamma, zz = z;
  Real term = 1.0L / boost::math::tgamma(mu);
  detail::CompensatedSum<Real> acc;
  acc.add(term);
  if (z == 0.0)
    return static_cast<double>(term);

  int small_in_a_row = 0;
  for (int k = 0; k + 1 < detail::kMl3MaxTerms; ++k) {
    const Real kk = k;
    const Real ratio = (kk + gam) / (kk + 1.0L) * tgamma_delta_ratio(rho * kk + mu, rho);
    term *= ratio * zz;
    acc.add(term);
    if (std::fabs(term) < detail::kMl3RelTol * (1.0L + std::fabs(acc.value()))) {
      // two consecutive negligible terms: the tail is monotone from here
      if (++small_in_a_row == 2)
        return static_cast<double>(acc.value());
    } else {
      small_in_a_row = 0;
    }
  }
  throw NumericalError("ml3: series did not converge within " +
                           std::to_string(detail::kMl3MaxTerms) + " terms",
                       static_cast<double>(std::fabs(term)));
}

/// e^gamma_{rho,mu}(t; lambda) = t^(mu-1) E^gamma_{rho,mu}(lambda t^rho), t > 0.
inline double prabhakar_e(const PrabhakarParams& p, double t) {
  if (!(t > 0.0))
    throw std::domain_error("prabhakar_e: t must be positive");
  return std::pow(t, p.mu - 1.0) * ml3(p, p.lambda * std::pow(t, p.rho));
}

/// Havriliak-Negami kernel omega_{alpha,beta}(t) = t^(ab-1) E^b_{a,ab}(-t^a).
inline double hn_kernel(double alpha, double beta, double t) {
  if (!(t > 0.0))
    throw std::domain_error("hn_kernel: t must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0 && beta > 0.0 && beta <= 1.0))
    throw std::domain_error("hn_kernel: alpha, beta must lie in (0,1]");
  const PrabhakarParams p{alpha, alpha * beta, beta, -1.0};
  return prabhakar_e(p, t);
}

/// Exact value of int_0^t omega_{alpha,beta}(t-s) s^k ds
///   = k! * t^(ab+k) * E^b_{a,ab+k+1}(-t^a).
inline double prabhakar_integral_monomial(double alpha, double beta, int k, double t) {
  if (k < 0)
    throw std::domain_error("prabhakar_integral_monomial: k must be >= 0");
  if (t < 0.0)
    throw std::domain_error("prabhakar_integral_monomial: t must be >= 0");
  if (!(alpha > 0.0 && alpha <= 1.0 && beta > 0.0 && beta <= 1.0))
    throw std::domain_error("prabhakar_integral_monomial: alpha, beta must lie in (0,1]");
  if (t == 0.0)
    return 0.0;
  const PrabhakarParams p{alpha, alpha * beta + k + 1.0, beta, -1.0};
  return boost::math::factorial<double>(static_cast<unsigned>(k)) * prabhakar_e(p, t);
}

} // namespace hnmx
