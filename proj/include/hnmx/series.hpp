#pragma once

// Truncated formal power series sum_{j<=N} c_j zeta^j. Enough arithmetic to
// expand CQ generating functions of the form (1 + B(zeta))^(-beta).

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hnmx {

class TruncatedSeries {
public:
  /// Zero series of order N (N+1 coefficients).
  explicit TruncatedSeries(std::size_t order) : coeffs_(order + 1, 0.0) {}

  explicit TruncatedSeries(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty())
      throw std::invalid_argument("TruncatedSeries: need at least one coefficient");
  }

  [[nodiscard]] std::size_t order() const noexcept { return coeffs_.size() - 1; }
  [[nodiscard]] std::size_t size() const noexcept { return coeffs_.size(); }

  [[nodiscard]] double operator[](std::size_t j) const { return coeffs_[j]; }
  double& operator[](std::size_t j) { return coeffs_[j]; }

  [[nodiscard]] std::span<const double> coeffs() const noexcept { return coeffs_; }
  [[nodiscard]] const std::vector<double>& vector() const noexcept { return coeffs_; }
  [[nodiscard]] std::vector<double> release() && noexcept { return std::move(coeffs_); }

  TruncatedSeries& operator*=(double s) noexcept {
    for (double& c : coeffs_)
      c *= s;
    return *this;
  }

  TruncatedSeries& operator+=(const TruncatedSeries& other) {
    require_same_order(other, "operator+=");
    for (std::size_t j = 0; j < coeffs_.size(); ++j)
      coeffs_[j] += other.coeffs_[j];
    return *this;
  }

  void require_same_order(const TruncatedSeries& other, const char* op) const {
    if (other.order() != order())
      throw std::invalid_argument(std::string("TruncatedSeries::") + op +
                                  ": truncation orders differ");
  }

private:
  std::vector<double> coeffs_;
};

/// Coefficients of (1 - scale*zeta)^exponent up to zeta^N.
inline TruncatedSeries binom_series(double exponent, double scale, std::size_t order) {
  TruncatedSeries s(order);
  s[0] = 1.0;
  for (std::size_t j = 1; j <= order; ++j) {
    const double jj = static_cast<double>(j);
    s[j] = s[j - 1] * scale * (jj - 1.0 - exponent) / jj;
  }
  return s;
}

/// Cauchy product truncated at the common order.
inline TruncatedSeries series_mul(const TruncatedSeries& a, const TruncatedSeries& b) {
  a.require_same_order(b, "series_mul");
  const std::size_t n = a.size();
  TruncatedSeries out(a.order());
  for (std::size_t i = 0; i < n; ++i) {
    const double ai = a[i];
    if (ai == 0.0)
      continue;
    for (std::size_t j = 0; i + j < n; ++j)
      out[i + j] += ai * b[j];
  }
  return out;
}

/// h = f^gamma via J.C.P. Miller's recurrence
///   h_n = 1/(n f_0) sum_{k=1..n} ((gamma+1)k - n) f_k h_{n-k}.
/// f_0 must be positive (principal branch at zeta = 0).
inline TruncatedSeries series_pow(const TruncatedSeries& f, double gamma) {
  const double f0 = f[0];
  if (!(f0 > 0.0))
    throw std::domain_error("series_pow: constant term must be positive");

  const std::size_t n_max = f.order();
  // last nonzero coefficient bounds the inner loop (polynomial f is common)
  std::size_t deg = n_max;
  while (deg > 0 && f[deg] == 0.0)
    --deg;

  TruncatedSeries h(n_max);
  h[0] = std::pow(f0, gamma);
  for (std::size_t n = 1; n <= n_max; ++n) {
    const double nn = static_cast<double>(n);
    double acc = 0.0;
    const std::size_t kmax = n < deg ? n : deg;
    for (std::size_t k = 1; k <= kmax; ++k)
      acc += ((gamma + 1.0) * static_cast<double>(k) - nn) * f[k] * h[n - k];
    h[n] = acc / (nn * f0);
  }
  return h;
}

} // namespace hnmx
