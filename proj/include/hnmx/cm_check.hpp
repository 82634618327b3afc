#pragma once

// Complete-monotonicity diagnostics for weight sequences:
//   (I - S)^k w_j = sum_{n=0..k} (-1)^n C(k,n) w_{j+n},
//   Index_k = min_j (I - S)^k w_j.
// A sequence is CM iff every Index_k >= 0 (on the infinite sequence).

#include "hnmx/cq_weights.hpp"
#include "hnmx/special_fn.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

namespace hnmx {

enum class Summation { Plain, Compensated };

/// k-th alternating forward difference of w at j. Requires j + k < w.size().
inline double alternating_diff(std::span<const double> w, int k, std::size_t j,
                               Summation mode = Summation::Plain) {
  if (k < 0)
    throw std::out_of_range("alternating_diff: k must be >= 0");
  if (j + static_cast<std::size_t>(k) >= w.size())
    throw std::out_of_range("alternating_diff: j + k past end of sequence");

  double binom = 1.0;
  if (mode == Summation::Plain) {
    double acc = 0.0;
    for (int n = 0; n <= k; ++n) {
      acc += ((n & 1) ? -binom : binom) * w[j + n];
      binom = binom * (k - n) / (n + 1);
    }
    return acc;
  }
  detail::CompensatedSum<double> acc;
  for (int n = 0; n <= k; ++n) {
    acc.add(((n & 1) ? -binom : binom) * w[j + n]);
    binom = binom * (k - n) / (n + 1);
  }
  return acc.value();
}

struct IndexEntry {
  double value;
  std::size_t argmin;
};

/// Index_k over j in [0, J-k] (clipped so every difference stays in range).
inline IndexEntry index_k_entry(std::span<const double> w, int k, std::size_t J,
                                Summation mode = Summation::Plain) {
  if (J >= w.size())
    throw std::out_of_range("index_k: J must be < length of w");
  if (static_cast<std::size_t>(k) > J)
    throw std::out_of_range("index_k: k exceeds J");
  IndexEntry best{std::numeric_limits<double>::infinity(), 0};
  for (std::size_t j = 0; j + k <= J; ++j) {
    const double v = alternating_diff(w, k, j, mode);
    if (v < best.value)
      best = {v, j};
  }
  return best;
}

inline double index_k(std::span<const double> w, int k, std::size_t J,
                      Summation mode = Summation::Plain) {
  return index_k_entry(w, k, J, mode).value;
}

inline int indicator_rho(double x) noexcept { return x >= 0.0 ? 1 : 0; }

struct IndexReport {
  double alpha = 0.0;
  double beta = 0.0;
  int k_max = 0;
  std::size_t J = 0;
  std::vector<double> indices;     // Index_0 .. Index_kmax
  std::vector<std::size_t> argmin; // minimizing j per k
};

inline IndexReport index_report(std::span<const double> w, int k_max, std::size_t J,
                                Summation mode = Summation::Plain) {
  IndexReport r;
  r.k_max = k_max;
  r.J = J;
  for (int k = 0; k <= k_max; ++k) {
    const auto e = index_k_entry(w, k, J, mode);
    r.indices.push_back(e.value);
    r.argmin.push_back(e.argmin);
  }
  return r;
}

struct SweepOptions {
  Scheme scheme = Scheme::CM2;
  std::vector<double> alphas;
  std::vector<double> betas;
  double tau = 0.01;
  std::size_t J = 1000;
  int k_max = 3;
  Summation mode = Summation::Plain;
  unsigned threads = 0; ///< 0: hardware concurrency
};

/// Evenly spaced interior grid {step, 2 step, ...} strictly inside (0,1).
inline std::vector<double> unit_grid(double step) {
  if (!(step > 0.0 && step < 1.0))
    throw std::invalid_argument("unit_grid: step must lie in (0,1)");
  std::vector<double> g;
  for (int i = 1;; ++i) {
    // snap to the nearest 12-digit decimal so 3*0.05 reads back as 0.15
    const double x = std::round(i * step * 1e12) / 1e12;
    if (x >= 1.0 - 1e-12)
      break;
    g.push_back(x);
  }
  return g;
}

/// One IndexReport per (alpha, beta), row-major with alpha outer.
inline std::vector<IndexReport> sweep_grid(const SweepOptions& opt) {
  if (opt.alphas.empty() || opt.betas.empty())
    throw std::invalid_argument("sweep_grid: empty parameter grid");

  const std::size_t nb = opt.betas.size();
  const std::size_t total = opt.alphas.size() * nb;
  std::vector<IndexReport> out(total);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      try {
        const double a = opt.alphas[i / nb];
        const double b = opt.betas[i % nb];
        const auto w = make_weights(opt.scheme, a, b, opt.tau, opt.J);
        IndexReport r = index_report(w.view(), opt.k_max, opt.J, opt.mode);
        r.alpha = a;
        r.beta = b;
        out[i] = std::move(r);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure)
          failure = std::current_exception();
      }
    }
  };

  unsigned n_threads = opt.threads ? opt.threads : std::thread::hardware_concurrency();
  n_threads = std::max(1u, std::min<unsigned>(n_threads, static_cast<unsigned>(total)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t)
    pool.emplace_back(worker);
  worker();
  for (auto& th : pool)
    th.join();
  if (failure)
    std::rethrow_exception(failure);
  return out;
}

/// Long-format CSV: alpha,beta,k,index,rho_index. rho_index thresholds
/// index + tol, so tol = 0 gives the raw indicator.
inline void write_sweep_csv(std::ostream& os, const std::vector<IndexReport>& reports,
                            double tol) {
  os << "alpha,beta,k,index,rho_index\n";
  const auto old_prec = os.precision();
  for (const auto& r : reports)
    for (int k = 0; k <= r.k_max; ++k) {
      os.precision(12);
      os << r.alpha << ',' << r.beta << ',' << k << ',';
      os.precision(17);
      os << r.indices[k] << ',' << indicator_rho(r.indices[k] + tol) << '\n';
    }
  os.precision(old_prec);
}

} // namespace hnmx
