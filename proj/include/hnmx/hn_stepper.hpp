#pragma once

// Crank-Nicolson / CQ time stepper for the 2D Maxwell system in a
// Havriliak-Negami medium,
//
//   eps_inf (dE, phi) + (dP, phi) - (H^{n-1/2}, curl phi) = (g1, phi)
//   (dH, psi) + (curl E^{n-1/2}, psi)                      = (g2, psi)
//   (P^n, phi) - deps sum_{k<=n} w_{n-k} (E^k, phi)       = (g3, phi)
//
// with d the backward difference over one step. H^n and P^n are eliminated,
// leaving one SPD solve per step for E^n with
//
//   A = ((eps_inf + deps w_0)/tau) M_E + (tau/4) C^T M_H^{-1} C.
//
// With CM weights and zero sources the discrete energy
//   eps_inf |E^n|^2 + |H^n|^2 + deps sum_k w_{n-k} |E^k|^2
// is nonincreasing in n, whatever tau.

#include "hnmx/cq_weights.hpp"
#include "hnmx/errors.hpp"
#include "hnmx/maxwell_fem.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <cstddef>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hnmx {

struct HNParams {
  double eps_inf = 1.0;
  double delta_eps = 1.0;
  double alpha = 0.5;
  double beta = 0.5;

  /// delta_eps = 0 is accepted: it switches the polarization off and the
  /// scheme reduces to plain Crank-Nicolson.
  void validate() const {
    if (!(eps_inf >= 1.0))
      throw std::invalid_argument("HNParams: eps_inf must be >= 1");
    if (!(delta_eps >= 0.0))
      throw std::invalid_argument("HNParams: delta_eps must be >= 0");
    if (!(alpha > 0.0 && alpha <= 1.0 && beta > 0.0 && beta <= 1.0))
      throw std::invalid_argument("HNParams: alpha, beta must lie in (0,1]");
  }
};

/// Right-hand sides of the three equations. Empty closures mean zero.
struct SourceSet {
  VectorField g1; ///< Ampere residual
  ScalarField g2; ///< Faraday residual
  VectorField g3; ///< constitutive residual

  [[nodiscard]] bool is_zero() const noexcept { return !g1 && !g2 && !g3; }
  static SourceSet zero() { return {}; }
};

struct FieldVectors {
  Eigen::VectorXd e; ///< full edge vector
  Eigen::VectorXd p; ///< full edge vector
  Eigen::VectorXd h; ///< cell vector
};

struct EnergyComponents {
  double term_E = 0.0;
  double term_H = 0.0;
  double term_hist = 0.0;
  [[nodiscard]] double total() const noexcept { return term_E + term_H + term_hist; }
};

/// Solver for the Schur complement A of one time step.
class StepOperator {
public:
  static constexpr double kRelTol = 1e-12;
  static constexpr int kDirectLimit = 200000;

  StepOperator(const AssembledOperators& ops, const HNParams& params, double tau, double w0) {
    if (!(w0 > 0.0))
      throw std::domain_error("StepOperator: w0 must be positive");
    if (!(tau > 0.0))
      throw std::domain_error("StepOperator: tau must be positive");
    const Eigen::VectorXd inv_mh = ops.mass_h.cwiseInverse();
    const SparseMatrix ct = ops.curl.transpose();
    const SparseMatrix schur = ct * inv_mh.asDiagonal() * ops.curl;
    a_ = ((params.eps_inf + params.delta_eps * w0) / tau) * ops.mass + (tau / 4.0) * schur;
    a_.makeCompressed();
    if (a_.rows() == 0)
      return;
    if (a_.rows() <= kDirectLimit) {
      direct_ = std::make_unique<Eigen::SimplicialLDLT<SparseMatrix>>(a_);
      if (direct_->info() != Eigen::Success)
        throw NumericalError("StepOperator: factorization failed", 0.0);
    } else {
      iterative_ = std::make_unique<
          Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper>>(a_);
      iterative_->setTolerance(kRelTol);
    }
  }

  [[nodiscard]] const SparseMatrix& matrix() const noexcept { return a_; }

  [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    if (a_.rows() == 0)
      return Eigen::VectorXd(0);
    Eigen::VectorXd x = direct_ ? Eigen::VectorXd(direct_->solve(b))
                                : Eigen::VectorXd(iterative_->solve(b));
    const double bn = b.norm();
    if (bn > 0.0) {
      const double rel = (a_ * x - b).norm() / bn;
      // the direct solve lands at roundoff; allow a small factor for the check itself
      if (!(rel <= 10.0 * kRelTol))
        throw NumericalError("StepOperator: relative residual " + std::to_string(rel) +
                                 " above tolerance",
                             rel);
    }
    return x;
  }

private:
  SparseMatrix a_;
  std::unique_ptr<Eigen::SimplicialLDLT<SparseMatrix>> direct_;
  std::unique_ptr<Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper>>
      iterative_;
};

inline StepOperator make_step_operator(const AssembledOperators& ops, const HNParams& params,
                                       double tau, double w0) {
  return StepOperator(ops, params, tau, w0);
}

struct StepperOptions {
  Scheme scheme = Scheme::CM2; ///< alpha = 1 always falls back to BDF1
};

/// One trajectory. Holds a reference to `ops`, which must outlive it.
/// Not thread-safe; independent instances may run concurrently.
class HNStepper {
public:
  HNStepper(const AssembledOperators& ops, const HNParams& params, double tau,
            std::size_t max_steps, SourceSet sources, const Eigen::VectorXd& e0_full,
            const Eigen::VectorXd& h0, StepperOptions opt = {})
      : ops_(ops), params_(params), tau_(tau), sources_(std::move(sources)),
        weights_(make_stepper_weights(params, tau, max_steps, opt.scheme)),
        op_(ops, params, tau, weights_.w.front()) {
    params_.validate();
    if (e0_full.size() != ops.mesh.n_edges() || h0.size() != ops.mesh.n_cells())
      throw std::invalid_argument("HNStepper: initial data has wrong size");

    if (!sources_.is_zero() && ops.n_free() > 0)
      mass_solver_ = std::make_unique<Eigen::SimplicialLDLT<SparseMatrix>>(ops.mass);

    const Eigen::VectorXd e0 = ops.restrict_edges(e0_full);
    e_hist_.push_back(e0);
    e_norm_sq_.push_back(e0.dot(ops.mass * e0));
    h_ = h0;
    conv_ = weights_.w[0] * e0;
    g1_prev_ = edge_load(sources_.g1, 0.0);
    g2_prev_ = cell_load(sources_.g2, 0.0);
    g3_prev_ = edge_load(sources_.g3, 0.0);
    p_ = params_.delta_eps * conv_ + mass_inverse(g3_prev_);
  }

  [[nodiscard]] std::size_t n() const noexcept { return e_hist_.size() - 1; }
  [[nodiscard]] double time() const noexcept { return static_cast<double>(n()) * tau_; }
  [[nodiscard]] double tau() const noexcept { return tau_; }
  [[nodiscard]] const CQWeights& weights() const noexcept { return weights_; }
  [[nodiscard]] const HNParams& params() const noexcept { return params_; }
  [[nodiscard]] const StepOperator& step_operator() const noexcept { return op_; }

  /// Reduced E vectors E^0..E^n and their squared M_E norms.
  [[nodiscard]] const std::vector<Eigen::VectorXd>& e_history() const noexcept { return e_hist_; }
  [[nodiscard]] const std::vector<double>& e_norm_sq_history() const noexcept {
    return e_norm_sq_;
  }

  /// Incrementally maintained sum_{k<=n} w_{n-k} E^k (reduced).
  [[nodiscard]] const Eigen::VectorXd& convolution() const noexcept { return conv_; }

  /// Same sum recomputed from the stored history.
  [[nodiscard]] Eigen::VectorXd convolution_from_scratch() const {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(ops_.n_free());
    const std::size_t m = n();
    for (std::size_t k = 0; k <= m; ++k)
      s += weights_.w[m - k] * e_hist_[k];
    return s;
  }

  [[nodiscard]] FieldVectors fields() const {
    return {ops_.extend_edges(e_hist_.back()), ops_.extend_edges(p_), h_};
  }

  [[nodiscard]] EnergyComponents energy() const {
    EnergyComponents en;
    en.term_E = params_.eps_inf * e_norm_sq_.back();
    en.term_H = h_.dot(ops_.mass_h.cwiseProduct(h_));
    const std::size_t m = n();
    double hist = 0.0;
    for (std::size_t k = 0; k <= m; ++k)
      hist += weights_.w[m - k] * e_norm_sq_[k];
    en.term_hist = params_.delta_eps * hist;
    return en;
  }

  void step() {
    const std::size_t m = n() + 1;
    if (m >= weights_.w.size())
      throw std::out_of_range("HNStepper::step: weight table exhausted (max_steps too small)");
    const auto& w = weights_.w;
    const double t_new = static_cast<double>(m) * tau_;
    const Eigen::VectorXd& e_old = e_hist_.back();

    // S = sum_{k<m} w_{m-k} E^k; the P increment without the E^m term is S - conv_
    Eigen::VectorXd s = Eigen::VectorXd::Zero(ops_.n_free());
    for (std::size_t k = 0; k < m; ++k)
      s += w[m - k] * e_hist_[k];
    const Eigen::VectorXd hist_inc = s - conv_;

    const Eigen::VectorXd g1_new = edge_load(sources_.g1, t_new);
    const Eigen::VectorXd g2_new = cell_load(sources_.g2, t_new);
    const Eigen::VectorXd g3_new = edge_load(sources_.g3, t_new);
    const Eigen::VectorXd f1 = 0.5 * (g1_new + g1_prev_);
    const Eigen::VectorXd f2 = 0.5 * (g2_new + g2_prev_);

    const Eigen::VectorXd inv_mh = ops_.mass_h.cwiseInverse();
    const Eigen::VectorXd curl_e_old = ops_.curl * e_old;

    Eigen::VectorXd rhs =
        (params_.eps_inf / tau_) * (ops_.mass * e_old) -
        (params_.delta_eps / tau_) * (ops_.mass * hist_inc) - (g3_new - g3_prev_) / tau_ +
        ops_.curl.transpose() *
            (h_ + 0.5 * tau_ * inv_mh.cwiseProduct(f2) -
             0.25 * tau_ * inv_mh.cwiseProduct(curl_e_old)) +
        f1;

    Eigen::VectorXd e_new = op_.solve(rhs);

    h_ += tau_ * inv_mh.cwiseProduct(f2 - 0.5 * (ops_.curl * e_new + curl_e_old));
    conv_ = s + w[0] * e_new;
    p_ = params_.delta_eps * conv_ + mass_inverse(g3_new);

    e_norm_sq_.push_back(e_new.dot(ops_.mass * e_new));
    e_hist_.push_back(std::move(e_new));
    g1_prev_ = g1_new;
    g2_prev_ = g2_new;
    g3_prev_ = g3_new;
  }

private:
  static CQWeights make_stepper_weights(const HNParams& p, double tau, std::size_t max_steps,
                                        Scheme scheme) {
    p.validate();
    if (p.alpha == 1.0 || scheme == Scheme::BDF1)
      return bdf_cq_weights(1, p.alpha, p.beta, tau, max_steps);
    if (scheme == Scheme::BDF2)
      return bdf_cq_weights(2, p.alpha, p.beta, tau, max_steps);
    return cm2_weights(p.alpha, p.beta, tau, max_steps);
  }

  [[nodiscard]] Eigen::VectorXd edge_load(const VectorField& g, double t) const {
    if (!g)
      return Eigen::VectorXd::Zero(ops_.n_free());
    return ops_.restrict_edges(load_edge(ops_.mesh, g, t));
  }

  [[nodiscard]] Eigen::VectorXd cell_load(const ScalarField& g, double t) const {
    if (!g)
      return Eigen::VectorXd::Zero(ops_.mesh.n_cells());
    return load_cell(ops_.mesh, g, t);
  }

  [[nodiscard]] Eigen::VectorXd mass_inverse(const Eigen::VectorXd& b) const {
    if (!mass_solver_ || b.size() == 0)
      return Eigen::VectorXd::Zero(ops_.n_free());
    return mass_solver_->solve(b);
  }

  const AssembledOperators& ops_;
  HNParams params_;
  double tau_;
  SourceSet sources_;
  CQWeights weights_;
  StepOperator op_;
  std::unique_ptr<Eigen::SimplicialLDLT<SparseMatrix>> mass_solver_;

  std::vector<Eigen::VectorXd> e_hist_;
  std::vector<double> e_norm_sq_;
  Eigen::VectorXd h_;
  Eigen::VectorXd p_;
  Eigen::VectorXd conv_;
  Eigen::VectorXd g1_prev_, g2_prev_, g3_prev_;
};

struct EnergyRecord {
  std::size_t n;
  double t;
  EnergyComponents parts;
};

/// Runs `steps` steps and records the energy at n = 0..steps.
inline std::vector<EnergyRecord> run_energy_trace(HNStepper& stepper, std::size_t steps) {
  std::vector<EnergyRecord> trace;
  trace.reserve(steps + 1);
  trace.push_back({stepper.n(), stepper.time(), stepper.energy()});
  for (std::size_t s = 0; s < steps; ++s) {
    stepper.step();
    trace.push_back({stepper.n(), stepper.time(), stepper.energy()});
  }
  return trace;
}

inline void write_energy_csv(std::ostream& os, const std::vector<EnergyRecord>& trace) {
  os << "n,t,total,term_E,term_H,term_hist\n";
  const auto old = os.precision(17);
  for (const auto& r : trace)
    os << r.n << ',' << r.t << ',' << r.parts.total() << ',' << r.parts.term_E << ','
       << r.parts.term_H << ',' << r.parts.term_hist << '\n';
  os.precision(old);
}

} // namespace hnmx
