#pragma once

#include <stdexcept>
#include <string>

namespace hnmx {

/// Raised when an iterative numerical procedure (series summation, linear
/// solve) does not reach its tolerance. `residual` carries the last measured
/// magnitude (term size, relative residual, ...).
class NumericalError : public std::runtime_error {
public:
  NumericalError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}

  [[nodiscard]] double residual() const noexcept { return residual_; }

private:
  double residual_;
};

} // namespace hnmx
