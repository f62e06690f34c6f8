#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace fgpc {

/// Numerical breakdown (e.g. Cholesky failure after the jitter ladder).
/// Carries the index of the failing pivot when known, -1 otherwise.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg, Eigen::Index pivot = -1)
      : std::runtime_error(msg), pivot_(pivot) {}
  Eigen::Index pivot() const { return pivot_; }

 private:
  Eigen::Index pivot_;
};

/// Model file carries a format_version this build does not understand.
class UnsupportedVersionError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Model file parsed but violates a model invariant (shape, SPD, finiteness).
class CorruptModelError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fgpc
