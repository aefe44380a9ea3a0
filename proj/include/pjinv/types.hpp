#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace pjinv {

/// Bounded linear map between Euclidean spaces, stored densely.
using Operator = Eigen::MatrixXd;
/// Point of a Euclidean space; dual functionals are Vectors as well.
using Vector = Eigen::VectorXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside of a map's declared domain box or with the wrong dimension.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Finite-difference or derivative oracle failure (NaN/Inf, kink straddled).
class DifferentiationError : public Error {
 public:
  using Error::Error;
};

/// Malformed catalog identifier, provider string or configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An inversion needed by a certificate did not converge; carries the target.
class InversionFailure : public Error {
 public:
  InversionFailure(const std::string& what, Vector target)
      : Error(what), target_(std::move(target)) {}
  const Vector& target() const { return target_; }

 private:
  Vector target_;
};

inline bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  return m.allFinite();
}

}  // namespace pjinv
