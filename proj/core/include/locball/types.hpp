#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace locball {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Seed = std::uint64_t;

/// Base of every error raised by the library. `module()` names the
/// component the failure originated in so that front ends can report it.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what)
      : std::runtime_error(what), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

/// Rejection sampler acceptance rate fell below the floor.
class SamplingError : public Error {
 public:
  SamplingError(const std::string& what, double rate)
      : Error("measures", what), rate_(rate) {}
  double acceptance_rate() const noexcept { return rate_; }

 private:
  double rate_;
};

/// Importance weights degenerated: the effective sample size is too small
/// for the tilt to be estimated from the base measure.
class EssError : public Error {
 public:
  EssError(const std::string& what, double ess)
      : Error("localization", what), ess_(ess) {}
  double ess() const noexcept { return ess_; }

 private:
  double ess_;
};

class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double error_estimate)
      : Error("localization", what), error_estimate_(error_estimate) {}
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double error_estimate_;
};

class SingularCovarianceError : public Error {
 public:
  SingularCovarianceError(const std::string& what, double eigenvalue)
      : Error("reduction", what), eigenvalue_(eigenvalue) {}
  double eigenvalue() const noexcept { return eigenvalue_; }

 private:
  double eigenvalue_;
};

}  // namespace locball
