#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace caldet {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

constexpr double kPi = 3.14159265358979323846;

// Thrown on invalid user input (bad dimensions, non-unitary sigma, rank
// deficiency, malformed scenarios).  Maps to CLI exit code 2.
struct InputError : std::runtime_error {
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown on numerical failures (integrator breakdown, non-finite values).
// Maps to CLI exit code 3, as do the more specific errors below.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// A resolvent or Poisson solve was requested at (or too close to) an
// eigenvalue of the boundary value problem.
struct SolveError : NumericError {
  explicit SolveError(const std::string& msg) : NumericError(msg) {}
};

// The canonical-determinant basepoint pairing P1*S(P2) is singular.
struct BasepointError : NumericError {
  explicit BasepointError(const std::string& msg) : NumericError(msg) {}
};

struct FitError : NumericError {
  explicit FitError(const std::string& msg) : NumericError(msg) {}
};

struct SpectralCutError : NumericError {
  explicit SpectralCutError(const std::string& msg) : NumericError(msg) {}
};

struct BranchError : NumericError {
  explicit BranchError(const std::string& msg) : NumericError(msg) {}
};

struct IntegrationError : NumericError {
  explicit IntegrationError(const std::string& msg) : NumericError(msg) {}
};

struct ContinuationError : NumericError {
  explicit ContinuationError(const std::string& msg) : NumericError(msg) {}
};

struct IncompleteSpectrumError : NumericError {
  explicit IncompleteSpectrumError(const std::string& msg) : NumericError(msg) {}
};

struct TailError : NumericError {
  explicit TailError(const std::string& msg) : NumericError(msg) {}
};

}  // namespace caldet
