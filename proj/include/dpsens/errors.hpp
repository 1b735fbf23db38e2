#pragma once

#include <stdexcept>
#include <string>

namespace dpsens {

/// Base class of every error thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Inconsistent dimensions or a malformed input object.
struct ShapeError : Error {
  using Error::Error;
};

/// Precondition or invariant violation on user-provided data
/// (non-finite values, asymmetric Hessians, bad indices, ...).
struct ValidationError : Error {
  using Error::Error;
};

/// Reduced Hessian is not positive definite, so no admissible delta exists.
struct SoscFailed : Error {
  explicit SoscFailed(double gamma)
      : Error("second-order sufficient condition fails: gamma = " + std::to_string(gamma)),
        gamma(gamma) {}
  double gamma;
};

/// A stagewise matrix in a backward recursion could not be inverted or
/// was not positive definite.
struct StageError : Error {
  StageError(const std::string& what, int stage, double min_eigenvalue)
      : Error(what + " at stage " + std::to_string(stage) +
              " (min eigenvalue " + std::to_string(min_eigenvalue) + ")"),
        stage(stage),
        min_eigenvalue(min_eigenvalue) {}
  int stage;
  double min_eigenvalue;
};

struct NonInvertibleRtilde : StageError {
  NonInvertibleRtilde(int stage, double lmin)
      : StageError("convexification: R~ is not invertible", stage, lmin) {}
};

struct NotPositiveDefinite : StageError {
  NotPositiveDefinite(int stage, double lmin)
      : StageError("convexification: R~ is not positive definite", stage, lmin) {}
};

struct IndefiniteW : StageError {
  IndefiniteW(int stage, double lmin)
      : StageError("riccati: W is not positive definite", stage, lmin) {}
};

struct SingularKkt : Error {
  using Error::Error;
};

struct SolverDiverged : Error {
  SolverDiverged(int iterations, double residual)
      : Error("Newton iteration diverged after " + std::to_string(iterations) +
              " iterations (residual " + std::to_string(residual) + ")"),
        iterations(iterations),
        residual(residual) {}
  int iterations;
  double residual;
};

struct InsufficientData : Error {
  using Error::Error;
};

/// Unreadable file or malformed JSON input.
struct ParseError : Error {
  using Error::Error;
};

}  // namespace dpsens
