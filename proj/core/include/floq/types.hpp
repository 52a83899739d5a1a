#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace floq {

using cplx = std::complex<double>;

// All systems handled here have dimension 1 or 2, so every matrix is
// stack-allocated with a compile-time upper bound of 2x2.
using RealMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 2, 2>;
using ComplexMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, 0, 2, 2>;
using ComplexVector = Eigen::Matrix<cplx, Eigen::Dynamic, 1, 0, 2, 1>;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: dimension mismatch, bad window, unknown name, ...
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The spectral parameter lies in the singular set: B+(p, lambda) is not
/// invertible at the atom at `position`, so solutions cannot be continued.
class SingularLambdaError : public Error {
 public:
  SingularLambdaError(double position, cplx lambda);

  double position() const noexcept { return position_; }
  cplx lambda() const noexcept { return lambda_; }

 private:
  double position_;
  cplx lambda_;
};

/// det B+(p, .) vanishes identically at some atom; the singular set is all of C.
class IdenticallySingularError : public Error {
 public:
  explicit IdenticallySingularError(double position);
  double position() const noexcept { return position_; }

 private:
  double position_;
};

/// A standing hypothesis (real singular points, wrong dimension for the
/// requested analysis, trivial weight, ...) does not hold.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

/// Query at a point of the spectrum (or of the singular set) where the
/// requested object (Green's function, resolvent) does not exist.
class SpectrumError : public Error {
 public:
  SpectrumError(const std::string& what, std::string label);
  const std::string& label() const noexcept { return label_; }

 private:
  std::string label_;
};

/// A Floquet routine was called on a monodromy structure it cannot handle
/// (e.g. an ordinary Floquet solution requested for a Jordan block).
class StructureError : public Error {
 public:
  using Error::Error;
};

}  // namespace floq
