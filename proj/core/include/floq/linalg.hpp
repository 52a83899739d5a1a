#pragma once

#include <vector>

#include "floq/types.hpp"

namespace floq {

/// A matrix stored as `matrix * exp(log_scale)`. Long products of hyperbolic
/// transfer matrices overflow doubles; the scale keeps the mantissa bounded.
struct ScaledMatrix {
  ComplexMatrix matrix;
  double log_scale = 0.0;

  ComplexMatrix value() const;
};

/// exp(A) for a 1x1 or 2x2 complex matrix.
///
/// The 2x2 case uses the closed form exp(A) = e^{t/2} (cosh(s) I + sinh(s)/s B)
/// with t = tr A, B = A - t/2 I and s^2 = -det B. Both cosh(s) and sinh(s)/s
/// are entire in s^2, so the nearly-coincident-eigenvalue regime is handled by
/// their Taylor series instead of the divided difference of exponentials.
ComplexMatrix expm(const ComplexMatrix& a);

/// Same as expm() but returns the result with its growth factored out, so
/// exponents far beyond the double range stay representable.
ScaledMatrix expm_scaled(const ComplexMatrix& a);

/// Multiply `lhs * rhs` and renormalize when the max entry exceeds 1e150.
ScaledMatrix multiply(const ScaledMatrix& lhs, const ScaledMatrix& rhs);

/// Largest absolute entry.
double max_abs(const ComplexMatrix& m);
double max_abs(const RealMatrix& m);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Rule of the given order (number of nodes), computed by Newton iteration on
/// the Legendre polynomial and cached per order.
const GaussRule& gauss_legendre(int order);

/// Upper bound on |eigenvalue| of a 1x1/2x2 matrix, used to pick quadrature
/// piece counts for integrands built from exp(x A).
double spectral_rate(const ComplexMatrix& a);

}  // namespace floq
