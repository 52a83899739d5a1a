#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "floq/example_registry.hpp"
#include "floq/measure.hpp"

namespace floq::testing {

struct RandomSystemOptions {
  int n = 2;
  int max_atoms = 3;
  int max_segments = 3;
  /// Scale of the random weights and densities.
  double magnitude = 1.0;
  /// Require a positive definite w density somewhere (keeps L0 trivial).
  bool definite = false;
};

/// Random system that passes validate_system().
CanonicalSystem random_system(std::mt19937_64& rng, const RandomSystemOptions& opts = {});

CanonicalSystem example_system(const std::string& name, const ParamMap& overrides = {});

/// J = i, q = 2 sum delta_k, w = Lebesgue: multiplier i e^{-i lambda}.
CanonicalSystem scalar_comb_system();

/// exp(A) by Eigen's scaling-and-squaring Pade implementation.
ComplexMatrix oracle_expm(const ComplexMatrix& a);

/// B+^{-1} B- written out with the 2x2 adjugate (scalar division for n = 1).
ComplexMatrix oracle_atom_transfer(const ComplexMatrix& j, const RealMatrix& dq,
                                   const RealMatrix& dw, cplx lambda);

/// Transfer matrix from x0 to x1 >= x0 by classical RK4 on every atom-free
/// stretch (step <= h) and oracle_atom_transfer at atoms in [x0, x1).
ComplexMatrix oracle_fundamental(const CanonicalSystem& sys, cplx lambda, double x0, double x1,
                                 double h = 1e-3);

struct OracleJumpValue {
  double x = 0.0;
  ComplexVector u_minus;
  ComplexVector u_plus;
};

/// Decaying solution of (T - lambda) u = f for f supported on w atoms, found
/// by least squares on the atom recursion over `periods` periods each side of
/// the base point with u- = 0 at the left end and u+ = 0 at the right end.
/// `sources` maps atom positions to the values of f there.
std::vector<OracleJumpValue> oracle_resolvent(const CanonicalSystem& sys, cplx lambda,
                                              const std::vector<std::pair<double, ComplexVector>>& sources,
                                              int periods = 40);

/// max |a - b| / (1 + max |b|).
double rel_err(const ComplexMatrix& a, const ComplexMatrix& b);

double uniform(std::mt19937_64& rng, double lo, double hi);

}  // namespace floq::testing
