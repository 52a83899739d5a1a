#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "floq/floquet.hpp"
#include "floq/measure.hpp"

namespace floq {

struct Band {
  double lo = 0.0;
  double hi = 0.0;
  /// The band reaches the window boundary and may continue beyond it.
  bool lo_clipped = false;
  bool hi_clipped = false;
};

enum class EdgeType {
  simple,      ///< |D| = 2 with nonzero slope
  degenerate,  ///< |D| touches 2 with zero slope (M = +-I when definite)
};

std::string to_string(EdgeType t);

struct BandEdge {
  double lambda = 0.0;
  EdgeType type = EdgeType::simple;
  double D = 0.0;
  double D_dot = 0.0;
  bool monodromy_is_pm_identity = false;
};

struct BandFlags {
  bool constant_D = false;
  std::optional<double> constant_value;
  bool non_definite = false;
  bool scalar_whole_line = false;
};

struct BandReport {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  std::vector<Band> bands;
  std::vector<BandEdge> edges;
  BandFlags flags;
  /// Largest final bracket width over all edge refinements.
  double tolerance_achieved = 0.0;
  int l0_dimension = 0;
  /// Scalar case: max | |rho| - 1 | over the probe grid.
  double max_multiplier_deviation = 0.0;
};

struct BandOptions {
  int grid_n = 2001;
  /// Edge refinement stops once the bracket is below tol * (1 + |lambda|).
  double tol = 1e-10;
};

/// Conditional stability set {lambda : |D(lambda)| <= 2} inside the window,
/// found by sampling D on a uniform grid, refining sampled extrema, and
/// bisecting every crossing of the levels +2 and -2. Requires n = 2 and a
/// validated system.
BandReport stability_bands(const CanonicalSystem& sys, double lambda_min, double lambda_max,
                           const BandOptions& opts = {});

/// n = 1: the spectrum is the whole real line. Checks |rho| = 1 on a probe grid.
BandReport scalar_spectrum(const CanonicalSystem& sys, double lambda_min, double lambda_max,
                           int probes = 101);

enum class PointLabel { resolvent, band_interior, band_edge, singular };

/// "resolvent", "band_interior", "band_edge", "singular_lambda".
std::string to_string(PointLabel label);

PointLabel classify_lambda(const CanonicalSystem& sys, cplx lambda);

struct L0Report {
  int dimension = 0;
  /// Initial vectors at the base point of solutions with J u' + q u = 0, w u = 0.
  std::vector<ComplexVector> basis;
  /// Period seminorm integral u^* w u of every Floquet candidate examined.
  std::vector<double> seminorms;
  double probe_lambda = 0.0;
};

/// Dimension of {u : J u' + q u = 0, w u = 0} from the Floquet solutions at a
/// real probe point. A Jordan structure at the probe moves it by +1 (at most
/// four times).
L0Report detect_l0(const CanonicalSystem& sys, double probe_lambda = 0.0);

struct GreensValue {
  cplx lambda;
  double x = 0.0;
  double y = 0.0;
  ComplexMatrix G;
  /// m = log|rho_1| / period, the exponential decay rate of G away from x = y.
  double decay_exponent = 0.0;
};

/// Normalized Floquet pair for lambda off the spectrum: psi_1 grows towards
/// +infinity, psi_2 decays there, and psi_1^T J psi_2 = 1.
class GreensFunction {
 public:
  GreensFunction(const CanonicalSystem& sys, cplx lambda);

  GreensValue operator()(double x, double y) const;

  /// psi_1 (which = 1) or psi_2 (which = 2) at x.
  BalancedValue psi(int which, double x) const;

  cplx lambda() const { return basis_.lambda(); }
  double decay_exponent() const { return decay_; }
  cplx growing_multiplier() const { return rho_[0]; }
  cplx decaying_multiplier() const { return rho_[1]; }
  const FloquetBasis& basis() const { return basis_; }

 private:
  FloquetBasis basis_;
  ComplexVector c_[2];
  cplx rho_[2];
  double decay_ = 0.0;
};

GreensValue greens_function(const CanonicalSystem& sys, cplx lambda, double x, double y);

/// A point source: w f has mass Delta_w(position) value at position.
struct PointSource {
  double position = 0.0;
  ComplexVector value;
};

struct ResolventSample {
  double x = 0.0;
  bool at_atom = false;
  ComplexVector u_minus;
  ComplexVector u_plus;
  ComplexVector u_balanced;
  /// |B+ u+ - B- u- - Delta_w f| at atoms; 0 elsewhere.
  double jump_residual = 0.0;
};

struct ResolventOutput {
  cplx lambda;
  std::vector<ResolventSample> samples;
  double max_jump_residual = 0.0;
  /// Mismatch between u-(x_{i+1}) and the homogeneous propagation of u+(x_i).
  double max_ac_residual = 0.0;
};

/// u = (T - lambda)^{-1} f for f supported on finitely many atoms of w,
/// evaluated at every system atom inside the support hull and at the extra
/// sample points.
ResolventOutput resolvent_apply(const CanonicalSystem& sys, cplx lambda,
                                std::span<const PointSource> sources,
                                std::span<const double> sample_points = {});

}  // namespace floq
