#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "floq/types.hpp"

namespace floq {

/// A point mass of a periodic matrix measure: the jump of its antiderivative.
struct Atom {
  double position = 0.0;
  RealMatrix weight;
};

/// Constant density on [from, to).
struct DensitySegment {
  double from = 0.0;
  double to = 0.0;
  RealMatrix matrix;
};

/// One period [0, period) of a periodic n x n real matrix measure made of
/// atoms plus a piecewise-constant density. The measure on the whole line is
/// the periodic extension. An empty density list means zero density.
///
/// Construction never reorders or merges anything; validate_system() reports
/// structural problems instead.
struct MatrixMeasureSpec {
  int dim = 2;
  double period = 1.0;
  std::vector<Atom> atoms;
  std::vector<DensitySegment> density;

  static MatrixMeasureSpec zero(int dim, double period);
  /// Constant density `m` over the whole period.
  static MatrixMeasureSpec lebesgue(const RealMatrix& m, double period);
  /// Single atom of weight `m` at `position` per period.
  static MatrixMeasureSpec comb(const RealMatrix& m, double period, double position = 0.0);

  bool has_atoms() const { return !atoms.empty(); }
  bool is_zero() const;
};

/// The full problem J u' + q u = lambda w u with periodic measure coefficients.
struct CanonicalSystem {
  int n = 2;
  /// For n = 2 a real skew-symmetric invertible matrix; for n = 1 a nonzero
  /// purely imaginary scalar.
  ComplexMatrix J;
  MatrixMeasureSpec q;
  MatrixMeasureSpec w;
  /// Continuity point in [0, period) where fundamental matrices equal I.
  double base_point = 0.0;

  double period() const { return q.period; }
};

/// J = r [[0, -1], [1, 0]].
ComplexMatrix canonical_j(double r = 1.0);
/// J = i * imag as a 1x1 matrix.
ComplexMatrix scalar_j(double imag = 1.0);

/// Midpoint of the largest atom-free gap of the merged q/w atom set, reduced
/// to [0, period). Zero when there are no atoms.
double default_base_point(const MatrixMeasureSpec& q, const MatrixMeasureSpec& w);

enum class ViolationCode {
  bad_dimension,
  bad_period,
  period_mismatch,
  non_finite,
  atom_out_of_range,
  atoms_not_increasing,
  segments_not_covering,
  j_not_admissible,
  q_not_symmetric,
  w_not_psd,
  base_point_invalid,
  real_singular_lambda,
  identically_singular,
};

std::string to_string(ViolationCode code);

struct Violation {
  ViolationCode code;
  std::optional<double> position;
  std::string message;
};

struct ValidationReport {
  bool ok = false;
  std::vector<Violation> violations;
  /// Roots of det B+(p, .) over all atoms, conjugation-closed. Empty when
  /// structural violations prevented the computation.
  std::vector<cplx> singular_set;
  bool identically_singular = false;
  std::optional<double> identically_singular_at;

  std::string summary() const;
};

/// Coefficients c0 + c1 lambda + c2 lambda^2 of det(J + sign/2 (dq - lambda dw)).
struct DetPolynomial {
  cplx c0{}, c1{}, c2{};
  /// Magnitude reference for deciding which coefficients vanish.
  double scale = 1.0;

  cplx operator()(cplx lambda) const { return c0 + lambda * (c1 + lambda * c2); }
  bool is_identically_zero() const;
  /// Roots; empty for a nonzero constant.
  std::vector<cplx> roots() const;
};

/// det B+(p, lambda) (sign = +1) or det B-(p, lambda) (sign = -1) as a
/// polynomial in lambda, for the atom weights dq, dw at p.
DetPolynomial jump_determinant(const ComplexMatrix& j, const RealMatrix& dq, const RealMatrix& dw,
                               int sign = +1);

/// B+ (sign = +1) or B- (sign = -1) = J +- (dq - lambda dw) / 2.
ComplexMatrix jump_matrix(const ComplexMatrix& j, const RealMatrix& dq, const RealMatrix& dw,
                          cplx lambda, int sign);

/// Atom of the system: q and w weights at one position (either may be zero).
struct SystemAtom {
  double position = 0.0;
  RealMatrix dq;
  RealMatrix dw;
};

/// Atoms of q and w in one period merged by position, sorted increasingly.
std::vector<SystemAtom> merged_atoms(const CanonicalSystem& sys);

/// Checks every structural and hypothesis invariant; never throws on bad data.
ValidationReport validate_system(const CanonicalSystem& sys);

/// Atom weight at x (reduced modulo the period), or zero.
RealMatrix jump_at(const MatrixMeasureSpec& m, double x);

/// True if x reduces to an atom position of m.
bool is_atom(const MatrixMeasureSpec& m, double x);

/// The union of zeros of det B+-(p, .) over the atoms of one period.
/// Throws IdenticallySingularError when some atom is singular for every lambda.
std::vector<cplx> singular_set(const CanonicalSystem& sys);

enum class MassKind { atom, density };

/// Integrand callback: receives the point, the kind of mass there and the
/// matrix it carries (atom weight, or density value times quadrature weight).
using PeriodIntegrand =
    std::function<ComplexMatrix(double x, MassKind kind, const RealMatrix& mass)>;

struct QuadratureOptions {
  int order = 8;
  /// Density segments are split into pieces no longer than this.
  double max_piece = 0.0;  // 0: no splitting
  /// Positions in [0, period) where the integrand may jump or kink; density
  /// segments are split there as well.
  std::vector<double> breakpoints;
};

/// Integral over [anchor, anchor + period) of an integrand against the
/// periodic measure m. Throws InvalidArgument if anchor is an atom.
ComplexMatrix integrate_period(const MatrixMeasureSpec& m, double anchor,
                               const PeriodIntegrand& integrand,
                               const QuadratureOptions& opts = {});

/// sum over atoms g(p) dm(p) + integral of g(x) density(x) dx over one period
/// starting at `anchor`.
ComplexMatrix period_integral(const MatrixMeasureSpec& m,
                              const std::function<ComplexMatrix(double)>& g, double anchor,
                              const QuadratureOptions& opts = {});

/// Relative position tolerance used to decide whether two reals denote the
/// same point of the line.
double position_tolerance(double x, double period);

}  // namespace floq
