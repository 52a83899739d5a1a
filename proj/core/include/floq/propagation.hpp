#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include "floq/linalg.hpp"
#include "floq/measure.hpp"

namespace floq {

/// Transfer matrix of J u' + (q - lambda w) u = 0 from x_from to x_to.
/// The interval [x_from, x_to) owns the atoms it contains, so the matrix maps
/// u-(x_from) to u-(x_to).
struct TransferMatrix {
  cplx lambda;
  double x_from = 0.0;
  double x_to = 0.0;
  ComplexMatrix matrix;
  double log_scale = 0.0;

  /// matrix * exp(log_scale)
  ComplexMatrix value() const;
};

/// One-sided limits and their mean at x. Off atoms all three coincide.
struct BalancedValue {
  double x = 0.0;
  ComplexVector u_minus;
  ComplexVector u_plus;
  ComplexVector u_balanced;
};

/// B+^{-1} B-: maps u- to u+ across an atom with weights dq, dw.
/// Throws SingularLambdaError (carrying `position`) if B+ is singular.
ComplexMatrix atom_transfer(const ComplexMatrix& j, const RealMatrix& dq, const RealMatrix& dw,
                            cplx lambda, double position = 0.0);

/// Generator J^{-1} (lambda W - Q) of the constant-coefficient equation.
ComplexMatrix segment_generator(const ComplexMatrix& j, const RealMatrix& q_density,
                                const RealMatrix& w_density, cplx lambda);

/// exp(h J^{-1} (lambda W - Q)) across an atom-free stretch of length h > 0.
ComplexMatrix segment_transfer(const ComplexMatrix& j, const RealMatrix& q_density,
                               const RealMatrix& w_density, cplx lambda, double h);

/// One period of a system flattened into alternating atoms and constant
/// segments. Segment breakpoints include every atom position, so each atom
/// sits at the start of a segment. Keeps its own copy of the system.
class PeriodLayout {
 public:
  struct Segment {
    double from;
    double to;
    RealMatrix q_density;
    RealMatrix w_density;
  };

  explicit PeriodLayout(const CanonicalSystem& sys);

  const CanonicalSystem& system() const { return *sys_; }
  const std::vector<SystemAtom>& atoms() const { return atoms_; }
  const std::vector<Segment>& segments() const { return segments_; }

  /// Atom of the periodic extension at x, if any.
  const SystemAtom* atom_at(double x) const;

  /// Visits the pieces of [x0, x1) in order; requires x1 >= x0.
  /// on_atom(absolute_position, atom) / on_segment(from, to, segment).
  template <class OnAtom, class OnSegment>
  void walk(double x0, double x1, OnAtom&& on_atom, OnSegment&& on_segment) const;

 private:
  std::shared_ptr<const CanonicalSystem> sys_;
  std::vector<SystemAtom> atoms_;
  std::vector<Segment> segments_;
};

/// U(x1) for the fundamental matrix with U(x0) = I (left limits). For x1 < x0
/// this is the inverse of the forward transfer from x1 to x0.
TransferMatrix fundamental_matrix(const CanonicalSystem& sys, cplx lambda, double x0, double x1);
TransferMatrix fundamental_matrix(const PeriodLayout& layout, cplx lambda, double x0, double x1);

/// Solution with u(base_point) = c evaluated at x.
BalancedValue balanced_solution(const CanonicalSystem& sys, cplx lambda, const ComplexVector& c,
                                double x);
BalancedValue balanced_solution(const PeriodLayout& layout, cplx lambda, const ComplexVector& c,
                                double x);

/// Fundamental matrix values U-(x), U+(x) and their mean, with U(base_point) = I.
struct BalancedMatrix {
  ComplexMatrix minus;
  ComplexMatrix plus;
  ComplexMatrix balanced;
};
BalancedMatrix balanced_fundamental(const PeriodLayout& layout, cplx lambda, double x);

// ---------------------------------------------------------------------------

template <class OnAtom, class OnSegment>
void PeriodLayout::walk(double x0, double x1, OnAtom&& on_atom, OnSegment&& on_segment) const {
  const double period = sys_->period();
  if (!(x1 > x0)) return;
  const double tol0 = position_tolerance(x0, period);
  const double tol1 = position_tolerance(x1, period);
  long k = static_cast<long>(std::floor(x0 / period)) - 1;
  const long k_end = static_cast<long>(std::floor(x1 / period)) + 1;
  std::size_t next_atom = 0;
  for (; k <= k_end; ++k) {
    const double shift = static_cast<double>(k) * period;
    if (shift - period > x1) break;
    next_atom = 0;
    for (const auto& seg : segments_) {
      const double start = shift + seg.from;
      // The atom (if any) at the segment start acts before the segment.
      while (next_atom < atoms_.size() && atoms_[next_atom].position <= seg.from) {
        const double pos = shift + atoms_[next_atom].position;
        if (pos >= x0 - tol0 && pos < x1 - tol1) on_atom(pos, atoms_[next_atom]);
        ++next_atom;
      }
      const double lo = std::max(start, x0);
      const double hi = std::min(shift + seg.to, x1);
      if (hi - lo > tol1) on_segment(lo, hi, seg);
    }
  }
}

}  // namespace floq
