#include "floq/propagation.hpp"

#include <algorithm>
#include <cmath>

namespace floq {

namespace {

RealMatrix density_at(const MatrixMeasureSpec& m, double x) {
  for (const auto& s : m.density) {
    if (x >= s.from && x < s.to) return s.matrix;
  }
  return RealMatrix::Zero(m.dim, m.dim);
}

ComplexMatrix identity(int n) { return ComplexMatrix::Identity(n, n); }

}  // namespace

ComplexMatrix TransferMatrix::value() const {
  return ScaledMatrix{matrix, log_scale}.value();
}

ComplexMatrix atom_transfer(const ComplexMatrix& j, const RealMatrix& dq, const RealMatrix& dw,
                            cplx lambda, double position) {
  const ComplexMatrix b_plus = jump_matrix(j, dq, dw, lambda, +1);
  const ComplexMatrix b_minus = jump_matrix(j, dq, dw, lambda, -1);
  const double scale = 1.0 + max_abs(b_plus);
  const double det_scale = b_plus.rows() == 1 ? scale : scale * scale;
  if (std::abs(b_plus.determinant()) <= 1e-14 * det_scale) {
    throw SingularLambdaError(position, lambda);
  }
  return b_plus.inverse() * b_minus;
}

ComplexMatrix segment_generator(const ComplexMatrix& j, const RealMatrix& q_density,
                                const RealMatrix& w_density, cplx lambda) {
  const ComplexMatrix rhs = lambda * w_density.cast<cplx>() - q_density.cast<cplx>();
  return j.inverse() * rhs;
}

ComplexMatrix segment_transfer(const ComplexMatrix& j, const RealMatrix& q_density,
                               const RealMatrix& w_density, cplx lambda, double h) {
  if (!(h > 0.0)) throw InvalidArgument("segment_transfer: length must be positive");
  return expm(h * segment_generator(j, q_density, w_density, lambda));
}

PeriodLayout::PeriodLayout(const CanonicalSystem& sys)
    : sys_(std::make_shared<const CanonicalSystem>(sys)), atoms_(merged_atoms(sys)) {
  const double period = sys.period();
  std::vector<double> cuts{0.0, period};
  for (const auto& s : sys.q.density) cuts.insert(cuts.end(), {s.from, s.to});
  for (const auto& s : sys.w.density) cuts.insert(cuts.end(), {s.from, s.to});
  for (const auto& a : atoms_) cuts.push_back(a.position);
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> unique_cuts;
  for (double c : cuts) {
    if (c < 0.0 || c > period) continue;
    if (!unique_cuts.empty() && c - unique_cuts.back() <= position_tolerance(c, period)) continue;
    unique_cuts.push_back(c);
  }
  // Snap atom positions onto the cut list so the walk compares equal values.
  for (auto& a : atoms_) {
    for (double c : unique_cuts) {
      if (std::abs(c - a.position) <= position_tolerance(c, period)) a.position = c;
    }
  }
  for (std::size_t i = 0; i + 1 < unique_cuts.size(); ++i) {
    const double from = unique_cuts[i];
    const double to = unique_cuts[i + 1];
    const double mid = 0.5 * (from + to);
    segments_.push_back({from, to, density_at(sys.q, mid), density_at(sys.w, mid)});
  }
}

const SystemAtom* PeriodLayout::atom_at(double x) const {
  const double period = sys_->period();
  const double tol = position_tolerance(x, period);
  double r = x - std::floor(x / period) * period;
  for (const auto& a : atoms_) {
    if (std::abs(r - a.position) <= tol || std::abs(r - period - a.position) <= tol) return &a;
  }
  return nullptr;
}

TransferMatrix fundamental_matrix(const PeriodLayout& layout, cplx lambda, double x0, double x1) {
  const auto& sys = layout.system();
  const int n = sys.n;
  if (x1 == x0) return {lambda, x0, x1, identity(n), 0.0};

  const double lo = std::min(x0, x1);
  const double hi = std::max(x0, x1);
  ScaledMatrix product{identity(n), 0.0};
  layout.walk(
      lo, hi,
      [&](double pos, const SystemAtom& atom) {
        product = multiply({atom_transfer(sys.J, atom.dq, atom.dw, lambda, pos), 0.0}, product);
      },
      [&](double from, double to, const PeriodLayout::Segment& seg) {
        const ComplexMatrix gen = segment_generator(sys.J, seg.q_density, seg.w_density, lambda);
        product = multiply(expm_scaled((to - from) * gen), product);
      });

  if (x1 > x0) return {lambda, x0, x1, product.matrix, product.log_scale};
  return {lambda, x0, x1, product.matrix.inverse(), -product.log_scale};
}

TransferMatrix fundamental_matrix(const CanonicalSystem& sys, cplx lambda, double x0, double x1) {
  return fundamental_matrix(PeriodLayout(sys), lambda, x0, x1);
}

BalancedMatrix balanced_fundamental(const PeriodLayout& layout, cplx lambda, double x) {
  const auto& sys = layout.system();
  BalancedMatrix out;
  out.minus = fundamental_matrix(layout, lambda, sys.base_point, x).value();
  if (const auto* atom = layout.atom_at(x)) {
    out.plus = atom_transfer(sys.J, atom->dq, atom->dw, lambda, x) * out.minus;
  } else {
    out.plus = out.minus;
  }
  out.balanced = 0.5 * (out.minus + out.plus);
  return out;
}

BalancedValue balanced_solution(const PeriodLayout& layout, cplx lambda, const ComplexVector& c,
                                double x) {
  if (c.size() != layout.system().n) {
    throw InvalidArgument("balanced_solution: initial vector has wrong dimension");
  }
  const auto u = balanced_fundamental(layout, lambda, x);
  return {x, u.minus * c, u.plus * c, u.balanced * c};
}

BalancedValue balanced_solution(const CanonicalSystem& sys, cplx lambda, const ComplexVector& c,
                                double x) {
  return balanced_solution(PeriodLayout(sys), lambda, c, x);
}

}  // namespace floq
