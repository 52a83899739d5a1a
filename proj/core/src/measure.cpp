#include "floq/measure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "floq/linalg.hpp"

namespace floq {

SingularLambdaError::SingularLambdaError(double position, cplx lambda)
    : Error([&] {
        std::ostringstream os;
        os.precision(17);
        os << "lambda in Lambda at atom " << position << ": B+(p, lambda) is singular for lambda = "
           << lambda.real() << (lambda.imag() < 0 ? " - " : " + ") << std::abs(lambda.imag())
           << "i";
        return os.str();
      }()),
      position_(position),
      lambda_(lambda) {}

IdenticallySingularError::IdenticallySingularError(double position)
    : Error([&] {
        std::ostringstream os;
        os.precision(17);
        os << "atom at " << position
           << " is identically singular: det B+(p, lambda) = 0 for every lambda (Lambda = C)";
        return os.str();
      }()),
      position_(position) {}

SpectrumError::SpectrumError(const std::string& what, std::string label)
    : Error(what), label_(std::move(label)) {}

namespace {

// Reduce x into [0, period).
double reduce(double x, double period) {
  double r = x - std::floor(x / period) * period;
  if (r >= period) r -= period;
  if (r < 0.0) r = 0.0;
  return r;
}

bool same_point_mod(double x, double p, double period) {
  const double tol = position_tolerance(x, period);
  const double r = reduce(x, period);
  return std::abs(r - p) <= tol || std::abs(r - period - p) <= tol ||
         std::abs(r + period - p) <= tol;
}

bool all_finite(const RealMatrix& m) { return m.allFinite(); }

bool has_dim(const RealMatrix& m, int n) { return m.rows() == n && m.cols() == n; }

double symmetric_min_eigenvalue(const RealMatrix& m) {
  if (m.rows() == 1) return m(0, 0);
  const double half_trace = 0.5 * (m(0, 0) + m(1, 1));
  const double half_diff = 0.5 * (m(0, 0) - m(1, 1));
  const double off = 0.5 * (m(0, 1) + m(1, 0));
  return half_trace - std::hypot(half_diff, off);
}

void check_measure_structure(const MatrixMeasureSpec& m, const char* name, int n,
                             std::vector<Violation>& out) {
  auto add = [&](ViolationCode code, std::optional<double> pos, const std::string& msg) {
    out.push_back({code, pos, std::string(name) + ": " + msg});
  };
  if (m.dim != n) add(ViolationCode::bad_dimension, {}, "declared dimension differs from n");
  if (!(m.period > 0.0) || !std::isfinite(m.period)) {
    add(ViolationCode::bad_period, {}, "period must be positive and finite");
    return;
  }
  const double tol = position_tolerance(m.period, m.period);
  for (std::size_t i = 0; i < m.atoms.size(); ++i) {
    const auto& a = m.atoms[i];
    if (!has_dim(a.weight, n)) {
      add(ViolationCode::bad_dimension, a.position, "atom weight has wrong dimension");
      continue;
    }
    if (!std::isfinite(a.position) || !all_finite(a.weight)) {
      add(ViolationCode::non_finite, a.position, "atom has non-finite data");
      continue;
    }
    if (a.position < 0.0 || a.position >= m.period) {
      add(ViolationCode::atom_out_of_range, a.position, "atom position outside [0, period)");
    }
    if (i > 0 && !(a.position > m.atoms[i - 1].position)) {
      add(ViolationCode::atoms_not_increasing, a.position,
          a.position == m.atoms[i - 1].position ? "duplicate atom position"
                                                : "atom positions not strictly increasing");
    }
  }
  if (m.density.empty()) return;
  if (std::abs(m.density.front().from) > tol) {
    add(ViolationCode::segments_not_covering, m.density.front().from,
        "first density segment must start at 0");
  }
  if (std::abs(m.density.back().to - m.period) > tol) {
    add(ViolationCode::segments_not_covering, m.density.back().to,
        "last density segment must end at the period");
  }
  for (std::size_t i = 0; i < m.density.size(); ++i) {
    const auto& s = m.density[i];
    if (!has_dim(s.matrix, n)) {
      add(ViolationCode::bad_dimension, s.from, "density matrix has wrong dimension");
      continue;
    }
    if (!std::isfinite(s.from) || !std::isfinite(s.to) || !all_finite(s.matrix)) {
      add(ViolationCode::non_finite, s.from, "density segment has non-finite data");
      continue;
    }
    if (!(s.to > s.from)) {
      add(ViolationCode::segments_not_covering, s.from, "density breakpoints not increasing");
    }
    if (i > 0 && std::abs(m.density[i - 1].to - s.from) > tol) {
      add(ViolationCode::segments_not_covering, s.from, "density segments leave a gap or overlap");
    }
  }
}

template <class F>
void for_each_matrix(const MatrixMeasureSpec& m, F&& f) {
  for (const auto& a : m.atoms) f(a.weight, std::optional<double>(a.position));
  for (const auto& s : m.density) f(s.matrix, std::optional<double>(s.from));
}

void add_unique(std::vector<cplx>& roots, cplx z) {
  for (const auto& r : roots) {
    if (std::abs(r - z) <= 1e-10 * (1.0 + std::abs(z))) return;
  }
  roots.push_back(z);
}

}  // namespace

double position_tolerance(double x, double period) {
  return 1e-12 * (std::abs(x) + std::abs(period));
}

MatrixMeasureSpec MatrixMeasureSpec::zero(int dim, double period) {
  return MatrixMeasureSpec{dim, period, {}, {}};
}

MatrixMeasureSpec MatrixMeasureSpec::lebesgue(const RealMatrix& m, double period) {
  return MatrixMeasureSpec{static_cast<int>(m.rows()), period, {}, {{0.0, period, m}}};
}

MatrixMeasureSpec MatrixMeasureSpec::comb(const RealMatrix& m, double period, double position) {
  return MatrixMeasureSpec{static_cast<int>(m.rows()), period, {{position, m}}, {}};
}

bool MatrixMeasureSpec::is_zero() const {
  for (const auto& a : atoms)
    if (!a.weight.isZero(0.0)) return false;
  for (const auto& s : density)
    if (!s.matrix.isZero(0.0)) return false;
  return true;
}

ComplexMatrix canonical_j(double r) {
  ComplexMatrix j(2, 2);
  j << 0.0, -r, r, 0.0;
  return j;
}

ComplexMatrix scalar_j(double imag) {
  ComplexMatrix j(1, 1);
  j(0, 0) = cplx(0.0, imag);
  return j;
}

double default_base_point(const MatrixMeasureSpec& q, const MatrixMeasureSpec& w) {
  std::vector<double> pos;
  for (const auto& a : q.atoms) pos.push_back(a.position);
  for (const auto& a : w.atoms) pos.push_back(a.position);
  if (pos.empty()) return 0.0;
  const double period = q.period;
  std::sort(pos.begin(), pos.end());
  pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
  double best_gap = -1.0;
  double best_mid = 0.0;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    const double next = i + 1 < pos.size() ? pos[i + 1] : pos.front() + period;
    const double gap = next - pos[i];
    if (gap > best_gap) {
      best_gap = gap;
      best_mid = 0.5 * (pos[i] + next);
    }
  }
  return reduce(best_mid, period);
}

std::string to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::bad_dimension: return "bad_dimension";
    case ViolationCode::bad_period: return "bad_period";
    case ViolationCode::period_mismatch: return "period_mismatch";
    case ViolationCode::non_finite: return "non_finite";
    case ViolationCode::atom_out_of_range: return "atom_out_of_range";
    case ViolationCode::atoms_not_increasing: return "atoms_not_increasing";
    case ViolationCode::segments_not_covering: return "segments_not_covering";
    case ViolationCode::j_not_admissible: return "j_not_admissible";
    case ViolationCode::q_not_symmetric: return "q_not_symmetric";
    case ViolationCode::w_not_psd: return "w_not_psd";
    case ViolationCode::base_point_invalid: return "base_point_invalid";
    case ViolationCode::real_singular_lambda: return "real_singular_lambda";
    case ViolationCode::identically_singular: return "identically_singular";
  }
  return "unknown";
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  os.precision(17);
  if (ok) {
    os << "ok (" << singular_set.size() << " singular points, none real)";
    return os.str();
  }
  os << "invalid problem:";
  for (const auto& v : violations) {
    os << "\n  [" << to_string(v.code) << "]";
    if (v.position) os << " at x = " << *v.position;
    os << ": " << v.message;
  }
  return os.str();
}

bool DetPolynomial::is_identically_zero() const {
  const double eps = 1e-13 * scale;
  return std::abs(c0) <= eps && std::abs(c1) <= eps && std::abs(c2) <= eps;
}

std::vector<cplx> DetPolynomial::roots() const {
  const double eps = 1e-13 * scale;
  std::vector<cplx> out;
  const bool real_coeffs = c0.imag() == 0.0 && c1.imag() == 0.0 && c2.imag() == 0.0;
  if (std::abs(c2) > eps) {
    if (real_coeffs) {
      const double a = c2.real();
      const double b = c1.real();
      const double c = c0.real();
      const double disc = b * b - 4.0 * a * c;
      if (disc < 0.0) {
        // Exact conjugate pair.
        const double re = -b / (2.0 * a);
        const double im = std::sqrt(-disc) / (2.0 * std::abs(a));
        out.emplace_back(re, im);
        out.emplace_back(re, -im);
      } else {
        const double qv = -0.5 * (b + std::copysign(std::sqrt(disc), b));
        if (qv == 0.0) {
          out.emplace_back(0.0, 0.0);
          out.emplace_back(0.0, 0.0);
        } else {
          out.emplace_back(qv / a, 0.0);
          out.emplace_back(c / qv, 0.0);
        }
      }
      return out;
    }
    const cplx disc = std::sqrt(c1 * c1 - 4.0 * c2 * c0);
    const cplx plus = c1 + disc;
    const cplx minus = c1 - disc;
    const cplx qv = -0.5 * (std::abs(plus) >= std::abs(minus) ? plus : minus);
    if (std::abs(qv) == 0.0) {
      out.emplace_back(0.0, 0.0);
      out.emplace_back(0.0, 0.0);
    } else {
      out.push_back(qv / c2);
      out.push_back(c0 / qv);
    }
    return out;
  }
  if (std::abs(c1) > eps) out.push_back(-c0 / c1);
  return out;
}

ComplexMatrix jump_matrix(const ComplexMatrix& j, const RealMatrix& dq, const RealMatrix& dw,
                          cplx lambda, int sign) {
  const double half = 0.5 * static_cast<double>(sign);
  ComplexMatrix b = j;
  for (Eigen::Index r = 0; r < j.rows(); ++r)
    for (Eigen::Index c = 0; c < j.cols(); ++c) b(r, c) += half * (dq(r, c) - lambda * dw(r, c));
  return b;
}

DetPolynomial jump_determinant(const ComplexMatrix& j, const RealMatrix& dq, const RealMatrix& dw,
                               int sign) {
  // B(lambda) = A - lambda C with A = J + sign/2 dq and C = sign/2 dw.
  const double half = 0.5 * static_cast<double>(sign);
  ComplexMatrix a = j;
  ComplexMatrix c(j.rows(), j.cols());
  for (Eigen::Index r = 0; r < j.rows(); ++r)
    for (Eigen::Index k = 0; k < j.cols(); ++k) {
      a(r, k) += half * dq(r, k);
      c(r, k) = half * dw(r, k);
    }
  DetPolynomial p;
  const double na = max_abs(a);
  const double nc = max_abs(c);
  p.scale = 1.0 + na * na + nc * nc;
  if (j.rows() == 1) {
    p.c0 = a(0, 0);
    p.c1 = -c(0, 0);
    return p;
  }
  p.c0 = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  p.c1 = -(a(0, 0) * c(1, 1) + a(1, 1) * c(0, 0) - a(0, 1) * c(1, 0) - a(1, 0) * c(0, 1));
  p.c2 = c(0, 0) * c(1, 1) - c(0, 1) * c(1, 0);
  return p;
}

std::vector<SystemAtom> merged_atoms(const CanonicalSystem& sys) {
  const int n = sys.n;
  const double period = sys.period();
  std::vector<SystemAtom> out;
  auto find_or_add = [&](double pos) -> SystemAtom& {
    for (auto& a : out) {
      if (std::abs(a.position - pos) <= position_tolerance(pos, period)) return a;
    }
    out.push_back({pos, RealMatrix::Zero(n, n), RealMatrix::Zero(n, n)});
    return out.back();
  };
  for (const auto& a : sys.q.atoms) find_or_add(a.position).dq += a.weight;
  for (const auto& a : sys.w.atoms) find_or_add(a.position).dw += a.weight;
  std::sort(out.begin(), out.end(),
            [](const SystemAtom& x, const SystemAtom& y) { return x.position < y.position; });
  return out;
}

ValidationReport validate_system(const CanonicalSystem& sys) {
  ValidationReport rep;
  auto& v = rep.violations;
  const int n = sys.n;

  if (n != 1 && n != 2) {
    v.push_back({ViolationCode::bad_dimension, {}, "n must be 1 or 2"});
    return rep;
  }
  if (sys.J.rows() != n || sys.J.cols() != n) {
    v.push_back({ViolationCode::bad_dimension, {}, "J has wrong dimension"});
  }
  check_measure_structure(sys.q, "q", n, v);
  check_measure_structure(sys.w, "w", n, v);
  if (sys.q.period > 0.0 && sys.w.period > 0.0 &&
      std::abs(sys.q.period - sys.w.period) > position_tolerance(sys.q.period, sys.q.period)) {
    v.push_back({ViolationCode::period_mismatch, {}, "q and w must share the period"});
  }
  if (!v.empty()) return rep;  // the remaining checks need well-formed data

  // J
  if (!sys.J.allFinite()) {
    v.push_back({ViolationCode::non_finite, {}, "J has non-finite entries"});
  } else if (n == 2) {
    const double scale = max_abs(sys.J);
    const bool real = sys.J.imag().isZero(0.0);
    const bool skew = max_abs(ComplexMatrix(sys.J + sys.J.transpose())) <= 1e-12 * scale;
    const cplx det = sys.J.determinant();
    if (!real || !skew || std::abs(det) <= 1e-14 * (1.0 + scale * scale)) {
      v.push_back({ViolationCode::j_not_admissible, {},
                   "J must be real, skew-symmetric and invertible"});
    }
  } else {
    const cplx j = sys.J(0, 0);
    if (std::abs(j) == 0.0 || std::abs(j.real()) > 1e-12 * std::abs(j)) {
      v.push_back({ViolationCode::j_not_admissible, {}, "J must be nonzero and purely imaginary"});
    }
  }

  for_each_matrix(sys.q, [&](const RealMatrix& m, std::optional<double> pos) {
    if (max_abs(RealMatrix(m - m.transpose())) > 1e-12 * (1.0 + max_abs(m))) {
      v.push_back({ViolationCode::q_not_symmetric, pos, "q weight/density is not symmetric"});
    }
  });
  for_each_matrix(sys.w, [&](const RealMatrix& m, std::optional<double> pos) {
    const double norm = max_abs(m);
    const bool symmetric = max_abs(RealMatrix(m - m.transpose())) <= 1e-12 * (1.0 + norm);
    if (!symmetric || symmetric_min_eigenvalue(m) < -1e-12 * norm) {
      v.push_back({ViolationCode::w_not_psd, pos,
                   "w weight/density is not positive semidefinite"});
    }
  });

  const double period = sys.period();
  if (!std::isfinite(sys.base_point) || sys.base_point < 0.0 || sys.base_point >= period) {
    v.push_back({ViolationCode::base_point_invalid, sys.base_point,
                 "base point must lie in [0, period)"});
  } else if (is_atom(sys.q, sys.base_point) || is_atom(sys.w, sys.base_point)) {
    v.push_back({ViolationCode::base_point_invalid, sys.base_point,
                 "base point coincides with an atom"});
  }

  if (sys.J.rows() == n) {
    for (const auto& atom : merged_atoms(sys)) {
      const auto plus = jump_determinant(sys.J, atom.dq, atom.dw, +1);
      if (plus.is_identically_zero()) {
        rep.identically_singular = true;
        if (!rep.identically_singular_at) rep.identically_singular_at = atom.position;
        v.push_back({ViolationCode::identically_singular, atom.position,
                     "det B+(p, lambda) vanishes for every lambda: identically singular (Lambda = C)"});
        continue;
      }
      const auto minus = jump_determinant(sys.J, atom.dq, atom.dw, -1);
      std::vector<cplx> roots = plus.roots();
      const auto more = minus.roots();
      roots.insert(roots.end(), more.begin(), more.end());
      for (const auto& z : roots) {
        add_unique(rep.singular_set, z);
        if (std::abs(z.imag()) <= 1e-9 * (1.0 + std::abs(z))) {
          std::ostringstream os;
          os.precision(17);
          os << "real singular point lambda = " << z.real() << " (B+ not invertible)";
          v.push_back({ViolationCode::real_singular_lambda, atom.position, os.str()});
        }
      }
    }
  }

  rep.ok = v.empty();
  return rep;
}

RealMatrix jump_at(const MatrixMeasureSpec& m, double x) {
  for (const auto& a : m.atoms) {
    if (same_point_mod(x, a.position, m.period)) return a.weight;
  }
  return RealMatrix::Zero(m.dim, m.dim);
}

bool is_atom(const MatrixMeasureSpec& m, double x) {
  return std::any_of(m.atoms.begin(), m.atoms.end(),
                     [&](const Atom& a) { return same_point_mod(x, a.position, m.period); });
}

std::vector<cplx> singular_set(const CanonicalSystem& sys) {
  std::vector<cplx> out;
  for (const auto& atom : merged_atoms(sys)) {
    const auto plus = jump_determinant(sys.J, atom.dq, atom.dw, +1);
    if (plus.is_identically_zero()) throw IdenticallySingularError(atom.position);
    for (int sign : {+1, -1}) {
      for (const auto& z : jump_determinant(sys.J, atom.dq, atom.dw, sign).roots()) {
        add_unique(out, z);
      }
    }
  }
  return out;
}

ComplexMatrix integrate_period(const MatrixMeasureSpec& m, double anchor,
                               const PeriodIntegrand& integrand, const QuadratureOptions& opts) {
  if (is_atom(m, anchor)) {
    throw InvalidArgument("integrate_period: anchor is an atom; shift the anchor");
  }
  const double period = m.period;
  ComplexMatrix sum = ComplexMatrix::Zero(m.dim, m.dim);

  for (const auto& a : m.atoms) {
    const double x = anchor + reduce(a.position - anchor, period);
    sum += integrand(x, MassKind::atom, a.weight);
  }

  const auto& rule = gauss_legendre(opts.order);
  const double base = std::floor(anchor / period) * period;
  const double end = anchor + period;
  for (double shift : {base, base + period}) {
    for (const auto& s : m.density) {
      const double lo = std::max(anchor, shift + s.from);
      const double hi = std::min(end, shift + s.to);
      if (!(hi > lo)) continue;
      std::vector<double> cuts{lo, hi};
      for (double b : opts.breakpoints) {
        for (double c : {shift + b, shift + b - period, shift + b + period}) {
          if (c > lo + position_tolerance(c, period) && c < hi - position_tolerance(c, period)) cuts.push_back(c);
        }
      }
      std::sort(cuts.begin(), cuts.end());
      for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
        const double len = cuts[j + 1] - cuts[j];
        int pieces = 1;
        if (opts.max_piece > 0.0) pieces = std::max(1, static_cast<int>(std::ceil(len / opts.max_piece)));
        const double h = len / pieces;
        for (int k = 0; k < pieces; ++k) {
          const double mid = cuts[j] + (k + 0.5) * h;
          for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double x = mid + 0.5 * h * rule.nodes[i];
            sum += integrand(x, MassKind::density, RealMatrix(s.matrix * (0.5 * h * rule.weights[i])));
          }
        }
      }
    }
  }
  return sum;
}

ComplexMatrix period_integral(const MatrixMeasureSpec& m,
                              const std::function<ComplexMatrix(double)>& g, double anchor,
                              const QuadratureOptions& opts) {
  return integrate_period(
      m, anchor,
      [&](double x, MassKind, const RealMatrix& mass) -> ComplexMatrix {
        return g(x) * mass.cast<cplx>();
      },
      opts);
}

}  // namespace floq
