#include "floq/floquet.hpp"

#include <cmath>

#include "floq/linalg.hpp"

namespace floq {

namespace {

constexpr double kJordanTol = 1e-8;

ComplexVector unit(int n, int i) {
  ComplexVector v = ComplexVector::Zero(n);
  v(i) = 1.0;
  return v;
}

// Eigenvector of a 2x2 matrix for eigenvalue rho, from whichever row of
// M - rho I gives the better-conditioned null vector.
ComplexVector eigenvector(const ComplexMatrix& m, cplx rho) {
  ComplexVector a(2);
  a << m(0, 1), rho - m(0, 0);
  ComplexVector b(2);
  b << rho - m(1, 1), m(1, 0);
  ComplexVector v = a.norm() >= b.norm() ? a : b;
  const double norm = v.norm();
  if (norm == 0.0) return unit(2, 0);
  return v / norm;
}

// rho^k by repeated squaring.
cplx int_power(cplx rho, long k) {
  if (k < 0) return int_power(1.0 / rho, -k);
  cplx result = 1.0;
  cplx base = rho;
  while (k > 0) {
    if (k & 1) result *= base;
    base *= base;
    k >>= 1;
  }
  return result;
}

}  // namespace

std::string to_string(FloquetStructure s) {
  switch (s) {
    case FloquetStructure::scalar: return "scalar";
    case FloquetStructure::distinct: return "distinct";
    case FloquetStructure::double_diagonal: return "double_diagonal";
    case FloquetStructure::double_jordan: return "double_jordan";
  }
  return "unknown";
}

MonodromyData monodromy(const PeriodLayout& layout, cplx lambda) {
  const auto& sys = layout.system();
  const double x0 = sys.base_point;
  MonodromyData out;
  out.lambda = lambda;
  out.M = fundamental_matrix(layout, lambda, x0, x0 + sys.period()).value();
  out.det_M = out.M.determinant();
  out.D = out.M.trace();
  return out;
}

MonodromyData monodromy(const CanonicalSystem& sys, cplx lambda) {
  return monodromy(PeriodLayout(sys), lambda);
}

cplx discriminant(const PeriodLayout& layout, cplx lambda) {
  return monodromy(layout, lambda).D;
}

cplx discriminant(const CanonicalSystem& sys, cplx lambda) {
  return monodromy(sys, lambda).D;
}

FloquetData multipliers_exponents(const PeriodLayout& layout, cplx lambda) {
  const auto& sys = layout.system();
  const double period = sys.period();
  FloquetData out;
  out.monodromy = monodromy(layout, lambda);
  const auto& m = out.monodromy.M;

  if (sys.n == 1) {
    out.structure = FloquetStructure::scalar;
    out.multipliers = {m(0, 0)};
    out.exponents = {std::log(m(0, 0)) / period};
    out.eigenvectors = {unit(1, 0)};
    return out;
  }

  const cplx d = out.monodromy.D;
  const cplx root = std::sqrt(d * d - 4.0);
  cplx rho1 = 0.5 * (d + root);
  cplx rho2 = 0.5 * (d - root);
  if (std::abs(rho2) > std::abs(rho1) ||
      (std::abs(rho2) == std::abs(rho1) && rho1.imag() < 0.0)) {
    std::swap(rho1, rho2);
  }
  // The larger root is computed without cancellation; its partner follows
  // from rho1 rho2 = 1 unless both sit on the unit circle.
  if (std::abs(std::abs(rho1) - 1.0) > 1e-8) rho2 = 1.0 / rho1;
  out.multipliers = {rho1, rho2};
  out.exponents = {std::log(rho1) / period, std::log(rho2) / period};

  const double disc_scale = 1.0 + std::norm(d);
  const double disc = std::abs(d * d - 4.0);
  const bool near_double = disc <= kJordanTol * disc_scale;
  const double sign = d.real() >= 0.0 ? 1.0 : -1.0;
  const double dev = max_abs(ComplexMatrix(m - sign * ComplexMatrix::Identity(2, 2)));

  auto in_band = [](double value, double ref) { return value > 1e-2 * ref && value < 1e2 * ref; };
  out.near_threshold = in_band(disc, kJordanTol * disc_scale) || (near_double && in_band(dev, kJordanTol));

  if (!near_double) {
    out.structure = FloquetStructure::distinct;
    out.eigenvectors = {eigenvector(m, rho1), eigenvector(m, rho2)};
    return out;
  }
  if (dev <= kJordanTol) {
    out.structure = FloquetStructure::double_diagonal;
    out.eigenvectors = {unit(2, 0), unit(2, 1)};
    return out;
  }

  out.structure = FloquetStructure::double_jordan;
  const cplx rho = 0.5 * d;
  out.jordan_multiplier = rho;
  const ComplexMatrix nil = m - rho * ComplexMatrix::Identity(2, 2);
  const int col = nil.col(0).norm() >= nil.col(1).norm() ? 0 : 1;
  const ComplexVector gen = unit(2, col);
  out.eigenvectors = {ComplexVector(nil * gen)};
  out.jordan_vector = gen;
  return out;
}

FloquetData multipliers_exponents(const CanonicalSystem& sys, cplx lambda) {
  return multipliers_exponents(PeriodLayout(sys), lambda);
}

cplx floquet_polynomial(int j, double x, cplx rho, double period) {
  cplx q = 1.0;
  for (int i = 0; i < j; ++i) {
    q *= (x - i * period) / (static_cast<double>(i + 1) * rho * period);
  }
  return q;
}

FloquetBasis::FloquetBasis(const CanonicalSystem& sys, cplx lambda)
    : lambda_(lambda), layout_(sys), data_(multipliers_exponents(layout_, lambda)) {}

std::pair<double, long> FloquetBasis::reduce(double x) const {
  const auto& sys = layout_.system();
  const double period = sys.period();
  const double x0 = sys.base_point;
  long k = static_cast<long>(std::floor((x - x0) / period));
  double r = x - static_cast<double>(k) * period;
  if (r >= x0 + period) {
    r -= period;
    ++k;
  } else if (r < x0) {
    r += period;
    --k;
  }
  return {r, k};
}

BalancedValue FloquetBasis::solution(const ComplexVector& c, cplx rho, double x) const {
  const auto [r, k] = reduce(x);
  const auto u = balanced_fundamental(layout_, lambda_, r);
  const cplx scale = int_power(rho, k);
  return {x, scale * (u.minus * c), scale * (u.plus * c), scale * (u.balanced * c)};
}

BalancedValue FloquetBasis::solution(int which, double x) const {
  if (which < 1 || which > static_cast<int>(data_.multipliers.size())) {
    throw InvalidArgument("floquet_solution: which must be 1 or 2");
  }
  if (data_.structure == FloquetStructure::double_jordan) {
    if (which == 2) {
      throw StructureError(
          "floquet_solution: monodromy is a Jordan block; use generalized_floquet");
    }
    return solution(data_.eigenvectors[0], data_.jordan_multiplier, x);
  }
  if (data_.structure == FloquetStructure::double_diagonal) {
    return solution(data_.eigenvectors[which - 1], 0.5 * data_.monodromy.D, x);
  }
  return solution(data_.eigenvectors[which - 1], data_.multipliers[which - 1], x);
}

std::pair<BalancedValue, BalancedValue> FloquetBasis::generalized(double x) const {
  if (data_.structure != FloquetStructure::double_jordan) {
    throw StructureError("generalized_floquet: monodromy is not a Jordan block");
  }
  const cplx rho = data_.jordan_multiplier;
  const ComplexVector& c = data_.eigenvectors[0];
  const ComplexVector& c_gen = *data_.jordan_vector;
  const auto [r, k] = reduce(x);
  const auto u = balanced_fundamental(layout_, lambda_, r);
  // M^k c_gen = rho^k c_gen + k rho^{k-1} c on the Jordan chain.
  const cplx rk = int_power(rho, k);
  const ComplexVector chain = rk * c_gen + (static_cast<double>(k) * rk / rho) * c;
  const ComplexVector eig = rk * c;
  BalancedValue v1{x, u.minus * eig, u.plus * eig, u.balanced * eig};
  BalancedValue v2{x, u.minus * chain, u.plus * chain, u.balanced * chain};
  return {v1, v2};
}

PeriodicFactors FloquetBasis::periodic_factors(double x) const {
  const auto [v1, v2] = generalized(x);
  const cplx rho = data_.jordan_multiplier;
  const double period = layout_.system().period();
  const cplx alpha = std::log(rho) / period;
  const cplx damp = std::exp(-alpha * x);
  const cplx q1 = floquet_polynomial(1, x, rho, period);
  PeriodicFactors out;
  out.p0 = damp * v1.u_balanced;
  out.p1 = damp * v2.u_balanced - q1 * out.p0;
  return out;
}

BalancedValue floquet_solution(const CanonicalSystem& sys, cplx lambda, int which, double x) {
  return FloquetBasis(sys, lambda).solution(which, x);
}

std::pair<BalancedValue, BalancedValue> generalized_floquet(const CanonicalSystem& sys, cplx lambda,
                                                            double x) {
  return FloquetBasis(sys, lambda).generalized(x);
}

ComplexMatrix t_matrix(const PeriodLayout& layout, cplx lambda, int quadrature_order) {
  const auto& sys = layout.system();
  const cplx lambda_bar = std::conj(lambda);

  // Piece length such that the fastest exponential rate changes by at most
  // one e-fold per piece.
  double rate = 0.0;
  for (const auto& seg : layout.segments()) {
    rate = std::max(rate, spectral_rate(segment_generator(sys.J, seg.q_density, seg.w_density, lambda)));
  }
  QuadratureOptions opts;
  opts.order = quadrature_order;
  opts.max_piece = rate > 0.0 ? 1.0 / rate : 0.0;
  // U jumps at every atom of the system and kinks at every density cut.
  const double period = sys.period();
  for (const auto& seg : layout.segments()) {
    opts.breakpoints.push_back(seg.from - std::floor(seg.from / period) * period);
  }

  return integrate_period(
      sys.w, sys.base_point,
      [&](double x, MassKind kind, const RealMatrix& mass) -> ComplexMatrix {
        const auto u = balanced_fundamental(layout, lambda, x);
        const auto u_bar = balanced_fundamental(layout, lambda_bar, x);
        const ComplexMatrix& right = kind == MassKind::atom ? u.balanced : u.minus;
        const ComplexMatrix& left = kind == MassKind::atom ? u_bar.balanced : u_bar.minus;
        return left.adjoint() * mass.cast<cplx>() * right;
      },
      opts);
}

ComplexMatrix t_matrix(const CanonicalSystem& sys, cplx lambda, int quadrature_order) {
  return t_matrix(PeriodLayout(sys), lambda, quadrature_order);
}

cplx discriminant_derivative(const PeriodLayout& layout, cplx lambda) {
  const auto& sys = layout.system();
  const auto mono = monodromy(layout, lambda);
  const ComplexMatrix t = t_matrix(layout, lambda);
  return (mono.M * sys.J.inverse() * t).trace();
}

cplx discriminant_derivative(const CanonicalSystem& sys, cplx lambda) {
  return discriminant_derivative(PeriodLayout(sys), lambda);
}

}  // namespace floq
