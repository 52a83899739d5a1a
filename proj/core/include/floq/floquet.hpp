#pragma once

#include <optional>
#include <string>
#include <vector>

#include "floq/measure.hpp"
#include "floq/propagation.hpp"

namespace floq {

/// M(lambda) with U(x + period) = U(x) M for U(base_point) = I.
struct MonodromyData {
  cplx lambda;
  ComplexMatrix M;
  cplx det_M;
  /// tr M for n = 2; the multiplier M itself for n = 1.
  cplx D;
};

MonodromyData monodromy(const CanonicalSystem& sys, cplx lambda);
MonodromyData monodromy(const PeriodLayout& layout, cplx lambda);

/// Floquet discriminant tr M(lambda) (the multiplier when n = 1).
cplx discriminant(const CanonicalSystem& sys, cplx lambda);
cplx discriminant(const PeriodLayout& layout, cplx lambda);

enum class FloquetStructure { scalar, distinct, double_diagonal, double_jordan };

std::string to_string(FloquetStructure s);

struct FloquetData {
  MonodromyData monodromy;
  /// rho_1 first with |rho_1| >= |rho_2|; ties broken by Im rho_1 >= 0.
  std::vector<cplx> multipliers;
  /// Principal logarithms divided by the period.
  std::vector<cplx> exponents;
  FloquetStructure structure = FloquetStructure::distinct;
  /// Set when the classification sits close to the Jordan detection threshold.
  bool near_threshold = false;
  /// Eigenvectors of M (distinct / double_diagonal: two, Jordan: one).
  std::vector<ComplexVector> eigenvectors;
  /// Jordan case: (M - rho I) jordan_vector = eigenvectors[0], rho = D / 2.
  std::optional<ComplexVector> jordan_vector;
  /// The multiplier of the Jordan block (D / 2).
  cplx jordan_multiplier{};
};

FloquetData multipliers_exponents(const CanonicalSystem& sys, cplx lambda);
FloquetData multipliers_exponents(const PeriodLayout& layout, cplx lambda);

/// q_{j}(x) of the polynomial factors in generalized Floquet solutions:
/// q_0 = 1, q_{j+1}(x) = q_j(x) (x - j period) / ((j + 1) rho period).
cplx floquet_polynomial(int j, double x, cplx rho, double period);

/// Periodic factors of a Jordan chain: v1 = e^{alpha x} p0,
/// v2 = e^{alpha x} (q_1(x) p0 + p1).
struct PeriodicFactors {
  ComplexVector p0;
  ComplexVector p1;
};

/// Floquet and generalized Floquet solutions at a fixed lambda. Values at x
/// are obtained by propagating over at most one period from the base point
/// and applying the multiplier for the remaining whole periods.
class FloquetBasis {
 public:
  FloquetBasis(const CanonicalSystem& sys, cplx lambda);

  const FloquetData& data() const { return data_; }
  const PeriodLayout& layout() const { return layout_; }
  cplx lambda() const { return lambda_; }

  /// Floquet solution `which` (1 or 2) started from the matching eigenvector.
  /// Throws StructureError for a Jordan block with which = 2.
  BalancedValue solution(int which, double x) const;
  /// Floquet solution for an arbitrary eigenvector c with multiplier rho.
  BalancedValue solution(const ComplexVector& c, cplx rho, double x) const;

  /// v1 (Floquet) and v2 (generalized) for a Jordan block, with
  /// v2(x + period) = rho v2(x) + v1(x).
  std::pair<BalancedValue, BalancedValue> generalized(double x) const;

  /// Balanced periodic factors p0, p1 at x (Jordan structure only).
  PeriodicFactors periodic_factors(double x) const;

 private:
  std::pair<double, long> reduce(double x) const;

  cplx lambda_;
  PeriodLayout layout_;
  FloquetData data_;
};

BalancedValue floquet_solution(const CanonicalSystem& sys, cplx lambda, int which, double x);
std::pair<BalancedValue, BalancedValue> generalized_floquet(const CanonicalSystem& sys, cplx lambda,
                                                            double x);

/// T(lambda) = integral over (x0, x0 + period) of U(., conj lambda)^* w U(., lambda),
/// with balanced U at atoms, so that dM/dlambda = M J^{-1} T.
ComplexMatrix t_matrix(const CanonicalSystem& sys, cplx lambda, int quadrature_order = 8);
ComplexMatrix t_matrix(const PeriodLayout& layout, cplx lambda, int quadrature_order = 8);

/// dD/dlambda = tr(M J^{-1} T).
cplx discriminant_derivative(const CanonicalSystem& sys, cplx lambda);
cplx discriminant_derivative(const PeriodLayout& layout, cplx lambda);

}  // namespace floq
