#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "floq/propagation.hpp"
#include "test_support.hpp"

using namespace floq;
using floq::testing::example_system;
using floq::testing::oracle_atom_transfer;
using floq::testing::oracle_fundamental;
using floq::testing::random_system;
using floq::testing::rel_err;
using floq::testing::uniform;

namespace {

RealMatrix mat(double a, double b, double c, double d) {
  RealMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

ComplexMatrix cmat(cplx a, cplx b, cplx c, cplx d) {
  ComplexMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST(AtomTransfer, ZeroWeightsGiveIdentity) {
  const RealMatrix z = RealMatrix::Zero(2, 2);
  EXPECT_LE(rel_err(atom_transfer(canonical_j(), z, z, 3.0), ComplexMatrix::Identity(2, 2)), 0.0);
}

TEST(AtomTransfer, ScalarWeightCombIsLowerTriangular) {
  for (double l : {-2.0, 0.0, 0.7, 3.0}) {
    const double a = 1.3, alpha = 0.6;
    const auto t = atom_transfer(canonical_j(), mat(a, 0, 0, 0), mat(alpha, 0, 0, 0), l);
    EXPECT_LE(rel_err(t, cmat(1, 0, a - l * alpha, 1)), 1e-15);
  }
}

TEST(AtomTransfer, ScalarCaseIsI) {
  RealMatrix two(1, 1), zero(1, 1);
  two << 2.0;
  zero << 0.0;
  const auto t = atom_transfer(scalar_j(1.0), two, zero, 0.4);
  EXPECT_LE(std::abs(t(0, 0) - cplx(0, 1)), 1e-15);
}

TEST(AtomTransfer, MatchesAdjugateOracleAndHasUnitDeterminant) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 50; ++i) {
    const auto sys = random_system(rng);
    for (const auto& atom : merged_atoms(sys)) {
      const cplx l(uniform(rng, -5, 5), uniform(rng, -1, 1));
      const auto t = atom_transfer(sys.J, atom.dq, atom.dw, l);
      EXPECT_LE(rel_err(t, oracle_atom_transfer(sys.J, atom.dq, atom.dw, l)), 1e-12);
      EXPECT_LE(std::abs(t.determinant() - 1.0), 1e-12 * (1 + t.squaredNorm()));
    }
  }
}

TEST(AtomTransfer, SingularBPlusThrowsWithPosition) {
  try {
    atom_transfer(canonical_j(), RealMatrix::Zero(2, 2), mat(1, 0, 0, 1), cplx(0, 2), 4.0);
    FAIL() << "expected SingularLambdaError";
  } catch (const SingularLambdaError& e) {
    EXPECT_DOUBLE_EQ(e.position(), 4.0);
    EXPECT_EQ(e.lambda(), cplx(0, 2));
  }
}

TEST(SegmentTransfer, Examples) {
  const RealMatrix z = RealMatrix::Zero(2, 2);
  EXPECT_LE(rel_err(segment_transfer(canonical_j(), z, z, 5.0, 1.0), ComplexMatrix::Identity(2, 2)), 0.0);
  EXPECT_LE(rel_err(segment_transfer(canonical_j(), mat(0, 0, 0, -1), z, 0.0, 1.0), cmat(1, 1, 0, 1)),
            1e-15);
  const auto m = segment_transfer(canonical_j(), mat(0, 0, 0, -1), mat(1, 0, 0, 0), M_PI * M_PI, 1.0);
  EXPECT_NEAR(m.trace().real(), -2.0, 1e-14);
  EXPECT_THROW(segment_transfer(canonical_j(), z, z, 1.0, 0.0), InvalidArgument);
}

TEST(FundamentalMatrix, IdentityAtStart) {
  const auto sys = example_system("dirac-comb-full");
  const auto t = fundamental_matrix(sys, 0.3, 0.25, 0.25);
  EXPECT_LE(rel_err(t.value(), ComplexMatrix::Identity(2, 2)), 0.0);
}

TEST(FundamentalMatrix, ScalarCombProductAcrossOnePeriod) {
  // segment(1/2) . atom . segment(1/2) with segment = [[1, h], [0, 1]] and
  // atom = [[1, 0], [a - lambda alpha, 1]] at lambda = 0, a = alpha = 1.
  const auto sys = example_system("dirac-comb-scalar-weight");
  const ComplexMatrix s = cmat(1, 0.5, 0, 1);
  const ComplexMatrix a = cmat(1, 0, 1, 1);
  const ComplexMatrix expected = s * a * s;
  const auto t = fundamental_matrix(sys, 0.0, -0.5, 0.5);
  EXPECT_LE(rel_err(t.value(), expected), 1e-15);
  EXPECT_NEAR(t.value().trace().real(), 3.0, 1e-14);
}

TEST(FundamentalMatrix, AtomEndpointConvention) {
  // [x0, x1) owns the atom at x0 but not the one at x1.
  const auto sys = example_system("dirac-comb-scalar-weight");
  const double l = 0.3;
  const ComplexMatrix atom = cmat(1, 0, 1 - l, 1);
  const ComplexMatrix seg = cmat(1, 1, 0, 1);
  EXPECT_LE(rel_err(fundamental_matrix(sys, l, 0.0, 1.0).value(), ComplexMatrix(seg * atom)), 1e-15);
  EXPECT_LE(rel_err(fundamental_matrix(sys, l, 0.5, 1.5).value(), ComplexMatrix(cmat(1, 0.5, 0, 1) * atom * cmat(1, 0.5, 0, 1))),
            1e-15);
}

TEST(FundamentalMatrix, MatchesRk4OracleOnRandomSystems) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 30; ++i) {
    const auto sys = random_system(rng);
    const double x0 = uniform(rng, -2, 2);
    const double x1 = x0 + uniform(rng, 0.1, 3);
    const cplx l(uniform(rng, -5, 5), uniform(rng, -0.5, 0.5));
    const auto t = fundamental_matrix(sys, l, x0, x1).value();
    EXPECT_LE(rel_err(t, oracle_fundamental(sys, l, x0, x1, 1e-3)), 1e-9) << "system " << i;
  }
}

TEST(FundamentalMatrix, CompositionLaw) {
  std::mt19937_64 rng(29);
  for (int i = 0; i < 50; ++i) {
    const auto sys = random_system(rng);
    const double w = sys.period();
    const cplx l(uniform(rng, -5, 5), uniform(rng, -1, 1));
    const auto full = fundamental_matrix(sys, l, 0.0, 2 * w).value();
    const auto first = fundamental_matrix(sys, l, 0.0, w).value();
    const auto second = fundamental_matrix(sys, l, w, 2 * w).value();
    EXPECT_LE(rel_err(ComplexMatrix(second * first), full), 1e-10);
    const double a = uniform(rng, -3, 0), b = uniform(rng, 0, 1), c = uniform(rng, 1, 4);
    const auto ac = fundamental_matrix(sys, l, a, c).value();
    const auto ab = fundamental_matrix(sys, l, a, b).value();
    const auto bc = fundamental_matrix(sys, l, b, c).value();
    EXPECT_LE(rel_err(ComplexMatrix(bc * ab), ac), 1e-10);
  }
}

TEST(FundamentalMatrix, BackwardIsInverse) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 20; ++i) {
    const auto sys = random_system(rng);
    const double l = uniform(rng, -5, 5);
    const auto fwd = fundamental_matrix(sys, l, -1.0, 2.0).value();
    const auto bwd = fundamental_matrix(sys, l, 2.0, -1.0).value();
    EXPECT_LE(rel_err(ComplexMatrix(bwd * fwd), ComplexMatrix::Identity(2, 2)), 1e-10);
  }
}

TEST(FundamentalMatrix, SymplecticAndDeterminantOne) {
  std::mt19937_64 rng(37);
  for (int i = 0; i < 30; ++i) {
    const auto sys = random_system(rng);
    PeriodLayout layout(sys);
    const double l = uniform(rng, -5, 5);
    for (int k = 0; k < 20; ++k) {
      const double x = uniform(rng, -3, 3);
      const auto u = balanced_fundamental(layout, l, x);
      for (const ComplexMatrix* m : {&u.minus, &u.plus}) {
        // Rounding in a product of size |U| perturbs det U by about eps |U|^2.
        const double floor = 1e-10 + 1e-15 * m->squaredNorm();
        const cplx det = m->determinant();
        EXPECT_LE(std::abs(det - 1.0), floor);
        const ComplexMatrix lhs = m->transpose() * sys.J * *m;
        EXPECT_LE((lhs - det * sys.J).cwiseAbs().maxCoeff(), floor * max_abs(sys.J));
      }
    }
  }
}

TEST(FundamentalMatrix, ConjugationSymmetry) {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 30; ++i) {
    const auto sys = random_system(rng);
    const cplx l(uniform(rng, -5, 5), uniform(rng, -2, 2));
    const double x = uniform(rng, -3, 3);
    const auto u = fundamental_matrix(sys, l, sys.base_point, x).value();
    const auto v = fundamental_matrix(sys, std::conj(l), sys.base_point, x).value();
    EXPECT_LE(rel_err(v, ComplexMatrix(u.conjugate())), 1e-12);
  }
}

TEST(FundamentalMatrix, ScalarModulusIsOne) {
  std::mt19937_64 rng(43);
  for (int i = 0; i < 30; ++i) {
    const auto sys = random_system(rng, {.n = 1});
    PeriodLayout layout(sys);
    const double l = uniform(rng, -10, 10);
    for (int k = 0; k < 10; ++k) {
      const auto u = balanced_fundamental(layout, l, uniform(rng, -4, 4));
      EXPECT_NEAR(std::abs(u.plus(0, 0)), 1.0, 1e-10);
      EXPECT_NEAR(std::abs(u.minus(0, 0)), 1.0, 1e-10);
    }
  }
}

TEST(FundamentalMatrix, LongPropagationKeepsScale) {
  // Hyperbolic constant system: |U(x)| ~ e^{x}; 2000 periods overflow doubles.
  CanonicalSystem sys;
  sys.J = canonical_j();
  sys.q = MatrixMeasureSpec::lebesgue(mat(0, 1, 1, 0), 1.0);
  sys.w = MatrixMeasureSpec::zero(2, 1.0);
  const auto t = fundamental_matrix(sys, 0.0, 0.0, 2000.0);
  EXPECT_TRUE(t.matrix.allFinite());
  EXPECT_NEAR(t.log_scale + std::log(max_abs(t.matrix)), 2000.0, 1e-6);
}

TEST(BalancedSolution, Examples) {
  const auto sys = example_system("dirac-comb-scalar-weight");
  ComplexVector c(2);
  c << 1.0, 0.0;
  const auto at_base = balanced_solution(sys, 0.2, c, sys.base_point);
  EXPECT_EQ(at_base.u_minus, c);
  EXPECT_EQ(at_base.u_plus, c);

  const double l = 0.2;
  const auto at_atom = balanced_solution(sys, l, c, 1.0);
  const ComplexVector jump = at_atom.u_plus - at_atom.u_minus;
  EXPECT_NEAR(std::abs(jump(0)), 0.0, 1e-15);
  EXPECT_LE(std::abs(jump(1) - (1.0 - l) * at_atom.u_minus(0)), 1e-14);
  EXPECT_LE((at_atom.u_balanced - 0.5 * (at_atom.u_minus + at_atom.u_plus)).norm(), 1e-15);

  const auto off = balanced_solution(sys, l, c, 1.37);
  EXPECT_EQ(off.u_minus, off.u_plus);
  EXPECT_EQ(off.u_balanced, off.u_plus);
}

TEST(BalancedSolution, JumpRelationAtAtoms) {
  std::mt19937_64 rng(47);
  for (int i = 0; i < 30; ++i) {
    const auto sys = random_system(rng);
    PeriodLayout layout(sys);
    const cplx l(uniform(rng, -5, 5), uniform(rng, -1, 1));
    ComplexVector c(2);
    c << cplx(uniform(rng, -1, 1), 0), cplx(0, uniform(rng, -1, 1));
    for (const auto& atom : layout.atoms()) {
      for (int k = -2; k <= 2; ++k) {
        const double x = atom.position + k * sys.period();
        const auto u = balanced_solution(layout, l, c, x);
        const ComplexVector r = jump_matrix(sys.J, atom.dq, atom.dw, l, +1) * u.u_plus -
                                jump_matrix(sys.J, atom.dq, atom.dw, l, -1) * u.u_minus;
        EXPECT_LE(r.norm(), 1e-10 * (1 + u.u_minus.norm()));
      }
    }
  }
}

TEST(BalancedSolution, WrongDimensionThrows) {
  const auto sys = example_system("dirac-comb-full");
  ComplexVector c(1);
  c << 1.0;
  EXPECT_THROW(balanced_solution(sys, 0.0, c, 0.5), InvalidArgument);
}
