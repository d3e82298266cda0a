#include <gtest/gtest.h>

#include <random>

#include "nga/correlation.hpp"
#include "oracles.hpp"

using namespace nga;

TEST(DepolarizedMes, SpectrumAndAlignment) {
  for (int m : {2, 3}) {
    for (double eps : {0.1, 0.25, 0.5, 1.0}) {
      const NoisyMES mes = depolarized_mes(m, eps);
      ASSERT_EQ(mes.c.size(), static_cast<std::size_t>(m * m));
      EXPECT_EQ(mes.c[0], 1.0);
      for (std::size_t i = 1; i < mes.c.size(); ++i) EXPECT_NEAR(mes.c[i], 1.0 - eps, 1e-12);
      EXPECT_LT(alignment_residual(mes), 1e-12);
      EXPECT_EQ(mes.basis_a.tag().back(), 'A');
      EXPECT_EQ(mes.basis_b.tag().back(), 'B');
    }
  }
}

TEST(DepolarizedMes, NoiselessStateRejected) {
  try {
    depolarized_mes(2, 0.0);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::not_noisy);
  }
  EXPECT_THROW(depolarized_mes(2, -0.1), error);
  EXPECT_THROW(depolarized_mes(1, 0.1), error);
}

TEST(AlignBases, AnisotropicState) {
  // Mixture of Bell-diagonal terms: correlations along X, Y, Z differ.
  const StandardBasis p = build_standard_basis(2);
  Matrix state = Matrix::Identity(4, 4) / 4.0;
  state += (0.3 * Eigen::kroneckerProduct(p[1], p[1]) - 0.1 * Eigen::kroneckerProduct(p[2], p[2]) +
            0.2 * Eigen::kroneckerProduct(p[3], p[3]))
               .eval() /
           4.0;
  const NoisyMES mes = align_bases(DenseHermitian(state), 2);
  EXPECT_NEAR(mes.c[1], 0.3, 1e-12);
  EXPECT_NEAR(mes.c[2], 0.2, 1e-12);
  EXPECT_NEAR(mes.c[3], 0.1, 1e-12);
  EXPECT_LT(alignment_residual(mes), 1e-12);
}

TEST(AlignBases, RejectsNonMaximallyMixedMarginals) {
  Matrix state = Matrix::Zero(4, 4);
  state(0, 0) = 1.0;
  try {
    align_bases(DenseHermitian(state), 2);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::invalid_state);
  }
}

TEST(PairExpectation, MatchesRegroupedStateOracle) {
  std::mt19937_64 rng(21);
  for (double eps : {0.1, 0.5}) {
    const NoisyMES mes = depolarized_mes(2, eps);
    for (int d = 1; d <= 3; ++d) {
      const FourierOperator p = oracle::random_operator(rng, 2, d, d).retagged(mes.basis_a.tag());
      const FourierOperator q = oracle::random_operator(rng, 2, d, d).retagged(mes.basis_b.tag());
      const Matrix a = synthesize(p, mes.basis_a).matrix();
      const Matrix b = synthesize(q, mes.basis_b).matrix();
      const double want = oracle::joint_expectation(a, b, mes.state.matrix(), 2, d);
      EXPECT_NEAR(pair_expectation(p, q, mes), want, 1e-10);
      EXPECT_NEAR(tensor_power_expectation(DenseHermitian(a), DenseHermitian(b), mes.state, 2, d),
                  want, 1e-10);
    }
  }
}

TEST(PairExpectation, RequiresAlignedTags) {
  const NoisyMES mes = depolarized_mes(2, 0.2);
  const FourierOperator p = FourierOperator::constant(2, 1, 1.0);
  EXPECT_THROW(pair_expectation(p, p, mes), error);
  const FourierOperator a = FourierOperator::constant(2, 1, 1.0, mes.basis_a.tag());
  const FourierOperator b = FourierOperator::constant(2, 2, 1.0, mes.basis_b.tag());
  EXPECT_THROW(pair_expectation(a, b, mes), error);
  // identity on both sides: Tr(state^(x)D) = 1
  EXPECT_DOUBLE_EQ(pair_expectation(a, FourierOperator::constant(2, 1, 1.0, mes.basis_b.tag()), mes), 1.0);
}
