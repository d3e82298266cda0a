#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "nga/basis.hpp"
#include "nga/dense.hpp"
#include "nga/fourier.hpp"
#include "nga/operator_io.hpp"
#include "oracles.hpp"

using namespace nga;

TEST(StandardBasis, QubitIsPauli) {
  const StandardBasis b = build_standard_basis(2);
  ASSERT_EQ(b.size(), 4u);
  Matrix x(2, 2), y(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  y << 0, cplx(0, -1), cplx(0, 1), 0;
  z << 1, 0, 0, -1;
  EXPECT_LT((b[1] - x).norm(), 1e-15);
  EXPECT_LT((b[2] - y).norm(), 1e-15);
  EXPECT_LT((b[3] - z).norm(), 1e-15);
}

TEST(StandardBasis, OrthonormalForSeveralDimensions) {
  for (int m = 2; m <= 6; ++m) {
    const StandardBasis b = build_standard_basis(m);
    EXPECT_EQ(b.size(), static_cast<std::size_t>(m * m));
    const Eigen::MatrixXd g = b.gram();
    EXPECT_LT((g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff(), 1e-12);
    for (std::size_t i = 1; i < b.size(); ++i) EXPECT_LT(std::abs(b[i].trace()), 1e-12);
  }
}

TEST(StandardBasis, RejectsBadInput) {
  EXPECT_THROW(build_standard_basis(1), error);
  std::vector<Matrix> els = build_standard_basis(2).elements();
  els[1] *= 2.0;
  try {
    StandardBasis(2, els, "bad");
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::invalid_input);
  }
}

TEST(IndexCodec, LexicographicPacking) {
  const IndexCodec c(2, 3);
  EXPECT_EQ(c.pack(MultiIndex{0, 0, 1}), 1u);
  EXPECT_EQ(c.pack(MultiIndex{1, 0, 0}), 16u);
  EXPECT_EQ(c.unpack(c.pack(MultiIndex{3, 2, 1})), (MultiIndex{3, 2, 1}));
  EXPECT_EQ(c.key_limit(), 64u);
  EXPECT_EQ(c.weight(c.pack(MultiIndex{3, 0, 1})), 2);
  EXPECT_THROW(c.pack(MultiIndex{4, 0, 0}), error);
  EXPECT_THROW(IndexCodec(2, 32), error);
}

TEST(FourierOperator, StoresOnlyNonzeros) {
  FourierOperator op(2, 2);
  op.set(MultiIndex{1, 0}, 0.5);
  op.set(MultiIndex{0, 3}, 0.0);
  EXPECT_EQ(op.size(), 1u);
  op.add(op.codec().pack(MultiIndex{1, 0}), -0.5);
  EXPECT_EQ(op.size(), 0u);
  EXPECT_THROW(op.set(MultiIndex{1, 0}, NAN), error);
  EXPECT_EQ(op.degree(), 0);
}

TEST(Synthesis, MatchesKroneckerOracle) {
  std::mt19937_64 rng(11);
  for (int m = 2; m <= 3; ++m) {
    const StandardBasis basis = build_standard_basis(m);
    for (int d = 1; d <= 3; ++d) {
      const FourierOperator op = oracle::random_operator(rng, m, d, d);
      const Matrix fast = synthesize(op, basis).matrix();
      EXPECT_LT((fast - oracle::synthesize(op, basis)).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Analysis, MatchesTraceOracle) {
  std::mt19937_64 rng(12);
  for (int m = 2; m <= 3; ++m) {
    const StandardBasis basis = build_standard_basis(m);
    const int regs = m == 2 ? 3 : 2;
    Eigen::Index dim = 1;
    for (int i = 0; i < regs; ++i) dim *= m;
    const Matrix M = oracle::random_hermitian(rng, dim);
    const FourierOperator op = analyze(DenseHermitian(M), m, regs, basis, 0.0);
    for (const auto& [key, v] : oracle::analyze(M, m, regs, basis)) {
      EXPECT_NEAR(op.coefficient(key), v, 1e-12);
    }
  }
}

TEST(Analysis, RoundTripAndParseval) {
  std::mt19937_64 rng(13);
  const StandardBasis basis = build_standard_basis(2);
  for (int trial = 0; trial < 20; ++trial) {
    const FourierOperator op = oracle::random_operator(rng, 2, 4, 1 + trial % 4, 0.5, false);
    const DenseHermitian M = synthesize(op, basis);
    const FourierOperator back = analyze(M, 2, 4, basis);
    for (const auto& [key, v] : op.coefficients()) EXPECT_NEAR(back.coefficient(key), v, 1e-12);
    EXPECT_NEAR(normalized_p_norm(M, 2) * normalized_p_norm(M, 2), op.two_norm_sq(), 1e-10);
  }
}

TEST(Synthesis, ChecksBasisAndBudget) {
  const FourierOperator op = FourierOperator::constant(2, 3, 1.0, "other");
  EXPECT_THROW(synthesize(op, build_standard_basis(2)), error);
  const FourierOperator big = FourierOperator::constant(2, 13, 1.0);
  try {
    synthesize(big, build_standard_basis(2));
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::size_limit);
  }
}

TEST(Influence, SingleTermAndLocality) {
  FourierOperator op(2, 3);
  op.set(MultiIndex{1, 0, 3}, 0.6);
  op.set(MultiIndex{0, 2, 0}, 0.8);
  EXPECT_DOUBLE_EQ(influence(op, 1), 0.36);
  EXPECT_DOUBLE_EQ(influence(op, 2), 0.64);
  EXPECT_DOUBLE_EQ(influence(op, 3), 0.36);
  EXPECT_THROW(influence(op, 0), error);
  EXPECT_THROW(influence(op, 4), error);
  // sum of influences = sum |sigma| coeff^2 <= degree * norm
  EXPECT_NEAR(total_influence(op), 2 * 0.36 + 0.64, 1e-15);
}

TEST(Influence, EqualsPartialVariance) {
  // Inf_i(P) = || P - (I/m) (x) Tr_i P ||_2^2 (normalized).
  std::mt19937_64 rng(14);
  const StandardBasis basis = build_standard_basis(2);
  const FourierOperator op = oracle::random_operator(rng, 2, 3, 3);
  const Matrix M = synthesize(op, basis).matrix();
  for (int i = 1; i <= 3; ++i) {
    const Matrix diff = M - oracle::trace_out_register(M, 2, 3, i - 1);
    EXPECT_NEAR(diff.squaredNorm() / 8.0, influence(op, i), 1e-12);
  }
}

TEST(Noise, MatchesDenseChannel) {
  std::mt19937_64 rng(15);
  for (int m = 2; m <= 3; ++m) {
    const StandardBasis basis = build_standard_basis(m);
    const FourierOperator op = oracle::random_operator(rng, m, 2, 2);
    for (double rho : {0.0, 0.3, 1.0}) {
      const Matrix fourier = synthesize(apply_noise(op, rho), basis).matrix();
      const Matrix dense = oracle::noise_channel(synthesize(op, basis).matrix(), m, 2, rho);
      EXPECT_LT((fourier - dense).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
  EXPECT_THROW(apply_noise(FourierOperator(2, 1), 1.5), error);
}

TEST(Truncation, DropsHighWeight) {
  FourierOperator op(2, 3);
  op.set(MultiIndex{1, 1, 1}, 1.0);
  op.set(MultiIndex{1, 0, 0}, 1.0);
  op.set(MultiIndex{0, 0, 0}, 1.0);
  EXPECT_EQ(truncate_degree(op, 1).size(), 2u);
  EXPECT_EQ(truncate_degree(op, 0).size(), 1u);
  EXPECT_EQ(truncate_degree(op, 3), op);
}

TEST(Zeta, KnownSpectra) {
  EXPECT_DOUBLE_EQ(zeta_trace(DenseHermitian::diagonal({1.0, -1.0})), 1.0);
  EXPECT_DOUBLE_EQ(zeta_trace(DenseHermitian::diagonal({-0.5, -0.5, 2.0})), 0.5);
  EXPECT_DOUBLE_EQ(zeta_trace(DenseHermitian::identity(4)), 0.0);
}

TEST(Zeta, EqualsDistanceToPsdCone) {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix M = oracle::random_hermitian(rng, 2 + trial % 10);
    const DenseHermitian H(M);
    EXPECT_NEAR(zeta_trace(H), (M - positive_part(H).matrix()).squaredNorm(), 1e-9);
    EXPECT_NEAR(zeta_trace(H), oracle::psd_distance_sq(M), 1e-8);
  }
}

TEST(Dense, RejectsNonHermitian) {
  Matrix a(2, 2);
  a << 1, 2, 0, 1;
  EXPECT_THROW(DenseHermitian{a}, error);
  EXPECT_THROW(normalized_p_norm(DenseHermitian::identity(2), 0.5), error);
  EXPECT_THROW(require_dense_budget(5000, 4096), error);
}

TEST(OperatorIo, RoundTripIsLossless) {
  std::mt19937_64 rng(17);
  const FourierOperator op = oracle::random_operator(rng, 3, 2, 2);
  std::stringstream ss;
  write_operator(ss, op);
  const FourierOperator back = read_operator(ss);
  EXPECT_EQ(back, op);
}

TEST(OperatorIo, ReportsLineOfBadRecord) {
  std::stringstream ss("# comment\n2 2 gell-mann\n0,1 : 0.5\n1,x : 2\n");
  try {
    read_operator(ss);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::parse_error);
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos);
  }
  std::stringstream dup("2 1 gell-mann\n1 : 0.5\n1 : 0.5\n");
  EXPECT_THROW(read_operator(dup), error);
  std::stringstream empty("");
  EXPECT_THROW(read_operator(empty), error);
}
