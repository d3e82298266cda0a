#include <gtest/gtest.h>

#include <random>

#include "nga/psd_tester.hpp"
#include "oracles.hpp"

using namespace nga;

namespace {

const StandardBasis& qubits() {
  static const StandardBasis b = build_standard_basis(2);
  return b;
}

/// Substitution written against multi-index vectors instead of packed keys.
FourierOperator substitute_by_vectors(const FourierOperator& op, const std::vector<int>& H,
                                      const std::vector<int>& x) {
  const int a = op.m() * op.m() - 1;
  FourierOperator out(op.m(), static_cast<int>(H.size()), op.basis_tag());
  for (const auto& [key, v] : op.coefficients()) {
    const std::vector<int> sigma = op.codec().unpack(key).entries();
    std::vector<int> kept;
    double c = v;
    int removed_rank = 0;
    for (int i = 0; i < op.registers(); ++i) {
      if (std::find(H.begin(), H.end(), i + 1) != H.end()) {
        kept.push_back(sigma[i]);
      } else {
        if (sigma[i] != 0) c *= x[static_cast<std::size_t>(a * removed_rank + sigma[i] - 1)];
        ++removed_rank;
      }
    }
    out.add(out.codec().pack(MultiIndex(kept)), c);
  }
  return out;
}

std::vector<int> signs_of(std::uint64_t bits, std::size_t n) {
  std::vector<int> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = (bits >> i) & 1 ? -1 : 1;
  return x;
}

double oracle_rademacher(const FourierOperator& op, const std::vector<int>& H) {
  const std::size_t n = static_cast<std::size_t>(op.m() * op.m() - 1) * (op.registers() - H.size());
  double s = 0.0;
  for (std::uint64_t b = 0; b < (std::uint64_t{1} << n); ++b) {
    const Matrix M = oracle::synthesize(substitute_by_vectors(op, H, signs_of(b, n)), qubits());
    s += oracle::psd_distance_sq(M) / static_cast<double>(M.rows());
  }
  return s / static_cast<double>(std::uint64_t{1} << n);
}

}  // namespace

TEST(DefaultTau, FormulaAndMonotonicity) {
  EXPECT_NEAR(default_tau(0.5, 1, 2), 0.125 / 144.0, 1e-18);
  EXPECT_NEAR(default_tau(0.5, 1, 2), 8.6805555555e-4, 1e-12);
  EXPECT_LT(default_tau(0.25, 1, 2), default_tau(0.5, 1, 2));
  EXPECT_LT(default_tau(0.5, 2, 2), default_tau(0.5, 1, 2));
  try {
    default_tau(0.5, 0, 2);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::degenerate_degree);
  }
}

TEST(Regularize, SingleTermAndEmptySet) {
  FourierOperator op(2, 4);
  op.set(MultiIndex{1, 0, 3, 0}, 1.0);
  EXPECT_EQ(regularize(op, 0.5), (std::vector<int>{1, 3}));
  EXPECT_TRUE(regularize(op, 2.0 * op.two_norm_sq() + 0.1).empty());
  FourierOperator big(2, 1);
  big.set(MultiIndex{1}, 1.5);
  try {
    regularize(big, 0.1);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::normalization);
  }
}

TEST(Regularize, SizeBound) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const FourierOperator op = oracle::random_operator(rng, 2, 5, 2, 0.4);
    for (double tau : {0.01, 0.05, 0.2}) {
      EXPECT_LE(static_cast<double>(regularize(op, tau).size()), 2.0 / tau);
    }
  }
}

TEST(Substitute, HandCases) {
  std::mt19937_64 rng(42);
  const FourierOperator op = oracle::random_operator(rng, 2, 3, 2);
  EXPECT_EQ(substitute(op, {1, 2, 3}, {}), op);

  FourierOperator single(2, 3);
  single.set(MultiIndex{2, 0, 3}, 0.7);
  // H = {1}; removed registers 2 (rank 0) and 3 (rank 1); entry 3 at rank 1 -> coordinate 3*1 + 2 = 5
  std::vector<int> x(6, 1);
  x[5] = -1;
  const FourierOperator sub = substitute(single, {1}, x);
  EXPECT_DOUBLE_EQ(sub.coefficient(MultiIndex{2}), -0.7);
  EXPECT_THROW(substitute(single, {1}, std::vector<int>(5, 1)), error);
  EXPECT_THROW(substitute(single, {2, 1}, std::vector<int>(3, 1)), error);
}

TEST(Substitute, AgreesWithVectorOracleAndKeepsParsevalOnAverage) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    const FourierOperator op = oracle::random_operator(rng, 2, 4, 2);
    const std::vector<int> H = {1, 3};
    double mean_norm = 0.0;
    for (std::uint64_t b = 0; b < 64; ++b) {
      const auto x = signs_of(b, 6);
      const FourierOperator s = substitute(op, H, x);
      const FourierOperator o = substitute_by_vectors(op, H, x);
      for (const auto& [k, v] : o.coefficients()) EXPECT_NEAR(s.coefficient(k), v, 1e-15);
      mean_norm += s.two_norm_sq() / 64.0;
    }
    EXPECT_NEAR(mean_norm, op.two_norm_sq(), 1e-12);
  }
}

TEST(DeltaForSeed, ConstantOperators) {
  const SeedSpace seeds(make_hash_family(3, 2, 2), make_kwise_vectors(3, 4));
  const FourierOperator id = FourierOperator::constant(2, 2, 1.0);
  const FourierOperator neg = FourierOperator::constant(2, 2, -1.0);
  for (std::uint64_t o = 0; o < 50; ++o) {
    EXPECT_DOUBLE_EQ(delta_for_seed(id, {1}, seeds, seeds.decode(o * 977), qubits()), 0.0);
    EXPECT_DOUBLE_EQ(delta_for_seed(neg, {1}, seeds, seeds.decode(o * 977), qubits()), 1.0);
  }
}

TEST(DeltaForSeed, AllRegistersKeptIsExact) {
  std::mt19937_64 rng(44);
  const FourierOperator op = oracle::random_operator(rng, 2, 3, 1);
  EXPECT_NEAR(delta_for_signs(op, {1, 2, 3}, {}, qubits()), exact_reference(op, qubits()), 1e-14);
}

TEST(ExactReference, KnownValues) {
  EXPECT_DOUBLE_EQ(exact_reference(FourierOperator::constant(2, 3, 1.0), qubits()), 0.0);
  EXPECT_DOUBLE_EQ(exact_reference(FourierOperator::constant(2, 3, -1.0), qubits()), 1.0);
  FourierOperator z(2, 1);
  z.set(MultiIndex{3}, 1.0);  // diag(1, -1)
  EXPECT_DOUBLE_EQ(exact_reference(z, qubits()), 0.5);
}

TEST(Evaluator, MatchesSlowPath) {
  std::mt19937_64 rng(45);
  for (int trial = 0; trial < 10; ++trial) {
    const FourierOperator op = oracle::random_operator(rng, 2, 4, 2, 0.3);
    const std::vector<int> H = {2, 4};
    SubstitutionEvaluator ev(op, H, qubits());
    for (std::uint64_t b = 0; b < 64; b += 3) {
      const auto x = signs_of(b, 6);
      EXPECT_NEAR(ev.at(x), delta_for_signs(op, H, x, qubits()), 1e-12);
    }
  }
}

TEST(RademacherReference, AgreesWithIndependentEnumeration) {
  std::mt19937_64 rng(46);
  for (int trial = 0; trial < 5; ++trial) {
    const FourierOperator op = oracle::random_operator(rng, 2, 3, 1);
    EXPECT_NEAR(rademacher_reference(op, {1, 3}, qubits()), oracle_rademacher(op, {1, 3}), 1e-9);
    EXPECT_NEAR(rademacher_reference(op, {1, 2, 3}, qubits()), exact_reference(op, qubits()), 1e-12);
  }
  EXPECT_DOUBLE_EQ(rademacher_reference(FourierOperator::constant(2, 3, 1.0), {2}, qubits()), 0.0);
  try {
    rademacher_reference(FourierOperator::constant(2, 6, 1.0), {1}, qubits());
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::enumeration_limit);
  }
}

TEST(DerandomizedMean, MarginalizedEqualsLiteralEnumeration) {
  std::mt19937_64 rng(47);
  struct Case {
    int D;
    std::vector<int> H;
    std::uint64_t p;
    int k;
  };
  for (const Case& c : {Case{2, {1}, 2, 1}, Case{2, {2}, 4, 1}, Case{3, {1}, 2, 2}, Case{3, {2}, 4, 1}}) {
    for (int trial = 0; trial < 3; ++trial) {
      const FourierOperator op = oracle::random_operator(rng, 2, c.D, 2, 0.6);
      const DerandomizedMean lit = derandomized_mean(op, c.H, c.p, c.k, std::uint64_t{1} << 22, qubits());
      const DerandomizedMean mar = derandomized_mean(op, c.H, c.p, c.k, 16, qubits());
      ASSERT_EQ(lit.mode, "enumerate");
      ASSERT_EQ(mar.mode, "marginalized");
      EXPECT_TRUE(mar.full);
      EXPECT_EQ(lit.total_log2, mar.total_log2);
      EXPECT_NEAR(lit.mean, mar.mean, 1e-12);
    }
  }
}

TEST(DerandomizedMean, FullyUniformFamilyHasNoGap) {
  // 4d-wise with 4d >= n: every block is exactly uniform
  std::mt19937_64 rng(48);
  const FourierOperator op = oracle::random_operator(rng, 2, 2, 1);
  const DerandomizedMean dm = derandomized_mean(op, {1}, 4, 4, 16, qubits());
  EXPECT_NEAR(dm.mean, rademacher_reference(op, {1}, qubits()), 1e-12);
}

TEST(DerandomizedMean, SampledModeIsDeterministic) {
  std::mt19937_64 rng(49);
  const FourierOperator op = oracle::random_operator(rng, 2, 4, 2, 0.4);
  const DerandomizedMean a = derandomized_mean(op, {1}, std::uint64_t{1} << 40, 8, 200, qubits());
  const DerandomizedMean b = derandomized_mean(op, {1}, std::uint64_t{1} << 40, 8, 200, qubits());
  EXPECT_FALSE(a.full);
  EXPECT_EQ(a.mode.rfind("sampled:", 0), 0u);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_NEAR(a.used_log2, std::log2(200.0), 1e-12);
}

TEST(RunTester, IdentityAndNegativeIdentity) {
  TesterParams pa{0.1, 0.05, 2};
  const TesterReport acc = run_tester(FourierOperator::constant(2, 3, 1.0), pa);
  EXPECT_TRUE(acc.accept);
  EXPECT_EQ(acc.estimate, 0.0);
  EXPECT_TRUE(acc.exact_mode);
  TesterParams pr{0.5, 0.1, 2};
  const TesterReport rej = run_tester(FourierOperator::constant(2, 3, -1.0), pr);
  EXPECT_FALSE(rej.accept);
  EXPECT_EQ(rej.estimate, 1.0);
}

TEST(RunTester, ForcedFullHIsExact) {
  std::mt19937_64 rng(50);
  for (int trial = 0; trial < 20; ++trial) {
    const FourierOperator op = oracle::touch_every_register(oracle::random_operator(rng, 2, 1 + trial % 5, 1));
    TesterParams params{0.5, 0.1, 1};
    params.tau_override = 1e-12;
    const TesterReport r = run_tester(op, params);
    ASSERT_TRUE(r.exact_mode);
    EXPECT_NEAR(r.estimate, exact_reference(op, qubits()), 1e-9);
  }
}

TEST(RunTester, DerandomizedPathReportsEverything) {
  std::mt19937_64 rng(51);
  FourierOperator op = oracle::random_operator(rng, 2, 4, 2, 0.5);
  TesterParams params{0.5, 0.1, 2};
  params.tau_override = 0.2;
  const TesterReport r = run_tester(op, params);
  EXPECT_FALSE(r.exact_mode);
  EXPECT_EQ(r.p, 16u);  // d / tau = 10
  EXPECT_EQ(r.n, 3u * (4 - r.H.size()));
  EXPECT_EQ(r.accept, r.estimate < 0.5);
  EXPECT_GT(r.invariance_bound, 0.0);
  EXPECT_GT(r.derandomization_bound, 0.0);
  EXPECT_LE(r.seeds_used_log2, static_cast<double>(r.seeds_total_log2));
  const TesterReport again = run_tester(op, params);
  EXPECT_EQ(again.estimate, r.estimate);
}

TEST(RunTester, ParameterChecks) {
  const FourierOperator op = FourierOperator::constant(2, 2, 1.0);
  EXPECT_THROW(run_tester(op, TesterParams{0.1, 0.2, 1}), error);
  FourierOperator deg2(2, 2);
  deg2.set(MultiIndex{1, 1}, 0.5);
  EXPECT_THROW(run_tester(deg2, TesterParams{0.5, 0.1, 1}), error);
  EXPECT_THROW(run_tester(op.retagged("x"), TesterParams{0.5, 0.1, 1}), error);
}

TEST(Gaps, InvarianceAndDerandomizationWithinTolerance) {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 10; ++trial) {
    const int D = 3 + trial % 3;
    const FourierOperator op = oracle::random_operator(rng, 2, D, 2, 0.5);
    const std::vector<int> H = {1, 2};
    const double exact = exact_reference(op, qubits());
    const double uniform = rademacher_reference(op, H, qubits());
    EXPECT_LE(std::abs(uniform - exact), 0.25);
    const DerandomizedMean dm = derandomized_mean(op, H, 4, 4, 4096, qubits());
    ASSERT_TRUE(dm.full);
    EXPECT_LE(std::abs(dm.mean - uniform), 0.25);
  }
}
