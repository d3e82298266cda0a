#pragma once

// Exhaustive checks of the hypercontractive, invariance and derandomization
// inequalities at sizes where every expectation is a finite average.

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "nga/basis.hpp"
#include "nga/dense.hpp"
#include "nga/error.hpp"
#include "nga/fourier.hpp"
#include "nga/prg.hpp"
#include "nga/psd_tester.hpp"
#include "nga/summation.hpp"

namespace nga {

inline constexpr int kValidationVariableLimit = 12;

/// P(x) = sum_{S, sigma} c_{S,sigma} x_S B_sigma with x in {-1,+1}^n and
/// B_sigma on h registers. Keys are (subset mask over n, packed sigma).
struct RandomOperatorSpec {
  int m = 2;
  int h = 1;
  int n = 0;
  std::map<std::pair<std::uint64_t, std::uint64_t>, double> terms;

  IndexCodec codec() const { return IndexCodec(m, h); }

  void set(std::uint64_t subset, std::uint64_t key, double v) {
    if (v == 0.0) {
      terms.erase({subset, key});
    } else {
      terms[{subset, key}] = v;
    }
  }

  int degree() const {
    const IndexCodec c = codec();
    int d = 0;
    for (const auto& [k, v] : terms) d = std::max(d, std::popcount(k.first) + c.weight(k.second));
    return d;
  }
};

inline RandomOperatorSpec apply_gamma(const RandomOperatorSpec& spec, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw error(errc::invalid_parameter, "gamma must lie in [0, 1]");
  RandomOperatorSpec out = spec;
  out.terms.clear();
  const IndexCodec c = spec.codec();
  for (const auto& [k, v] : spec.terms) {
    out.set(k.first, k.second, v * std::pow(gamma, std::popcount(k.first) + c.weight(k.second)));
  }
  return out;
}

struct HypercontractivityReport {
  double lhs = 0.0;      // E ||P(x)||_4^4
  double second = 0.0;   // E ||P(x)||_2^2
  double factor = 0.0;   // max{9m, eta^-4}^d
  double rhs = 0.0;      // factor * second^2
  int degree = 0;
  bool holds = false;
};

/// Normalized Schatten norms, averaged over every sign pattern.
inline HypercontractivityReport check_hypercontractivity(const RandomOperatorSpec& spec, double eta,
                                                         const StandardBasis& basis,
                                                         std::size_t budget = dense_budget()) {
  if (spec.n < 0 || spec.n > kValidationVariableLimit) {
    throw error(errc::enumeration_limit, "n = " + std::to_string(spec.n) + " exceeds " +
                                             std::to_string(kValidationVariableLimit));
  }
  if (!(eta > 0.0 && eta <= 1.0)) throw error(errc::invalid_parameter, "eta must lie in (0, 1]");
  if (basis.m() != spec.m) throw error(errc::basis_mismatch, "qudit dimension differs from basis");
  const std::size_t dim = checked_power(static_cast<std::size_t>(spec.m), spec.h);
  require_dense_budget(dim, budget);

  // one dense matrix per subset
  std::map<std::uint64_t, FourierOperator> by_subset;
  for (const auto& [k, v] : spec.terms) {
    if (k.first >> spec.n) throw error(errc::invalid_index, "subset uses a variable beyond n");
    auto it = by_subset.try_emplace(k.first, spec.m, spec.h, basis.tag()).first;
    it->second.set(k.second, v);
  }
  std::vector<std::pair<std::uint64_t, Matrix>> parts;
  for (const auto& [S, op] : by_subset) parts.emplace_back(S, synthesize(op, basis, budget).matrix());

  const std::uint64_t patterns = std::uint64_t{1} << spec.n;
  std::vector<double> fourth(patterns), second(patterns);
  const auto d = static_cast<Eigen::Index>(dim);
  for (std::uint64_t bits = 0; bits < patterns; ++bits) {
    Matrix P = Matrix::Zero(d, d);
    // bit i set means x_i = -1
    for (const auto& [S, M] : parts) {
      if (std::popcount(S & bits) & 1) {
        P -= M;
      } else {
        P += M;
      }
    }
    double f = 0.0, s = 0.0;
    for (double lambda : eigenvalues(DenseHermitian(P))) {
      const double l2 = lambda * lambda;
      s += l2;
      f += l2 * l2;
    }
    fourth[bits] = f / static_cast<double>(dim);
    second[bits] = s / static_cast<double>(dim);
  }
  HypercontractivityReport rep;
  rep.degree = spec.degree();
  rep.lhs = pairwise_sum(fourth) / static_cast<double>(patterns);
  rep.second = pairwise_sum(second) / static_cast<double>(patterns);
  rep.factor = std::pow(std::max(9.0 * spec.m, std::pow(eta, -4.0)), rep.degree);
  rep.rhs = rep.factor * rep.second * rep.second;
  rep.holds = rep.lhs <= rep.rhs + 1e-9;
  return rep;
}

/// Terms of total degree <= d, each present with probability `density`,
/// Gaussian coefficients.
inline RandomOperatorSpec random_spec(std::mt19937_64& rng, int m, int h, int n, int d, double density = 0.3) {
  RandomOperatorSpec spec;
  spec.m = m;
  spec.h = h;
  spec.n = n;
  const IndexCodec c = spec.codec();
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::uint64_t S = 0; S < (std::uint64_t{1} << n); ++S) {
    const int ws = std::popcount(S);
    if (ws > d) continue;
    for (std::uint64_t key = 0; key < c.key_limit(); ++key) {
      if (ws + c.weight(key) > d) continue;
      if (u(rng) < density) spec.set(S, key, g(rng));
    }
  }
  if (spec.terms.empty()) spec.set(0, 0, 1.0);
  return spec;
}

struct ConstantsBound {
  double C = 1.0;
  double B3 = 1.0;
};

struct ZetaInvarianceReport {
  double matrix_side = 0.0;
  double ensemble_side = 0.0;
  double gap = 0.0;
  double tau = 0.0;  // largest influence outside H
  double proven_bound = 0.0;
};

/// Normalized zeta-distance of the full operator against its mean after
/// replacing the registers outside H by independent signs.
inline ZetaInvarianceReport check_zeta_invariance(const FourierOperator& op, const std::vector<int>& H,
                                                  const StandardBasis& basis, ConstantsBound k = {},
                                                  std::size_t budget = dense_budget()) {
  double tail = 0.0;
  for (const auto& [key, v] : op.coefficients()) {
    if (key != 0) tail += v * v;
  }
  if (tail > 1.0 + 1e-9) throw error(errc::normalization, "non-constant weight exceeds 1");
  const std::uint64_t n = substitution_length(op.m(), op.registers(), H.size());
  if (n > static_cast<std::uint64_t>(kValidationVariableLimit)) {
    throw error(errc::enumeration_limit, "n = " + std::to_string(n) + " exceeds " +
                                             std::to_string(kValidationVariableLimit));
  }
  ZetaInvarianceReport rep;
  rep.matrix_side = exact_reference(op, basis, budget);
  rep.ensemble_side = rademacher_reference(op, H, basis, budget);
  rep.gap = std::abs(rep.matrix_side - rep.ensemble_side);
  const std::vector<double> inf = influences(op);
  std::vector<bool> kept(inf.size(), false);
  for (int i : H) kept[static_cast<std::size_t>(i - 1)] = true;
  for (std::size_t i = 0; i < inf.size(); ++i) {
    if (!kept[i]) rep.tau = std::max(rep.tau, inf[i]);
  }
  const int d = op.degree();
  rep.proven_bound = 3.0 * std::pow(k.C * k.B3 * std::pow(std::max(9.0 * op.m(), 9.0), d) * std::sqrt(rep.tau) * d,
                                   2.0 / 3.0);
  return rep;
}

struct DerandomizationReport {
  double uniform_mean = 0.0;
  double prg_mean = 0.0;
  double gap = 0.0;
  double tolerance = 0.25;
  bool within = false;
  std::string mode;  // how the seed-space mean was computed
  std::uint64_t seeds_log2 = 0;
};

/// Uniform-sign mean against the exact mean over every combiner seed
/// (p blocks, 4d-wise sign vectors). The seed mean is a literal enumeration
/// when the space has at most `enumeration_budget` seeds and otherwise the
/// exact per-hash-member marginal; sampling is never used.
inline DerandomizationReport check_derandomization(const FourierOperator& op, const std::vector<int>& H, int d,
                                                   std::uint64_t p, const StandardBasis& basis,
                                                   double tolerance = 0.25,
                                                   std::uint64_t enumeration_budget = std::uint64_t{1} << 16,
                                                   std::size_t budget = dense_budget()) {
  if (d < 1) throw error(errc::invalid_parameter, "degree must be >= 1");
  const std::uint64_t n = substitution_length(op.m(), op.registers(), H.size());
  if (n > static_cast<std::uint64_t>(kValidationVariableLimit)) {
    throw error(errc::enumeration_limit, "n = " + std::to_string(n) + " exceeds " +
                                             std::to_string(kValidationVariableLimit));
  }
  DerandomizationReport rep;
  rep.tolerance = tolerance;
  rep.uniform_mean = rademacher_reference(op, H, basis, budget);
  const DerandomizedMean dm = derandomized_mean(op, H, p, 4 * d, enumeration_budget, basis,
                                                std::uint64_t{1} << 28, budget);
  if (!dm.full) {
    throw error(errc::enumeration_limit, "seed space of 2^" + std::to_string(dm.total_log2) +
                                             " seeds is not exactly enumerable");
  }
  rep.prg_mean = dm.mean;
  rep.mode = dm.mode;
  rep.seeds_log2 = dm.total_log2;
  rep.gap = std::abs(rep.uniform_mean - rep.prg_mean);
  rep.within = rep.gap <= tolerance;
  return rep;
}

/// Counts, for every ordered k-tuple of distinct points, how often each
/// value tuple occurs over the whole family; true iff all counts agree.
inline bool hash_family_kwise_uniform(const HashFamily& fam) {
  const auto size = fam.size();
  if (!size || *size > (std::uint64_t{1} << 16)) throw error(errc::enumeration_limit, "family too large");
  const std::uint64_t n = fam.n(), p = fam.p();
  const int k = fam.k();
  std::vector<std::vector<std::uint64_t>> tables;
  for (std::uint64_t i = 0; i < *size; ++i) tables.push_back(fam.table(fam.member(i)));
  std::uint64_t cells = 1;
  for (int j = 0; j < k; ++j) cells *= p;
  if (*size % cells) return false;
  const std::uint64_t expected = *size / cells;
  std::vector<std::uint64_t> pts(static_cast<std::size_t>(k), 0);
  std::vector<std::uint64_t> counts(cells);
  // odometer over ordered tuples, skipping repeated points
  while (true) {
    bool distinct = true;
    for (int a = 0; a < k && distinct; ++a)
      for (int b = a + 1; b < k; ++b)
        if (pts[static_cast<std::size_t>(a)] == pts[static_cast<std::size_t>(b)]) distinct = false;
    if (distinct) {
      std::fill(counts.begin(), counts.end(), 0);
      for (const auto& t : tables) {
        std::uint64_t cell = 0;
        for (int j = 0; j < k; ++j) cell = cell * p + t[pts[static_cast<std::size_t>(j)]];
        ++counts[cell];
      }
      for (std::uint64_t c : counts)
        if (c != expected) return false;
    }
    int j = 0;
    while (j < k && ++pts[static_cast<std::size_t>(j)] == n) pts[static_cast<std::size_t>(j++)] = 0;
    if (j == k) break;
  }
  return true;
}

struct SuiteCheck {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double limit = 0.0;
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  int trials = 0;
  std::uint64_t seed = 0;
  std::vector<SuiteCheck> checks;

  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

/// Random operator on D registers with every term of weight <= degree
/// present with probability 1/2, scaled to unit Parseval norm.
inline FourierOperator random_normalized_operator(std::mt19937_64& rng, int m, int registers, int degree) {
  FourierOperator op(m, registers);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::uint64_t key = 0; key < op.codec().key_limit(); ++key) {
    if (op.codec().weight(key) <= degree && u(rng) < 0.5) op.set(key, g(rng));
  }
  if (op.size() == 0) op.set(std::uint64_t{0}, 1.0);
  return op.scaled(1.0 / std::sqrt(op.two_norm_sq()));
}

inline SuiteReport selftest_hyper(int trials = 1000, std::uint64_t seed = 1) {
  SuiteReport rep{"hyper", trials, seed, {}};
  const StandardBasis basis = build_standard_basis(2);
  const double eta = 1.0 / std::sqrt(3.0);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> hd(1, 2), nd(0, 8), dd(0, 3);
  int violations = 0;
  double worst_ratio = 0.0;
  for (int i = 0; i < trials; ++i) {
    const RandomOperatorSpec spec = random_spec(rng, 2, hd(rng), nd(rng), dd(rng));
    const HypercontractivityReport r = check_hypercontractivity(spec, eta, basis);
    if (!r.holds) ++violations;
    if (r.rhs > 0.0) worst_ratio = std::max(worst_ratio, r.lhs / r.rhs);
  }
  rep.checks.push_back({"random instances: violations", violations == 0, static_cast<double>(violations), 0.0,
                        "largest lhs/rhs " + std::to_string(worst_ratio)});
  RandomOperatorSpec single;
  single.m = 2;
  single.h = 1;
  single.set(0, 1, 1.0);
  const HypercontractivityReport s = check_hypercontractivity(single, eta, basis);
  rep.checks.push_back({"single basis element", s.holds && std::abs(s.lhs - 1.0) < 1e-12, s.lhs, s.rhs, ""});
  return rep;
}

inline SuiteReport selftest_invariance(int trials = 50, std::uint64_t seed = 1, double tolerance = 0.25) {
  SuiteReport rep{"invariance", trials, seed, {}};
  const StandardBasis basis = build_standard_basis(2);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> reg(1, 4);
  double worst = 0.0, worst_full = 0.0;
  for (int i = 0; i < trials; ++i) {
    const FourierOperator op = random_normalized_operator(rng, 2, 4, 2);
    int a = reg(rng), b = reg(rng);
    while (b == a) b = reg(rng);
    const ZetaInvarianceReport r = check_zeta_invariance(op, {std::min(a, b), std::max(a, b)}, basis);
    worst = std::max(worst, r.gap);
    worst_full = std::max(worst_full, check_zeta_invariance(op, {1, 2, 3, 4}, basis).gap);
  }
  rep.checks.push_back({"|H| = 2 of 4: largest gap", worst <= tolerance, worst, tolerance, ""});
  rep.checks.push_back({"H = all registers: largest gap", worst_full == 0.0, worst_full, 0.0, ""});
  const ZetaInvarianceReport id = check_zeta_invariance(FourierOperator::constant(2, 3, 1.0), {1}, basis);
  rep.checks.push_back({"identity operator", id.gap == 0.0 && id.matrix_side == 0.0, id.gap, 0.0, ""});
  return rep;
}

inline SuiteReport selftest_derand(int trials = 20, std::uint64_t seed = 1, double tolerance = 0.25) {
  SuiteReport rep{"derand", trials, seed, {}};
  const StandardBasis basis = build_standard_basis(2);
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  std::string modes;
  for (int i = 0; i < trials; ++i) {
    // n = 3 * 2 = 6 sign coordinates, two blocks
    const FourierOperator op = random_normalized_operator(rng, 2, 3, 1);
    const DerandomizationReport r = check_derandomization(op, {1}, 1, 2, basis, tolerance);
    worst = std::max(worst, r.gap);
    if (modes.find(r.mode) == std::string::npos) modes += (modes.empty() ? "" : ",") + r.mode;
  }
  rep.checks.push_back({"degree 1, n = 6, p = 2: largest gap", worst <= tolerance, worst, tolerance, modes});

  // 4d >= n: every block is uniform on all sign vectors, so the seed
  // distribution is exactly uniform
  double cover = 0.0;
  for (int i = 0; i < trials; ++i) {
    const FourierOperator op = random_normalized_operator(rng, 2, 2, 1);
    cover = std::max(cover, check_derandomization(op, {1}, 1, 2, basis, tolerance).gap);
  }
  rep.checks.push_back({"4d-wise family covering all signs: largest gap", cover <= 1e-12, cover, 1e-12, ""});

  int bad = 0, families = 0;
  for (std::uint64_t n = 1; n <= 8; ++n) {
    for (int k = 1; k <= 3; ++k) {
      for (std::uint64_t p : {2u, 4u}) {
        ++families;
        if (!hash_family_kwise_uniform(make_hash_family(n, p, k))) ++bad;
      }
    }
  }
  rep.checks.push_back({"k-wise uniformity, n <= 8, k <= 3, p in {2, 4}", bad == 0, static_cast<double>(bad), 0.0,
                        std::to_string(families) + " families"});
  return rep;
}

}  // namespace nga
