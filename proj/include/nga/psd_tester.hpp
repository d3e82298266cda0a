#pragma once

// Deterministic positivity tester: registers of large influence are kept as
// matrices, the rest are replaced by pseudorandom signs from the block
// combiner, and the mean normalized zeta-distance decides accept/reject.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "nga/basis.hpp"
#include "nga/dense.hpp"
#include "nga/error.hpp"
#include "nga/fourier.hpp"
#include "nga/prg.hpp"
#include "nga/summation.hpp"

namespace nga {

struct TesterParams {
  double beta = 0.0;
  double delta = 0.0;
  int d = 1;
  std::optional<double> tau_override;
  std::uint64_t seed_budget = 4096;
  // Work cap for the exact full-space mean (hash members times patterns).
  std::uint64_t marginal_work_limit = std::uint64_t{1} << 28;
  double c_derand = 1.0;
};

struct TesterReport {
  double estimate = 0.0;
  bool accept = false;
  std::vector<int> H;  // 1-based, increasing
  double tau = 0.0;
  std::uint64_t p = 0;
  std::uint64_t n = 0;
  int degree_used = 0;
  std::uint64_t seeds_total_log2 = 0;
  double seeds_used_log2 = 0.0;
  std::uint64_t evaluations = 0;
  bool full_enumeration = true;
  bool exact_mode = false;
  std::string mode;
  double invariance_bound = 0.0;
  double derandomization_bound = 0.0;
  std::vector<std::string> notes;
};

/// tau = delta^3 / (8 * 3^(2d) * m^d * d^2).
inline double default_tau(double delta, int d, int m) {
  if (d == 0) throw error(errc::degenerate_degree, "tau is undefined at degree 0; use exact mode");
  if (!(delta > 0.0) || d < 0 || m < 2) throw error(errc::invalid_parameter, "need delta > 0, d >= 1, m >= 2");
  return delta * delta * delta /
         (8.0 * std::pow(3.0, 2.0 * d) * std::pow(static_cast<double>(m), d) * d * static_cast<double>(d));
}

/// Registers (1-based) whose influence exceeds tau.
inline std::vector<int> regularize(const FourierOperator& op, double tau) {
  if (!(tau > 0.0)) throw error(errc::invalid_parameter, "tau must be positive");
  if (op.two_norm_sq() > 1.0 + 1e-9) {
    throw error(errc::normalization, "operator two-norm squared " + std::to_string(op.two_norm_sq()) +
                                         " exceeds 1");
  }
  const std::vector<double> inf = influences(op);
  std::vector<int> H;
  for (std::size_t i = 0; i < inf.size(); ++i) {
    if (inf[i] > tau) H.push_back(static_cast<int>(i) + 1);
  }
  if (static_cast<double>(H.size()) > op.degree() / tau + 1e-9) {
    throw error(errc::invalid_state, "regularization produced more than d/tau registers");
  }
  return H;
}

inline std::uint64_t substitution_length(int m, int registers, std::size_t kept) {
  return static_cast<std::uint64_t>(m * m - 1) * static_cast<std::uint64_t>(registers - static_cast<int>(kept));
}

namespace tester_detail {

inline void check_register_set(const FourierOperator& op, const std::vector<int>& H) {
  for (std::size_t j = 0; j < H.size(); ++j) {
    if (H[j] < 1 || H[j] > op.registers()) throw error(errc::invalid_index, "register outside [D]");
    if (j && H[j] <= H[j - 1]) throw error(errc::invalid_input, "register set must be increasing");
  }
}

/// Per-register role: kept rank (>= 0) or -(removed rank) - 1.
inline std::vector<int> register_roles(const FourierOperator& op, const std::vector<int>& H) {
  std::vector<int> role(static_cast<std::size_t>(op.registers()));
  int kept = 0, removed = 0;
  std::size_t h = 0;
  for (int i = 1; i <= op.registers(); ++i) {
    if (h < H.size() && H[h] == i) {
      role[static_cast<std::size_t>(i - 1)] = kept++;
      ++h;
    } else {
      role[static_cast<std::size_t>(i - 1)] = -(removed++) - 1;
    }
  }
  return role;
}

struct SplitTerm {
  std::uint64_t kept_key;
  double coeff;
  std::vector<std::uint64_t> coords;  // x indices multiplied into the coefficient
};

inline std::vector<SplitTerm> split_terms(const FourierOperator& op, const std::vector<int>& H,
                                          const IndexCodec& kept_codec) {
  const std::vector<int> role = register_roles(op, H);
  const std::uint64_t a = static_cast<std::uint64_t>(op.m()) * op.m() - 1;
  std::vector<SplitTerm> out;
  out.reserve(op.size());
  std::vector<int> kept(H.size());
  for (const auto& [key, v] : op.coefficients()) {
    SplitTerm t{0, v, {}};
    for (int i = 0; i < op.registers(); ++i) {
      const int s = op.codec().digit(key, i);
      const int r = role[static_cast<std::size_t>(i)];
      if (r >= 0) {
        kept[static_cast<std::size_t>(r)] = s;
      } else if (s != 0) {
        t.coords.push_back(a * static_cast<std::uint64_t>(-r - 1) + static_cast<std::uint64_t>(s - 1));
      }
    }
    t.kept_key = kept_codec.pack(MultiIndex(kept));
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace tester_detail

/// Operator on the registers of H: each term keeps its sigma_H part and is
/// multiplied by the x coordinates of its nonzero entries outside H. The
/// removed register of rank r with entry s uses coordinate (m^2-1) r + s - 1.
inline FourierOperator substitute(const FourierOperator& op, const std::vector<int>& H,
                                  const std::vector<int>& x) {
  tester_detail::check_register_set(op, H);
  const std::uint64_t n = substitution_length(op.m(), op.registers(), H.size());
  if (x.size() != n) {
    throw error(errc::invalid_input, "sign vector has length " + std::to_string(x.size()) +
                                         ", expected " + std::to_string(n));
  }
  FourierOperator out(op.m(), static_cast<int>(H.size()), op.basis_tag());
  for (const auto& t : tester_detail::split_terms(op, H, out.codec())) {
    double c = t.coeff;
    for (std::uint64_t j : t.coords) c *= x[static_cast<std::size_t>(j)];
    out.add(t.kept_key, c);
  }
  return out;
}

/// m^-|H| Tr zeta of the substituted operator.
inline double delta_for_signs(const FourierOperator& op, const std::vector<int>& H,
                              const std::vector<int>& x, const StandardBasis& basis,
                              std::size_t budget = dense_budget()) {
  const FourierOperator sub = substitute(op, H, x);
  const DenseHermitian M = synthesize(sub, basis, budget);
  return zeta_trace(M) / static_cast<double>(M.dim());
}

inline double delta_for_seed(const FourierOperator& op, const std::vector<int>& H,
                             const SeedSpace& seeds, const SeedIndex& seed,
                             const StandardBasis& basis, std::size_t budget = dense_budget()) {
  return delta_for_signs(op, H, seeds.generate(seed), basis, budget);
}

/// m^-D Tr zeta(P).
inline double exact_reference(const FourierOperator& op, const StandardBasis& basis,
                              std::size_t budget = dense_budget()) {
  const DenseHermitian M = synthesize(op, basis, budget);
  return zeta_trace(M) / static_cast<double>(M.dim());
}

/// Evaluates delta_for_signs through precomputed sparse Kronecker entries.
/// Only coordinates appearing in some term matter; values are cached by the
/// signs on those coordinates.
class SubstitutionEvaluator {
 public:
  SubstitutionEvaluator(const FourierOperator& op, const std::vector<int>& H,
                        const StandardBasis& basis, std::size_t budget = dense_budget())
      : m_(op.m()) {
    tester_detail::check_register_set(op, H);
    if (op.m() != basis.m() || op.basis_tag() != basis.tag()) {
      throw error(errc::basis_mismatch, "operator and basis disagree");
    }
    n_ = substitution_length(op.m(), op.registers(), H.size());
    const IndexCodec kept_codec(op.m(), static_cast<int>(H.size()));
    dim_ = checked_power(static_cast<std::size_t>(op.m()), static_cast<int>(H.size()));
    require_dense_budget(dim_, budget);

    auto terms = tester_detail::split_terms(op, H, kept_codec);
    std::vector<std::uint64_t> used;
    for (const auto& t : terms) used.insert(used.end(), t.coords.begin(), t.coords.end());
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    if (used.size() > 64) {
      throw error(errc::enumeration_limit, "more than 64 sign coordinates influence the operator");
    }
    relevant_ = used;

    std::unordered_map<std::uint64_t, std::size_t> slot;
    for (const auto& t : terms) {
      std::uint64_t mask = 0;
      for (std::uint64_t c : t.coords) {
        mask |= std::uint64_t{1} << (std::lower_bound(relevant_.begin(), relevant_.end(), c) - relevant_.begin());
      }
      auto it = slot.find(t.kept_key);
      if (it == slot.end()) {
        it = slot.emplace(t.kept_key, kept_.size()).first;
        kept_.push_back(entries_of(kept_codec, basis, t.kept_key));
      }
      terms_.push_back({it->second, t.coeff, mask});
    }
  }

  std::uint64_t n() const noexcept { return n_; }
  const std::vector<std::uint64_t>& relevant() const noexcept { return relevant_; }
  std::uint64_t evaluations() const noexcept { return cache_.size(); }

  /// Signs on the relevant coordinates: bit q set means x_{relevant[q]} = -1.
  double at_bits(std::uint64_t bits) {
    auto it = cache_.find(bits);
    if (it != cache_.end()) return it->second;
    std::vector<double> weight(kept_.size(), 0.0);
    for (const auto& t : terms_) {
      weight[t.slot] += (std::popcount(t.mask & bits) & 1) ? -t.coeff : t.coeff;
    }
    Matrix M = Matrix::Zero(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
    for (std::size_t s = 0; s < kept_.size(); ++s) {
      if (weight[s] == 0.0) continue;
      for (const auto& e : kept_[s]) M(e.row, e.col) += weight[s] * e.value;
    }
    const double v = zeta_trace(DenseHermitian(std::move(M))) / static_cast<double>(dim_);
    cache_.emplace(bits, v);
    return v;
  }

  std::uint64_t bits_of(const std::vector<int>& x) const {
    if (x.size() != n_) throw error(errc::invalid_input, "sign vector has wrong length");
    std::uint64_t bits = 0;
    for (std::size_t q = 0; q < relevant_.size(); ++q) {
      if (x[static_cast<std::size_t>(relevant_[q])] < 0) bits |= std::uint64_t{1} << q;
    }
    return bits;
  }

  double at(const std::vector<int>& x) { return at_bits(bits_of(x)); }

 private:
  struct Entry {
    Eigen::Index row, col;
    cplx value;
  };
  struct Term {
    std::size_t slot;
    double coeff;
    std::uint64_t mask;
  };

  static void expand(const IndexCodec& codec, const StandardBasis& basis, std::uint64_t key, int level,
                     Eigen::Index row, Eigen::Index col, cplx value, std::vector<Entry>& out) {
    if (level == codec.registers()) {
      out.push_back({row, col, value});
      return;
    }
    const Eigen::Index m = basis.m();
    for (const auto& e : basis.nonzeros(static_cast<std::size_t>(codec.digit(key, level)))) {
      expand(codec, basis, key, level + 1, row * m + e.row, col * m + e.col, value * e.value, out);
    }
  }

  static std::vector<Entry> entries_of(const IndexCodec& codec, const StandardBasis& basis,
                                       std::uint64_t key) {
    std::vector<Entry> out;
    expand(codec, basis, key, 0, 0, 0, cplx(1.0, 0.0), out);
    return out;
  }

  int m_;
  std::uint64_t n_ = 0;
  std::size_t dim_ = 1;
  std::vector<std::uint64_t> relevant_;
  std::vector<std::vector<Entry>> kept_;
  std::vector<Term> terms_;
  std::unordered_map<std::uint64_t, double> cache_;
};

inline constexpr std::uint64_t kRademacherLimit = 14;

/// Exact mean of m^-|H| Tr zeta(substitute(op, H, b)) over b in {-1,+1}^n.
inline double rademacher_reference(const FourierOperator& op, const std::vector<int>& H,
                                   const StandardBasis& basis, std::size_t budget = dense_budget()) {
  const std::uint64_t n = substitution_length(op.m(), op.registers(), H.size());
  if (n > kRademacherLimit) {
    throw error(errc::enumeration_limit, "n = " + std::to_string(n) + " exceeds the exhaustive bound " +
                                             std::to_string(kRademacherLimit));
  }
  SubstitutionEvaluator eval(op, H, basis, budget);
  // coordinates outside `relevant` do not change the value
  const std::size_t r = eval.relevant().size();
  std::vector<double> values(std::size_t{1} << r);
  for (std::uint64_t bits = 0; bits < values.size(); ++bits) values[bits] = eval.at_bits(bits);
  return pairwise_sum(values) / static_cast<double>(values.size());
}

struct DerandomizedMean {
  double mean = 0.0;
  std::string mode;  // "enumerate", "marginalized", "constant" or "sampled:<schedule>"
  bool full = true;
  std::uint64_t total_log2 = 0;
  double used_log2 = 0.0;
  std::uint64_t evaluations = 0;
};

namespace tester_detail {

/// Gaussian elimination basis over GF(2) for vectors of at most 64 bits.
struct XorBasis {
  std::array<std::uint64_t, 64> row{};
  int rank = 0;

  void insert(std::uint64_t v) {
    for (int b = 63; b >= 0 && v; --b) {
      if (!((v >> b) & 1)) continue;
      if (!row[static_cast<std::size_t>(b)]) {
        row[static_cast<std::size_t>(b)] = v;
        ++rank;
        return;
      }
      v ^= row[static_cast<std::size_t>(b)];
    }
  }

  std::vector<std::uint64_t> vectors() const {
    std::vector<std::uint64_t> out;
    for (std::uint64_t v : row)
      if (v) out.push_back(v);
    return out;
  }
};

}  // namespace tester_detail

/// Mean of delta over the seed space (pairwise f: [n] -> [p], p blocks from
/// a k-wise sign family). Uses, in order of preference: literal enumeration
/// when the space has at most `seed_budget` seeds; the exact full-space mean
/// computed per hash member (for fixed f the combiner output is a linear image
/// of uniform coefficient bits, hence uniform on a subspace); otherwise a
/// deterministic subsample of `seed_budget` seeds.
inline DerandomizedMean derandomized_mean(const FourierOperator& op, const std::vector<int>& H,
                                          std::uint64_t p, int k, std::uint64_t seed_budget,
                                          const StandardBasis& basis,
                                          std::uint64_t marginal_work_limit = std::uint64_t{1} << 28,
                                          std::size_t budget = dense_budget()) {
  const std::uint64_t n = substitution_length(op.m(), op.registers(), H.size());
  if (n == 0) throw error(errc::invalid_input, "no registers to derandomize");
  SubstitutionEvaluator eval(op, H, basis, budget);
  const SeedSpace seeds(make_hash_family(n, p, 2), make_kwise_vectors(n, k));
  DerandomizedMean out;
  out.total_log2 = seeds.cardinality_log2();
  const std::vector<std::uint64_t>& rel = eval.relevant();
  const std::size_t r = rel.size();

  if (r == 0) {
    out.mean = eval.at_bits(0);
    out.mode = "constant";
    out.used_log2 = static_cast<double>(out.total_log2);
    out.evaluations = eval.evaluations();
    return out;
  }

  if (out.total_log2 < 64 && (std::uint64_t{1} << out.total_log2) <= seed_budget) {
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(std::uint64_t{1} << out.total_log2));
    seeds.enumerate([&](std::uint64_t, const std::vector<int>& x) { values.push_back(eval.at(x)); });
    out.mean = pairwise_sum(values) / static_cast<double>(values.size());
    out.mode = "enumerate";
    out.used_log2 = static_cast<double>(out.total_log2);
    out.evaluations = eval.evaluations();
    return out;
  }

  const std::uint64_t hash_log2 = seeds.hash().size_log2();
  const std::vector<std::uint64_t> cols = seeds.vectors().sign_columns(rel);
  const double work = std::ldexp(1.0, static_cast<int>(std::min<std::uint64_t>(hash_log2, 1000))) *
                      (std::ldexp(1.0, static_cast<int>(r)) + static_cast<double>(cols.size() * r));
  if (r <= 20 && hash_log2 <= 32 && work <= static_cast<double>(marginal_work_limit)) {
    const std::uint64_t members = std::uint64_t{1} << hash_log2;
    std::vector<double> weight(std::size_t{1} << r, 0.0);
    std::uint64_t full_rank = 0;
    std::vector<std::uint64_t> block_of(r);
    for (std::uint64_t fi = 0; fi < members; ++fi) {
      const HashMember f = seeds.hash().member(fi);
      for (std::size_t q = 0; q < r; ++q) block_of[q] = seeds.hash().eval(f, rel[q]);
      tester_detail::XorBasis span;
      std::vector<bool> done(r, false);
      for (std::size_t q = 0; q < r; ++q) {
        if (done[q]) continue;
        std::uint64_t S = 0;
        for (std::size_t q2 = q; q2 < r; ++q2) {
          if (block_of[q2] == block_of[q]) {
            S |= std::uint64_t{1} << q2;
            done[q2] = true;
          }
        }
        for (std::uint64_t c : cols) span.insert(c & S);
      }
      if (span.rank == static_cast<int>(r)) {
        ++full_rank;
        continue;
      }
      const std::vector<std::uint64_t> gens = span.vectors();
      const double w = std::ldexp(1.0, -span.rank);
      std::uint64_t v = 0;
      weight[0] += w;
      for (std::uint64_t g = 1; g < (std::uint64_t{1} << span.rank); ++g) {
        v ^= gens[static_cast<std::size_t>(std::countr_zero(g))];
        weight[v] += w;
      }
    }
    std::vector<double> terms;
    if (full_rank) {
      std::vector<double> all(weight.size());
      for (std::uint64_t b = 0; b < all.size(); ++b) all[b] = eval.at_bits(b);
      terms.push_back(static_cast<double>(full_rank) * (pairwise_sum(all) / static_cast<double>(all.size())));
    }
    std::vector<double> partial;
    for (std::uint64_t b = 0; b < weight.size(); ++b) {
      if (weight[b] != 0.0) partial.push_back(weight[b] * eval.at_bits(b));
    }
    terms.push_back(pairwise_sum(partial));
    out.mean = pairwise_sum(terms) / static_cast<double>(members);
    out.mode = "marginalized";
    out.used_log2 = static_cast<double>(out.total_log2);
    out.evaluations = eval.evaluations();
    return out;
  }

  std::vector<double> values;
  const std::string schedule = seeds.sample(seed_budget, [&](const std::vector<int>& x) { values.push_back(eval.at(x)); });
  out.mean = pairwise_sum(values) / static_cast<double>(values.size());
  out.mode = "sampled:" + schedule;
  out.full = false;
  out.used_log2 = std::log2(static_cast<double>(values.size()));
  out.evaluations = eval.evaluations();
  return out;
}

inline double invariance_bound(int d, int m, double tau) {
  return std::pow(std::pow(3.0, d) * std::pow(static_cast<double>(m), d / 2.0) * std::sqrt(tau) * d,
                  2.0 / 3.0);
}

inline double derandomization_bound(int d, int m, double tau, double c) {
  return c * std::sqrt(std::pow(9.0 * m, d) * d * tau);
}

inline TesterReport run_tester(const FourierOperator& op, const TesterParams& params,
                               const StandardBasis& basis, std::size_t budget = dense_budget()) {
  if (!(params.delta > 0.0 && params.beta > params.delta)) {
    throw error(errc::invalid_parameter, "need beta > delta > 0");
  }
  if (params.d < 0) throw error(errc::invalid_parameter, "degree bound must be >= 0");
  if (op.degree() > params.d) {
    throw error(errc::invalid_input, "operator degree " + std::to_string(op.degree()) +
                                         " exceeds the bound " + std::to_string(params.d));
  }
  if (params.tau_override && !(*params.tau_override > 0.0)) {
    throw error(errc::invalid_parameter, "tau override must be positive");
  }
  if (op.m() != basis.m() || op.basis_tag() != basis.tag()) {
    throw error(errc::basis_mismatch, "operator and basis disagree");
  }

  TesterReport rep;
  const int d = std::min(params.d, op.degree());
  rep.degree_used = d;
  if (d < params.d) {
    rep.notes.push_back("degree bound lowered to the operator degree " + std::to_string(d));
  }
  const int D = op.registers();

  auto finish_exact = [&](double estimate, const std::string& why) {
    rep.estimate = estimate;
    rep.exact_mode = true;
    rep.mode = "exact";
    rep.full_enumeration = true;
    rep.notes.push_back(why);
    rep.accept = rep.estimate < params.beta;
    return rep;
  };

  if (d == 0) {
    for (int i = 1; i <= D; ++i) rep.H.push_back(i);
    const double c = op.coefficient(std::uint64_t{0});
    return finish_exact(c < 0.0 ? c * c : 0.0, "degree-0 operator: exact mode");
  }

  rep.tau = params.tau_override ? *params.tau_override : default_tau(params.delta, d, op.m());
  rep.H = regularize(op, rep.tau);
  rep.invariance_bound = invariance_bound(d, op.m(), rep.tau);
  rep.derandomization_bound = derandomization_bound(d, op.m(), rep.tau, params.c_derand);

  if (static_cast<int>(rep.H.size()) == D) {
    return finish_exact(exact_reference(op, basis, budget), "all registers have large influence: exact mode");
  }

  rep.n = substitution_length(op.m(), D, rep.H.size());
  const double ratio = d / rep.tau;
  if (!(ratio < std::ldexp(1.0, 62))) {
    throw error(errc::field_size, "d/tau = " + std::to_string(ratio) + " needs a range beyond 2^62");
  }
  rep.p = 1;
  while (static_cast<double>(rep.p) < ratio) rep.p <<= 1;

  const DerandomizedMean dm =
      derandomized_mean(op, rep.H, rep.p, 4 * d, params.seed_budget, basis, params.marginal_work_limit, budget);
  rep.estimate = dm.mean;
  rep.mode = dm.mode;
  rep.full_enumeration = dm.full;
  rep.seeds_total_log2 = dm.total_log2;
  rep.seeds_used_log2 = dm.used_log2;
  rep.evaluations = dm.evaluations;
  if (!dm.full) {
    rep.notes.push_back("seed space of 2^" + std::to_string(dm.total_log2) + " seeds subsampled to " +
                        std::to_string(params.seed_budget));
  }
  rep.accept = rep.estimate < params.beta;
  return rep;
}

/// Uses the generalized Gell-Mann basis; the operator must carry its tag.
inline TesterReport run_tester(const FourierOperator& op, const TesterParams& params) {
  return run_tester(op, params, build_standard_basis(op.m()));
}

}  // namespace nga
