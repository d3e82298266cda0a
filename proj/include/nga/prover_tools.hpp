#pragma once

// Honest prover: smoothing, fixed-point truncation and POVM rounding, plus
// the dense value of an explicit strategy.
//
// Strategy file (text):
//   <m> <D>
//   A <x> <a>
//   <m^D rows of m^D entries "re,im" or "re">
//   B <y> <b>
//   ...

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "nga/correlation.hpp"
#include "nga/dense.hpp"
#include "nga/error.hpp"
#include "nga/fourier.hpp"
#include "nga/game.hpp"
#include "nga/operator_io.hpp"
#include "nga/summation.hpp"

namespace nga {

/// Largest |(sum_i X_i - I)_rc|.
inline double identity_defect(const std::vector<DenseHermitian>& elems) {
  if (elems.empty()) return INFINITY;
  const auto dim = static_cast<Eigen::Index>(elems.front().dim());
  Matrix s = -Matrix::Identity(dim, dim);
  for (const auto& e : elems) {
    if (static_cast<Eigen::Index>(e.dim()) != dim) return INFINITY;
    s += e.matrix();
  }
  return s.cwiseAbs().maxCoeff();
}

struct ExplicitStrategy {
  static constexpr double kTolerance = 1e-9;

  int m = 2, D = 1;
  std::vector<std::vector<DenseHermitian>> alice;  // [x][a]
  std::vector<std::vector<DenseHermitian>> bob;    // [y][b]

  std::size_t dim() const { return checked_power(static_cast<std::size_t>(m), D); }
  const std::vector<std::vector<DenseHermitian>>& side(Party p) const { return p == Party::alice ? alice : bob; }

  void validate() const {
    if (m < 2 || D < 1) throw error(errc::invalid_dimension, "strategy needs m >= 2 and D >= 1");
    const std::size_t n = dim();
    for (Party p : {Party::alice, Party::bob}) {
      const auto& s = side(p);
      if (s.empty()) throw error(errc::invalid_input, std::string("party ") + party_letter(p) + " has no questions");
      for (std::size_t q = 0; q < s.size(); ++q) {
        const std::string where = std::string(1, party_letter(p)) + " question " + std::to_string(q);
        if (s[q].empty() || s[q].size() != s.front().size()) {
          throw error(errc::invalid_input, where + ": answer counts differ");
        }
        for (const auto& e : s[q]) {
          if (e.dim() != n) throw error(errc::invalid_dimension, where + ": element is not m^D square");
          if (min_eigenvalue(e) < -kTolerance) throw error(errc::invalid_input, where + ": element is not PSD");
        }
        if (identity_defect(s[q]) > kTolerance) {
          throw error(errc::invalid_input, where + ": elements do not sum to the identity");
        }
      }
    }
  }
};

struct SmoothingParams {
  double gamma = 1.0;
  int degree = 0;
};

/// gamma = 1 - c_sm delta (1 - rho) / ln(1/delta), clamped at 0, and
/// degree = ceil(ln(1/delta) / (1 - gamma)).
inline SmoothingParams smoothing_params(double rho, double delta, double c_sm = 1.0) {
  if (!(delta > 0.0 && delta < 1.0)) throw error(errc::invalid_parameter, "delta must lie in (0, 1)");
  if (!(rho >= 0.0 && rho < 1.0)) throw error(errc::invalid_parameter, "rho must lie in [0, 1)");
  if (!(c_sm > 0.0)) throw error(errc::invalid_parameter, "smoothing constant must be positive");
  const double l = std::log(1.0 / delta);
  SmoothingParams sp;
  sp.gamma = std::max(0.0, 1.0 - c_sm * delta * (1.0 - rho) / l);
  const double deg = std::ceil(l / (1.0 - sp.gamma));
  sp.degree = deg > 1e9 ? 1000000000 : static_cast<int>(deg);
  return sp;
}

/// Smoothed coefficients of P in `basis`: noise at rate gamma, then degree
/// truncation.
inline FourierOperator smooth_strategy(const DenseHermitian& P, int m, int registers, double rho, double delta,
                                       const StandardBasis& basis, double c_sm = 1.0) {
  const SmoothingParams sp = smoothing_params(rho, delta, c_sm);
  if (min_eigenvalue(P) < -ExplicitStrategy::kTolerance) throw error(errc::invalid_input, "element is not PSD");
  if (normalized_p_norm(P, 2.0) > 1.0 + 1e-9) throw error(errc::invalid_input, "normalized 2-norm exceeds 1");
  return truncate_degree(apply_noise(analyze(P, m, registers, basis), sp.gamma), sp.degree);
}

/// Floors every coefficient to a multiple of 2^-w, then hands the integer
/// deficit of each (question, sigma) back one unit at a time to the
/// lowest-indexed answers whose coefficient was strictly reduced. `ops` is
/// indexed [question][answer].
inline Certificate::Table truncate_to_certificate(const std::vector<std::vector<FourierOperator>>& ops, int w,
                                                  double tolerance = 1e-12) {
  if (w < 0 || w > Certificate::kMaxWidth) throw error(errc::invalid_parameter, "width must lie in [0, 60]");
  const std::int64_t one = std::int64_t{1} << w;
  Certificate::Table out;
  for (std::size_t q = 0; q < ops.size(); ++q) {
    const auto& row = ops[q];
    std::map<std::uint64_t, std::vector<double>> by_key;
    by_key[0].assign(row.size(), 0.0);
    for (std::size_t a = 0; a < row.size(); ++a) {
      for (const auto& [key, v] : row[a].coefficients()) {
        auto& slot = by_key[key];
        slot.resize(row.size(), 0.0);
        slot[a] = v;
      }
    }
    for (const auto& [key, vals] : by_key) {
      const std::string where = "question " + std::to_string(q) + ", key " + std::to_string(key);
      double sum = 0.0;
      for (double v : vals) {
        if (std::abs(v) > 1.0 + tolerance) throw error(errc::invalid_input, where + ": coefficient exceeds 1");
        sum += v;
      }
      const double target = key == 0 ? 1.0 : 0.0;
      if (std::abs(sum - target) > tolerance) {
        throw error(errc::invalid_input, where + ": answers do not sum to the identity");
      }
      std::vector<std::int64_t> num(vals.size());
      std::vector<std::size_t> reduced;
      std::int64_t total = 0;
      for (std::size_t a = 0; a < vals.size(); ++a) {
        const double scaled = std::ldexp(std::clamp(vals[a], -1.0, 1.0), w);
        const double fl = std::floor(scaled);
        num[a] = static_cast<std::int64_t>(fl);
        if (fl < scaled) reduced.push_back(a);
        total += num[a];
      }
      const std::int64_t k = (key == 0 ? one : 0) - total;
      if (k < 0 || k > static_cast<std::int64_t>(reduced.size())) {
        throw error(errc::invalid_input, where + ": rounding deficit " + std::to_string(k) + " cannot be corrected");
      }
      for (std::int64_t i = 0; i < k; ++i) ++num[reduced[static_cast<std::size_t>(i)]];
      for (std::size_t a = 0; a < num.size(); ++a) {
        if (num[a] != 0) out[{static_cast<int>(q), static_cast<int>(a), key}] = num[a];
      }
    }
  }
  return out;
}

/// L_i = Y^-1/2 pos(X_i) Y^-1/2 with Y = sum_i pos(X_i).
inline std::vector<DenseHermitian> round_to_povm(const std::vector<DenseHermitian>& X) {
  if (identity_defect(X) > ExplicitStrategy::kTolerance) {
    throw error(errc::invalid_input, "elements do not sum to the identity");
  }
  std::vector<DenseHermitian> pos;
  pos.reserve(X.size());
  Matrix Y = Matrix::Zero(static_cast<Eigen::Index>(X.front().dim()), static_cast<Eigen::Index>(X.front().dim()));
  for (const auto& x : X) {
    pos.push_back(positive_part(x));
    Y += pos.back().matrix();
  }
  const Spectrum s = eigen_decompose(DenseHermitian(Y));
  const Eigen::VectorXd inv_sqrt = s.values.cwiseMax(1e-12).cwiseSqrt().cwiseInverse();
  const Matrix R = s.vectors * inv_sqrt.cast<cplx>().asDiagonal() * s.vectors.adjoint();
  std::vector<DenseHermitian> out;
  out.reserve(X.size());
  for (const auto& p : pos) out.emplace_back(R * p.matrix() * R, 1e-8);
  return out;
}

/// sum_i (1/dim) ||A_i - B_i||_F^2.
inline double normalized_distance_sq(const std::vector<DenseHermitian>& A, const std::vector<DenseHermitian>& B) {
  if (A.size() != B.size()) throw error(errc::shape_mismatch, "families differ in length");
  double s = 0.0;
  for (std::size_t i = 0; i < A.size(); ++i) {
    s += (A[i].matrix() - B[i].matrix()).squaredNorm() / static_cast<double>(A[i].dim());
  }
  return s;
}

/// 6t sum_i (1/dim) Tr zeta(X_i).
inline double rounding_bound(const std::vector<DenseHermitian>& X) {
  double z = 0.0;
  for (const auto& x : X) z += zeta_trace(x) / static_cast<double>(x.dim());
  return 6.0 * static_cast<double>(X.size()) * z;
}

inline void require_game_shape(const ExplicitStrategy& s, const GameSpec& game) {
  if (s.alice.size() != static_cast<std::size_t>(game.s_x) || s.bob.size() != static_cast<std::size_t>(game.s_y) ||
      s.alice.front().size() != static_cast<std::size_t>(game.t_a) ||
      s.bob.front().size() != static_cast<std::size_t>(game.t_b)) {
    throw error(errc::shape_mismatch, "strategy shape differs from the game");
  }
}

/// sum mu V Tr((A^x_a (x) B^y_b) state^(x)D) by dense contraction.
inline double brute_force_value(const ExplicitStrategy& s, const GameSpec& game, const NoisyMES& mes,
                                std::size_t budget = dense_budget()) {
  s.validate();
  require_game_shape(s, game);
  if (s.m != mes.m) throw error(errc::shape_mismatch, "strategy and state have different m");
  require_dense_budget(s.dim() * s.dim(), budget);
  std::vector<double> terms;
  for (int x = 0; x < game.s_x; ++x) {
    for (int y = 0; y < game.s_y; ++y) {
      const double mu = game.prob(x, y);
      if (mu == 0.0) continue;
      for (int a = 0; a < game.t_a; ++a) {
        for (int b = 0; b < game.t_b; ++b) {
          if (!game.win(x, y, a, b)) continue;
          terms.push_back(mu * tensor_power_expectation(s.alice[static_cast<std::size_t>(x)][static_cast<std::size_t>(a)],
                                                        s.bob[static_cast<std::size_t>(y)][static_cast<std::size_t>(b)],
                                                        mes.state, s.m, s.D, budget));
        }
      }
    }
  }
  return pairwise_sum(terms);
}

/// Slack between the certificate value and the strategy value:
/// 2 delta t^2 + 2 m^D 2^-w t^2 with t the larger answer count.
inline double honest_allowance(int m, int registers, int t, double delta, int w) {
  const double tt = static_cast<double>(t) * t;
  return 2.0 * delta * tt + 2.0 * std::pow(static_cast<double>(m), registers) * std::ldexp(1.0, -w) * tt;
}

/// Smooths every element against the state's maximal correlation and
/// truncates to width w.
inline Certificate honest_certificate(const ExplicitStrategy& s, const GameSpec& game, const NoisyMES& mes,
                                      double delta, int w, double c_sm = 1.0) {
  s.validate();
  require_game_shape(s, game);
  if (s.m != mes.m) throw error(errc::shape_mismatch, "strategy and state have different m");
  const double rho = mes.maximal_correlation();
  if (!(rho < 1.0)) throw error(errc::not_noisy, "maximal correlation must be below 1");
  const SmoothingParams sp = smoothing_params(rho, delta, c_sm);
  Certificate cert;
  cert.m = s.m;
  cert.D = s.D;
  cert.d = std::min(sp.degree, s.D);
  cert.w = w;
  cert.s_x = game.s_x;
  cert.t_a = game.t_a;
  cert.s_y = game.s_y;
  cert.t_b = game.t_b;
  for (Party p : {Party::alice, Party::bob}) {
    const StandardBasis& basis = p == Party::alice ? mes.basis_a : mes.basis_b;
    std::vector<std::vector<FourierOperator>> ops;
    for (const auto& row : s.side(p)) {
      ops.emplace_back();
      for (const auto& e : row) ops.back().push_back(smooth_strategy(e, s.m, s.D, rho, delta, basis, c_sm));
    }
    // Element sums are the identity only to the strategy tolerance.
    cert.table(p) = truncate_to_certificate(ops, w, 1e-8);
  }
  return cert;
}

namespace io_detail {

inline cplx parse_complex(const std::string& token, int line_no) {
  const auto comma = token.find(',');
  if (comma == std::string::npos) return {parse_double(token, line_no), 0.0};
  return {parse_double(token.substr(0, comma), line_no), parse_double(token.substr(comma + 1), line_no)};
}

}  // namespace io_detail

inline void write_matrix(std::ostream& os, const Matrix& M) {
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
      if (c) os << ' ';
      os << io_detail::format_double(M(r, c).real()) << ',' << io_detail::format_double(M(r, c).imag());
    }
    os << '\n';
  }
}

inline void write_strategy(std::ostream& os, const ExplicitStrategy& s) {
  os << s.m << ' ' << s.D << '\n';
  for (Party p : {Party::alice, Party::bob}) {
    const auto& side = s.side(p);
    for (std::size_t q = 0; q < side.size(); ++q) {
      for (std::size_t a = 0; a < side[q].size(); ++a) {
        os << party_letter(p) << ' ' << q << ' ' << a << '\n';
        write_matrix(os, side[q][a].matrix());
      }
    }
  }
}

/// Blocks may come in any order but every (question, answer) slot must be
/// filled exactly once. Elements are checked for the POVM property.
inline ExplicitStrategy read_strategy(std::istream& is) {
  ExplicitStrategy s;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& msg) {
    return error(errc::parse_error, "strategy line " + std::to_string(line_no) + ": " + msg);
  };
  auto next = [&](std::vector<std::string>& tok) {
    while (std::getline(is, line)) {
      ++line_no;
      if (io_detail::skippable(line)) continue;
      std::istringstream ls(line);
      tok.clear();
      for (std::string t; ls >> t;) tok.push_back(t);
      return true;
    }
    return false;
  };
  std::vector<std::string> tok;
  if (!next(tok)) throw error(errc::parse_error, "strategy: missing header");
  if (tok.size() != 2) throw fail("header must be '<m> <D>'");
  s.m = io_detail::parse_int<int>(tok[0], line_no);
  s.D = io_detail::parse_int<int>(tok[1], line_no);
  if (s.m < 2 || s.D < 1) throw fail("need m >= 2 and D >= 1");
  std::size_t n = 0;
  try {
    n = s.dim();
    require_dense_budget(n, dense_budget());
  } catch (const error& e) {
    throw fail(e.what());
  }
  std::map<std::tuple<Party, int, int>, DenseHermitian> blocks;
  while (next(tok)) {
    if (tok.size() != 3 || (tok[0] != "A" && tok[0] != "B")) throw fail("expected '<A|B> <question> <answer>'");
    const Party p = tok[0] == "A" ? Party::alice : Party::bob;
    const int q = io_detail::parse_int<int>(tok[1], line_no);
    const int a = io_detail::parse_int<int>(tok[2], line_no);
    if (q < 0 || a < 0) throw fail("indices must be non-negative");
    if (blocks.count({p, q, a})) throw fail("duplicate block");
    Matrix M(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
      if (!next(tok)) throw fail("truncated matrix");
      if (tok.size() != n) throw fail("row needs " + std::to_string(n) + " entries");
      for (std::size_t c = 0; c < n; ++c) {
        M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = io_detail::parse_complex(tok[c], line_no);
      }
    }
    try {
      blocks.emplace(std::make_tuple(p, q, a), DenseHermitian(M, 1e-9));
    } catch (const error& e) {
      throw fail(e.what());
    }
  }
  for (const auto& [k, e] : blocks) {
    auto& side = std::get<0>(k) == Party::alice ? s.alice : s.bob;
    const auto q = static_cast<std::size_t>(std::get<1>(k));
    const auto a = static_cast<std::size_t>(std::get<2>(k));
    if (side.size() <= q) side.resize(q + 1);
    if (side[q].size() <= a) side[q].resize(a + 1);
    side[q][a] = e;
  }
  for (Party p : {Party::alice, Party::bob}) {
    for (const auto& row : s.side(p)) {
      for (const auto& e : row) {
        if (e.dim() != n) throw error(errc::parse_error, std::string("strategy: missing block for party ") + party_letter(p));
      }
    }
  }
  return s;
}

}  // namespace nga
