#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "nga/basis.hpp"
#include "nga/dense.hpp"
#include "nga/error.hpp"

namespace nga {

/// sigma in [m^2]_0^D; weight |sigma| counts nonzero entries.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {}
  MultiIndex(std::initializer_list<int> entries) : entries_(entries) {}

  static MultiIndex zeros(int registers) {
    return MultiIndex(std::vector<int>(static_cast<std::size_t>(registers), 0));
  }

  int registers() const noexcept { return static_cast<int>(entries_.size()); }
  int operator[](std::size_t i) const { return entries_.at(i); }
  const std::vector<int>& entries() const noexcept { return entries_; }

  int weight() const noexcept {
    int w = 0;
    for (int e : entries_) w += (e != 0);
    return w;
  }

  auto operator<=>(const MultiIndex&) const = default;

 private:
  std::vector<int> entries_;
};

/// Packs sigma into a base-m^2 integer with sigma_1 most significant, so
/// ascending keys iterate multi-indices lexicographically.
class IndexCodec {
 public:
  IndexCodec() = default;
  IndexCodec(int m, int registers) : alphabet_(static_cast<std::uint64_t>(m) * m), registers_(registers) {
    if (m < 2) throw error(errc::invalid_dimension, "qudit dimension must be >= 2");
    if (registers < 0) throw error(errc::invalid_dimension, "register count must be >= 0");
    place_.assign(static_cast<std::size_t>(registers), 1);
    std::uint64_t p = 1;
    for (int i = registers - 1; i >= 0; --i) {
      place_[static_cast<std::size_t>(i)] = p;
      if (i > 0 && p > std::numeric_limits<std::uint64_t>::max() / alphabet_) {
        throw error(errc::invalid_dimension, "(m^2)^D does not fit a 64-bit key");
      }
      p *= alphabet_;
    }
    if (registers > 0 && place_[0] > std::numeric_limits<std::uint64_t>::max() / alphabet_) {
      throw error(errc::invalid_dimension, "(m^2)^D does not fit a 64-bit key");
    }
  }

  std::uint64_t alphabet() const noexcept { return alphabet_; }
  int registers() const noexcept { return registers_; }

  /// Number of distinct keys, (m^2)^D.
  std::uint64_t key_limit() const noexcept {
    return registers_ == 0 ? 1 : place_[0] * alphabet_;
  }

  std::uint64_t pack(const MultiIndex& sigma) const {
    if (sigma.registers() != registers_) {
      throw error(errc::invalid_dimension, "multi-index length does not match register count");
    }
    std::uint64_t key = 0;
    for (int i = 0; i < registers_; ++i) {
      const int e = sigma[static_cast<std::size_t>(i)];
      if (e < 0 || static_cast<std::uint64_t>(e) >= alphabet_) {
        throw error(errc::invalid_index, "multi-index entry out of range");
      }
      key += static_cast<std::uint64_t>(e) * place_[static_cast<std::size_t>(i)];
    }
    return key;
  }

  MultiIndex unpack(std::uint64_t key) const {
    std::vector<int> e(static_cast<std::size_t>(registers_));
    for (int i = 0; i < registers_; ++i) e[static_cast<std::size_t>(i)] = digit(key, i);
    return MultiIndex(std::move(e));
  }

  /// Entry sigma_{i+1} (0-based register i).
  int digit(std::uint64_t key, int i) const {
    return static_cast<int>((key / place_[static_cast<std::size_t>(i)]) % alphabet_);
  }

  int weight(std::uint64_t key) const {
    int w = 0;
    for (int i = 0; i < registers_; ++i) w += digit(key, i) != 0;
    return w;
  }

 private:
  std::uint64_t alphabet_ = 4;
  int registers_ = 0;
  std::vector<std::uint64_t> place_;
};

/// A Hermitian operator on D qudits given by its real Fourier coefficients
/// in a tagged standard basis. Zero coefficients are never stored.
class FourierOperator {
 public:
  using Coefficients = std::map<std::uint64_t, double>;

  FourierOperator() = default;
  FourierOperator(int m, int registers, std::string basis_tag = kGellMannTag)
      : m_(m), codec_(m, registers), tag_(std::move(basis_tag)) {}

  static FourierOperator constant(int m, int registers, double value,
                                  std::string basis_tag = kGellMannTag) {
    FourierOperator op(m, registers, std::move(basis_tag));
    op.set(std::uint64_t{0}, value);
    return op;
  }

  int m() const noexcept { return m_; }
  int registers() const noexcept { return codec_.registers(); }
  const std::string& basis_tag() const noexcept { return tag_; }
  const IndexCodec& codec() const noexcept { return codec_; }
  const Coefficients& coefficients() const noexcept { return coeffs_; }
  std::size_t size() const noexcept { return coeffs_.size(); }

  double coefficient(std::uint64_t key) const {
    auto it = coeffs_.find(key);
    return it == coeffs_.end() ? 0.0 : it->second;
  }
  double coefficient(const MultiIndex& sigma) const { return coefficient(codec_.pack(sigma)); }

  void set(std::uint64_t key, double value) {
    if (!std::isfinite(value)) throw error(errc::invalid_input, "coefficient is not finite");
    if (key >= codec_.key_limit()) throw error(errc::invalid_index, "key out of range");
    if (value == 0.0) {
      coeffs_.erase(key);
    } else {
      coeffs_[key] = value;
    }
  }
  void set(const MultiIndex& sigma, double value) { set(codec_.pack(sigma), value); }
  void add(std::uint64_t key, double value) { set(key, coefficient(key) + value); }

  /// Maximum |sigma| over stored keys; 0 for the empty map.
  int degree() const {
    int d = 0;
    for (const auto& [key, v] : coeffs_) d = std::max(d, codec_.weight(key));
    return d;
  }

  /// Parseval: equals the normalized squared 2-norm of the synthesized matrix.
  double two_norm_sq() const {
    double s = 0.0;
    for (const auto& [key, v] : coeffs_) s += v * v;
    return s;
  }

  FourierOperator scaled(double s) const {
    FourierOperator out(m_, registers(), tag_);
    for (const auto& [key, v] : coeffs_) out.set(key, v * s);
    return out;
  }

  FourierOperator retagged(std::string tag) const {
    FourierOperator out = *this;
    out.tag_ = std::move(tag);
    return out;
  }

  bool operator==(const FourierOperator& o) const {
    return m_ == o.m_ && registers() == o.registers() && tag_ == o.tag_ && coeffs_ == o.coeffs_;
  }

 private:
  int m_ = 2;
  IndexCodec codec_{2, 0};
  std::string tag_ = kGellMannTag;
  Coefficients coeffs_;
};

inline std::size_t checked_power(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (r > std::numeric_limits<std::size_t>::max() / base) {
      throw error(errc::size_limit, "dimension overflows");
    }
    r *= base;
  }
  return r;
}

namespace detail {

inline void accumulate_term(const FourierOperator& op, const StandardBasis& basis,
                            std::uint64_t key, int level, Eigen::Index row, Eigen::Index col,
                            cplx value, Matrix& out) {
  if (level == op.registers()) {
    out(row, col) += value;
    return;
  }
  const int s = op.codec().digit(key, level);
  const Eigen::Index m = basis.m();
  for (const auto& e : basis.nonzeros(static_cast<std::size_t>(s))) {
    accumulate_term(op, basis, key, level + 1, row * m + e.row, col * m + e.col, value * e.value,
                    out);
  }
}

}  // namespace detail

/// M = sum_sigma coeff(sigma) B_sigma_1 (x) ... (x) B_sigma_D.
inline DenseHermitian synthesize(const FourierOperator& op, const StandardBasis& basis,
                                 std::size_t budget = dense_budget()) {
  if (op.m() != basis.m()) throw error(errc::basis_mismatch, "qudit dimension differs from basis");
  if (op.basis_tag() != basis.tag()) {
    throw error(errc::basis_mismatch,
                "operator tagged '" + op.basis_tag() + "' but basis is '" + basis.tag() + "'");
  }
  const std::size_t dim = checked_power(static_cast<std::size_t>(op.m()), op.registers());
  require_dense_budget(dim, budget);
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (const auto& [key, v] : op.coefficients()) {
    detail::accumulate_term(op, basis, key, 0, 0, 0, cplx(v, 0.0), out);
  }
  return DenseHermitian(std::move(out));
}

/// coeff(sigma) = m^-D Tr(B_sigma M), computed one register at a time.
/// Coefficients with magnitude <= drop_tolerance are not stored.
inline FourierOperator analyze(const DenseHermitian& M, int m, int registers,
                               const StandardBasis& basis, double drop_tolerance = 1e-13) {
  if (basis.m() != m) throw error(errc::basis_mismatch, "qudit dimension differs from basis");
  const std::size_t dim = checked_power(static_cast<std::size_t>(m), registers);
  if (M.dim() != dim) {
    throw error(errc::invalid_dimension, "matrix dimension " + std::to_string(M.dim()) +
                                             " != m^D = " + std::to_string(dim));
  }
  const std::size_t a = static_cast<std::size_t>(m) * static_cast<std::size_t>(m);
  const std::size_t total = checked_power(a, registers);

  // Axis i carries u_i = c_i * m + r_i for the entry M(c, r).
  std::vector<cplx> t(total);
  std::vector<std::size_t> place(static_cast<std::size_t>(registers));
  {
    std::size_t p = 1;
    for (int i = registers - 1; i >= 0; --i) {
      place[static_cast<std::size_t>(i)] = p;
      p *= a;
    }
  }
  for (std::size_t c = 0; c < dim; ++c) {
    for (std::size_t r = 0; r < dim; ++r) {
      std::size_t idx = 0, cc = c, rr = r;
      for (int i = registers - 1; i >= 0; --i) {
        const std::size_t ci = cc % static_cast<std::size_t>(m);
        const std::size_t ri = rr % static_cast<std::size_t>(m);
        cc /= static_cast<std::size_t>(m);
        rr /= static_cast<std::size_t>(m);
        idx += (ci * static_cast<std::size_t>(m) + ri) * place[static_cast<std::size_t>(i)];
      }
      t[idx] = M.matrix()(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r));
    }
  }

  // W[s][c*m + r] = B_s(r, c)
  std::vector<std::vector<cplx>> w(a, std::vector<cplx>(a));
  for (std::size_t s = 0; s < a; ++s) {
    for (int c = 0; c < m; ++c) {
      for (int r = 0; r < m; ++r) {
        w[s][static_cast<std::size_t>(c * m + r)] = basis[s](r, c);
      }
    }
  }

  std::vector<cplx> scratch(a);
  for (int axis = 0; axis < registers; ++axis) {
    const std::size_t stride = place[static_cast<std::size_t>(axis)];
    const std::size_t block = stride * a;
    for (std::size_t base = 0; base < total; base += block) {
      for (std::size_t off = 0; off < stride; ++off) {
        for (std::size_t s = 0; s < a; ++s) {
          cplx acc(0.0, 0.0);
          for (std::size_t u = 0; u < a; ++u) acc += w[s][u] * t[base + off + u * stride];
          scratch[s] = acc;
        }
        for (std::size_t s = 0; s < a; ++s) t[base + off + s * stride] = scratch[s];
      }
    }
  }

  const double norm = 1.0 / static_cast<double>(dim);
  FourierOperator out(m, registers, basis.tag());
  for (std::size_t key = 0; key < total; ++key) {
    const double v = t[key].real() * norm;
    if (std::abs(v) > drop_tolerance) out.set(static_cast<std::uint64_t>(key), v);
  }
  return out;
}

/// Inf_i(P) = sum over sigma with sigma_i != 0 of coeff^2; i is 1-based.
inline double influence(const FourierOperator& op, int i) {
  if (i < 1 || i > op.registers()) {
    throw error(errc::invalid_index, "register index " + std::to_string(i) + " out of range");
  }
  double s = 0.0;
  for (const auto& [key, v] : op.coefficients()) {
    if (op.codec().digit(key, i - 1) != 0) s += v * v;
  }
  return s;
}

/// All register influences in one pass (index 0 is register 1).
inline std::vector<double> influences(const FourierOperator& op) {
  std::vector<double> out(static_cast<std::size_t>(op.registers()), 0.0);
  for (const auto& [key, v] : op.coefficients()) {
    for (int i = 0; i < op.registers(); ++i) {
      if (op.codec().digit(key, i) != 0) out[static_cast<std::size_t>(i)] += v * v;
    }
  }
  return out;
}

inline double total_influence(const FourierOperator& op) {
  double s = 0.0;
  for (double v : influences(op)) s += v;
  return s;
}

/// Delta_rho: coeff(sigma) scaled by rho^|sigma|.
inline FourierOperator apply_noise(const FourierOperator& op, double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw error(errc::invalid_parameter, "noise rate must lie in [0, 1]");
  }
  FourierOperator out(op.m(), op.registers(), op.basis_tag());
  for (const auto& [key, v] : op.coefficients()) {
    out.set(key, v * std::pow(rho, op.codec().weight(key)));
  }
  return out;
}

/// Drops every term of weight above d.
inline FourierOperator truncate_degree(const FourierOperator& op, int d) {
  FourierOperator out(op.m(), op.registers(), op.basis_tag());
  for (const auto& [key, v] : op.coefficients()) {
    if (op.codec().weight(key) <= d) out.set(key, v);
  }
  return out;
}

}  // namespace nga
