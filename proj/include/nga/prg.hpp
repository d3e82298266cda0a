#pragma once

// k-wise uniform sources over binary fields and the block combiner
// x_i = z^{f(i)}_i with f pairwise uniform.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "nga/error.hpp"
#include "nga/summation.hpp"

namespace nga {

/// Low bits of x^t + low for the smallest odd low making the polynomial
/// irreducible over GF(2), t = 1..64.
inline constexpr std::array<std::uint64_t, 64> kIrreducibleLow = {
    0x1,  0x3,  0x3,  0x3,  0x5,  0x3,  0x3,  0x1B, 0x3,  0x9,  0x5,  0x9,  0x1B,
    0x21, 0x3,  0x2B, 0x9,  0x9,  0x27, 0x9,  0x5,  0x3,  0x21, 0x1B, 0x9,  0x1B,
    0x27, 0x3,  0x5,  0x3,  0x9,  0x8D, 0x4B, 0x1B, 0x5,  0x35, 0x3F, 0x63, 0x11,
    0x39, 0x9,  0x27, 0x59, 0x21, 0x1B, 0x3,  0x21, 0x2D, 0x71, 0x1D, 0x4B, 0x9,
    0x47, 0x7D, 0x47, 0x95, 0x11, 0x63, 0x7B, 0x3,  0x27, 0x69, 0x3,  0x1B};

inline constexpr int kMaxFieldDegree = 64;
inline constexpr int kVerifiedFieldDegree = 16;

namespace prg_detail {

inline int poly_degree(std::uint64_t p) {
  int d = -1;
  while (p) {
    ++d;
    p >>= 1;
  }
  return d;
}

/// a mod b over GF(2)[x]; b != 0.
inline std::uint64_t poly_mod(std::uint64_t a, std::uint64_t b) {
  const int db = poly_degree(b);
  for (int da = poly_degree(a); da >= db; da = poly_degree(a)) a ^= b << (da - db);
  return a;
}

}  // namespace prg_detail

/// Trial division by every polynomial of degree 1..t/2; t <= 32.
inline bool is_irreducible_exhaustive(int t, std::uint64_t low) {
  if (t < 1 || t > 32) throw error(errc::unsupported_degree, "exhaustive check needs t in [1,32]");
  const std::uint64_t poly = (std::uint64_t{1} << t) | low;
  for (int d = 1; d <= t / 2; ++d) {
    for (std::uint64_t q = std::uint64_t{1} << d; q < (std::uint64_t{1} << (d + 1)); ++q) {
      if (prg_detail::poly_mod(poly, q) == 0) return false;
    }
  }
  return true;
}

/// GF(2^t) with elements as t-bit patterns.
class BinaryField {
 public:
  BinaryField() = default;
  BinaryField(int t, std::uint64_t low) : t_(t), low_(low) {
    mask_ = t == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << t) - 1;
  }

  int t() const noexcept { return t_; }
  std::uint64_t modulus_low() const noexcept { return low_; }
  std::uint64_t mask() const noexcept { return mask_; }
  std::string modulus_string() const {
    std::string s = "x^" + std::to_string(t_);
    for (int b = t_ - 1; b >= 0; --b) {
      if ((low_ >> b) & 1) s += b == 0 ? " + 1" : b == 1 ? " + x" : " + x^" + std::to_string(b);
    }
    return s;
  }

  std::uint64_t add(std::uint64_t a, std::uint64_t b) const noexcept { return a ^ b; }

  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const noexcept {
    std::uint64_t r = 0;
    a &= mask_;
    b &= mask_;
    while (b) {
      if (b & 1) r ^= a;
      b >>= 1;
      const bool carry = (a >> (t_ - 1)) & 1;
      a = (a << 1) & mask_;
      if (carry) a ^= low_;
    }
    return r;
  }

  std::uint64_t pow(std::uint64_t a, std::uint64_t e) const noexcept {
    std::uint64_t r = 1;
    while (e) {
      if (e & 1) r = mul(r, a);
      a = mul(a, a);
      e >>= 1;
    }
    return r;
  }

  /// a^(2^t - 2); zero has no inverse.
  std::uint64_t inv(std::uint64_t a) const {
    if ((a & mask_) == 0) throw error(errc::invalid_input, "zero has no inverse");
    return pow(a, mask_ - 1);
  }

 private:
  int t_ = 1;
  std::uint64_t low_ = 1;
  std::uint64_t mask_ = 1;
};

inline BinaryField make_field(int t) {
  if (t < 1 || t > kMaxFieldDegree) {
    throw error(errc::unsupported_degree, "field degree " + std::to_string(t) + " not tabulated");
  }
  const std::uint64_t low = kIrreducibleLow[static_cast<std::size_t>(t - 1)];
  if (t <= kVerifiedFieldDegree && !is_irreducible_exhaustive(t, low)) {
    throw error(errc::invalid_state, "tabulated modulus is reducible");
  }
  return BinaryField(t, low);
}

/// Smallest t with 2^t > bound.
inline int field_degree_for(std::uint64_t bound) {
  int t = 1;
  while (t < 64 && (std::uint64_t{1} << t) <= bound) ++t;
  if (t == 64 && bound == ~std::uint64_t{0}) {
    throw error(errc::field_size, "no tabulated field exceeds the requested size");
  }
  return t;
}

inline bool is_power_of_two(std::uint64_t p) { return p && !(p & (p - 1)); }

inline int log2_exact(std::uint64_t p) {
  int b = 0;
  while ((std::uint64_t{1} << b) < p) ++b;
  return b;
}

/// Coefficients c_0..c_{k-1} of a polynomial over the field.
struct HashMember {
  std::vector<std::uint64_t> coeffs;
};

/// All polynomials of degree < k over GF(2^t); member h maps i in [n] to the
/// low log2(p) bits of h(i), i embedded by its bit pattern.
class HashFamily {
 public:
  HashFamily() = default;
  HashFamily(std::uint64_t n, std::uint64_t p, int k, BinaryField field)
      : n_(n), p_(p), k_(k), field_(field) {
    if (n < 1) throw error(errc::invalid_parameter, "hash domain must be nonempty");
    if (k < 1) throw error(errc::invalid_parameter, "uniformity k must be >= 1");
    if (!is_power_of_two(p)) throw error(errc::invalid_parameter, "range size must be a power of 2");
    const int t = field.t();
    const std::uint64_t bound = std::max(n, p);
    if (t < 64 && (std::uint64_t{1} << t) <= bound) {
      throw error(errc::field_size, "field GF(2^" + std::to_string(t) + ") too small for domain/range");
    }
    out_bits_ = log2_exact(p);
    out_mask_ = out_bits_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << out_bits_) - 1;
  }

  std::uint64_t n() const noexcept { return n_; }
  std::uint64_t p() const noexcept { return p_; }
  int k() const noexcept { return k_; }
  const BinaryField& field() const noexcept { return field_; }
  int out_bits() const noexcept { return out_bits_; }

  /// The family has 2^size_log2() members.
  std::uint64_t size_log2() const noexcept {
    return static_cast<std::uint64_t>(field_.t()) * static_cast<std::uint64_t>(k_);
  }
  std::optional<std::uint64_t> size() const {
    if (size_log2() >= 64) return std::nullopt;
    return std::uint64_t{1} << size_log2();
  }

  /// Member index bits [j*t, (j+1)*t) hold c_j.
  HashMember member(std::uint64_t index) const {
    if (size_log2() > 64) throw error(errc::enumeration_limit, "family too large for 64-bit indices");
    if (size_log2() < 64 && index >> size_log2()) throw error(errc::invalid_index, "member index out of range");
    HashMember h;
    h.coeffs.resize(static_cast<std::size_t>(k_));
    const int t = field_.t();
    for (int j = 0; j < k_; ++j) {
      h.coeffs[static_cast<std::size_t>(j)] = t * j >= 64 ? 0 : (index >> (t * j)) & field_.mask();
    }
    return h;
  }

  std::uint64_t eval(const HashMember& h, std::uint64_t x) const {
    if (h.coeffs.size() != static_cast<std::size_t>(k_)) {
      throw error(errc::invalid_input, "member has wrong coefficient count");
    }
    std::uint64_t v = 0;
    for (int j = k_ - 1; j >= 0; --j) {
      v = field_.mul(v, x) ^ (h.coeffs[static_cast<std::size_t>(j)] & field_.mask());
    }
    return v & out_mask_;
  }

  std::vector<std::uint64_t> table(const HashMember& h) const {
    std::vector<std::uint64_t> out(static_cast<std::size_t>(n_));
    for (std::uint64_t i = 0; i < n_; ++i) out[static_cast<std::size_t>(i)] = eval(h, i);
    return out;
  }

 private:
  std::uint64_t n_ = 1;
  std::uint64_t p_ = 1;
  int k_ = 1;
  BinaryField field_;
  int out_bits_ = 0;
  std::uint64_t out_mask_ = 0;
};

/// Uses the smallest field with 2^t > max(n, p).
inline HashFamily make_hash_family(std::uint64_t n, std::uint64_t p, int k) {
  if (!is_power_of_two(p)) throw error(errc::invalid_parameter, "range size must be a power of 2");
  return HashFamily(n, p, k, make_field(field_degree_for(std::max(n, p))));
}

inline HashFamily make_hash_family(std::uint64_t n, std::uint64_t p, int k, const BinaryField& field) {
  return HashFamily(n, p, k, field);
}

/// Sign vectors z in {-1,+1}^n: z_i = -1 iff the range-2 hash of i is 1.
class KWiseVectorFamily {
 public:
  KWiseVectorFamily() = default;
  explicit KWiseVectorFamily(HashFamily hash) : hash_(std::move(hash)) {
    if (hash_.p() != 2) throw error(errc::invalid_parameter, "sign family needs range 2");
  }

  std::uint64_t n() const noexcept { return hash_.n(); }
  int k() const noexcept { return hash_.k(); }
  std::uint64_t size_log2() const noexcept { return hash_.size_log2(); }
  std::optional<std::uint64_t> size() const { return hash_.size(); }
  const HashFamily& hash() const noexcept { return hash_; }

  int sign(const HashMember& h, std::uint64_t i) const { return hash_.eval(h, i) ? -1 : 1; }

  std::vector<int> vector(const HashMember& h) const {
    std::vector<int> z(static_cast<std::size_t>(n()));
    for (std::uint64_t i = 0; i < n(); ++i) z[static_cast<std::size_t>(i)] = sign(h, i);
    return z;
  }
  std::vector<int> operator[](std::uint64_t index) const { return vector(hash_.member(index)); }

  /// The sign bit of coordinate i is a GF(2)-linear function of the member's
  /// t*k coefficient bits. Entry j*t + b is a mask over positions in
  /// `coords` (bit q for coords[q]) whose sign bit depends on bit b of c_j.
  std::vector<std::uint64_t> sign_columns(const std::vector<std::uint64_t>& coords) const {
    if (coords.size() > 64) throw error(errc::enumeration_limit, "sign columns need at most 64 coordinates");
    const BinaryField& f = hash_.field();
    const int t = f.t();
    std::vector<std::uint64_t> cols(static_cast<std::size_t>(t * k()), 0);
    for (std::size_t q = 0; q < coords.size(); ++q) {
      const std::uint64_t i = coords[q];
      if (i >= n()) throw error(errc::invalid_index, "coordinate out of range");
      std::uint64_t power = 1;
      for (int j = 0; j < k(); ++j) {
        for (int b = 0; b < t; ++b) {
          if (f.mul(std::uint64_t{1} << b, power) & 1) {
            cols[static_cast<std::size_t>(j * t + b)] |= std::uint64_t{1} << q;
          }
        }
        power = f.mul(power, i);
      }
    }
    return cols;
  }

  std::vector<std::uint64_t> sign_columns() const {
    std::vector<std::uint64_t> all(static_cast<std::size_t>(n()));
    for (std::uint64_t i = 0; i < n(); ++i) all[static_cast<std::size_t>(i)] = i;
    return sign_columns(all);
  }

 private:
  HashFamily hash_;
};

inline KWiseVectorFamily make_kwise_vectors(std::uint64_t n, int k) {
  if (n < 1 || k < 1) throw error(errc::invalid_parameter, "need n >= 1 and k >= 1");
  return KWiseVectorFamily(make_hash_family(n, 2, k));
}

/// x_i = blocks[f_values[i]][i].
inline std::vector<int> mz_generate(const std::vector<std::uint64_t>& f_values,
                                    const std::vector<std::vector<int>>& blocks) {
  const std::size_t n = f_values.size();
  std::vector<int> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (f_values[i] >= blocks.size()) throw error(errc::invalid_input, "hash value has no block");
    const auto& z = blocks[static_cast<std::size_t>(f_values[i])];
    if (z.size() != n) throw error(errc::invalid_input, "block length differs from n");
    x[i] = z[i];
  }
  return x;
}

inline std::vector<int> mz_generate(const HashFamily& hash, const HashMember& f,
                                    const std::vector<std::vector<int>>& blocks) {
  if (blocks.size() != hash.p()) throw error(errc::invalid_input, "need exactly p blocks");
  for (const auto& z : blocks) {
    if (z.size() != hash.n()) throw error(errc::invalid_input, "block length differs from n");
  }
  return mz_generate(hash.table(f), blocks);
}

struct SeedIndex {
  std::uint64_t hash_index = 0;
  std::vector<std::uint64_t> block_indices;
};

/// Seeds (f, z^1, ..., z^p). Lexicographic order puts the hash index first
/// and block p last, so ordinal bits are, from most significant: hash index,
/// block 0, ..., block p-1.
class SeedSpace {
 public:
  SeedSpace(HashFamily hash, KWiseVectorFamily vectors)
      : hash_(std::move(hash)), vectors_(std::move(vectors)) {
    if (hash_.n() != vectors_.n()) throw error(errc::invalid_input, "hash and vector lengths differ");
  }

  const HashFamily& hash() const noexcept { return hash_; }
  const KWiseVectorFamily& vectors() const noexcept { return vectors_; }
  std::uint64_t blocks() const noexcept { return hash_.p(); }

  /// log2 of hash.size * vectors.size^p (an integer, saturated at 2^64 - 1).
  std::uint64_t cardinality_log2() const noexcept {
    const unsigned __int128 v = static_cast<unsigned __int128>(hash_.size_log2()) +
                                static_cast<unsigned __int128>(blocks()) * vectors_.size_log2();
    return v > ~std::uint64_t{0} ? ~std::uint64_t{0} : static_cast<std::uint64_t>(v);
  }
  std::optional<std::uint64_t> cardinality() const {
    if (cardinality_log2() >= 64) return std::nullopt;
    return std::uint64_t{1} << cardinality_log2();
  }

  SeedIndex decode(std::uint64_t ordinal) const {
    const auto total = cardinality();
    if (!total) throw error(errc::enumeration_limit, "seed space too large for 64-bit ordinals");
    if (ordinal >= *total) throw error(errc::invalid_index, "seed ordinal out of range");
    const std::uint64_t vbits = vectors_.size_log2();
    const std::uint64_t vmask = vbits == 0 ? 0 : (std::uint64_t{1} << vbits) - 1;
    SeedIndex s;
    s.block_indices.resize(static_cast<std::size_t>(blocks()));
    for (std::uint64_t b = 0; b < blocks(); ++b) {
      const std::uint64_t shift = (blocks() - 1 - b) * vbits;
      s.block_indices[static_cast<std::size_t>(b)] = (ordinal >> shift) & vmask;
    }
    s.hash_index = ordinal >> (blocks() * vbits);
    return s;
  }

  std::uint64_t encode(const SeedIndex& s) const {
    if (!cardinality()) throw error(errc::enumeration_limit, "seed space too large for 64-bit ordinals");
    if (s.block_indices.size() != blocks()) throw error(errc::invalid_input, "need p block indices");
    std::uint64_t ord = s.hash_index;
    for (std::uint64_t idx : s.block_indices) ord = (ord << vectors_.size_log2()) | idx;
    return ord;
  }

  std::vector<int> generate(const SeedIndex& s) const {
    if (s.block_indices.size() != blocks()) throw error(errc::invalid_input, "need p block indices");
    const HashMember f = hash_.member(s.hash_index);
    std::vector<int> x(static_cast<std::size_t>(hash_.n()));
    std::unordered_map<std::uint64_t, HashMember> members;
    for (std::uint64_t i = 0; i < hash_.n(); ++i) {
      const std::uint64_t b = hash_.eval(f, i);
      auto it = members.find(b);
      if (it == members.end()) {
        it = members.emplace(b, vectors_.hash().member(s.block_indices[static_cast<std::size_t>(b)])).first;
      }
      x[static_cast<std::size_t>(i)] = vectors_.sign(it->second, i);
    }
    return x;
  }

  /// Visits every seed in lexicographic order: fn(ordinal, x).
  template <class Fn>
  void enumerate(Fn&& fn) const {
    const auto total = cardinality();
    if (!total) throw error(errc::enumeration_limit, "seed space too large to enumerate");
    for (std::uint64_t o = 0; o < *total; ++o) fn(o, generate(decode(o)));
  }

  /// Deterministic subsample of `budget` seeds. When the ordinal range fits
  /// in 62 bits, seed j is ordinal (j * stride) mod total with odd stride
  /// (total / budget) | 1, hence distinct. Otherwise seed j draws the hash
  /// coefficients and each block used by f from splitmix64 counters keyed by
  /// (j, block, coefficient); only the blocks hit by f are materialized.
  /// Returns a description of the schedule.
  template <class Fn>
  std::string sample(std::uint64_t budget, Fn&& fn) const {
    if (budget == 0) throw error(errc::invalid_parameter, "seed budget must be positive");
    const std::uint64_t lg = cardinality_log2();
    if (lg <= 62) {
      const std::uint64_t total = std::uint64_t{1} << lg;
      if (budget >= total) {
        enumerate([&](std::uint64_t, const std::vector<int>& x) { fn(x); });
        return "full";
      }
      const std::uint64_t stride = (total / budget) | 1;
      for (std::uint64_t j = 0; j < budget; ++j) {
        const std::uint64_t ord = static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(j) * stride) & (total - 1));
        fn(generate(decode(ord)));
      }
      return "stride:" + std::to_string(stride);
    }
    for (std::uint64_t j = 0; j < budget; ++j) fn(counter_seed(j));
    return "counter:splitmix64";
  }

 private:
  static std::uint64_t counter_word(std::uint64_t j, std::uint64_t block, std::uint64_t c) {
    std::uint64_t h = splitmix64(j ^ 0x6a09e667f3bcc909ULL);
    h = splitmix64(h ^ (block * 0x9e3779b97f4a7c15ULL));
    return splitmix64(h ^ (c + 0xbb67ae8584caa73bULL));
  }

  std::vector<int> counter_seed(std::uint64_t j) const {
    HashMember f;
    for (int c = 0; c < hash_.k(); ++c) {
      f.coeffs.push_back(counter_word(j, 0, static_cast<std::uint64_t>(c)) & hash_.field().mask());
    }
    std::vector<int> x(static_cast<std::size_t>(hash_.n()));
    std::unordered_map<std::uint64_t, HashMember> members;
    for (std::uint64_t i = 0; i < hash_.n(); ++i) {
      const std::uint64_t b = hash_.eval(f, i);
      auto it = members.find(b);
      if (it == members.end()) {
        HashMember z;
        for (int c = 0; c < vectors_.k(); ++c) {
          z.coeffs.push_back(counter_word(j, b + 1, static_cast<std::uint64_t>(c)) &
                             vectors_.hash().field().mask());
        }
        it = members.emplace(b, std::move(z)).first;
      }
      x[static_cast<std::size_t>(i)] = vectors_.sign(it->second, i);
    }
    return x;
  }

  HashFamily hash_;
  KWiseVectorFamily vectors_;
};

}  // namespace nga
