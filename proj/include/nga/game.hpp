#pragma once

// Nonlocal games, fixed-point certificates and their file formats.
//
// Game file (JSON):
//   {"s_x": 2, "s_y": 2, "t_a": 2, "t_b": 2,
//    "mu": [[...], ...],            mu[x][y]
//    "V":  [[[[...]]]]}             V[x][y][a][b] in {0, 1}
//
// Certificate file (text):
//   <m> <D> <d> <w>
//   A <x> <a> <sigma_1,...,sigma_D> <numerator>
//   B <y> <b> <sigma_1,...,sigma_D> <numerator>
// The coefficient value is numerator * 2^-w.

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "nga/error.hpp"
#include "nga/fourier.hpp"
#include "nga/operator_io.hpp"

namespace nga {

struct GameSpec {
  int s_x = 0, s_y = 0, t_a = 0, t_b = 0;
  std::vector<std::vector<double>> mu;                        // [x][y]
  std::vector<std::vector<std::vector<std::vector<int>>>> V;  // [x][y][a][b]

  double prob(int x, int y) const { return mu[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)]; }
  int win(int x, int y, int a, int b) const {
    return V[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)][static_cast<std::size_t>(a)]
            [static_cast<std::size_t>(b)];
  }

  void validate() const {
    if (s_x < 1 || s_y < 1 || t_a < 1 || t_b < 1) throw error(errc::invalid_input, "game sizes must be >= 1");
    if (mu.size() != static_cast<std::size_t>(s_x) || V.size() != static_cast<std::size_t>(s_x)) {
      throw error(errc::invalid_input, "mu/V must have s_x rows");
    }
    double total = 0.0;
    for (int x = 0; x < s_x; ++x) {
      if (mu[static_cast<std::size_t>(x)].size() != static_cast<std::size_t>(s_y) ||
          V[static_cast<std::size_t>(x)].size() != static_cast<std::size_t>(s_y)) {
        throw error(errc::invalid_input, "mu/V rows must have s_y entries");
      }
      for (int y = 0; y < s_y; ++y) {
        const double p = prob(x, y);
        if (!(p >= 0.0) || !std::isfinite(p)) throw error(errc::invalid_input, "mu entries must be >= 0");
        total += p;
        const auto& vxy = V[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
        if (vxy.size() != static_cast<std::size_t>(t_a)) throw error(errc::invalid_input, "V[x][y] needs t_a rows");
        for (const auto& row : vxy) {
          if (row.size() != static_cast<std::size_t>(t_b)) throw error(errc::invalid_input, "V[x][y][a] needs t_b entries");
          for (int v : row) {
            if (v != 0 && v != 1) throw error(errc::invalid_input, "V entries must be 0 or 1");
          }
        }
      }
    }
    if (std::abs(total - 1.0) > 1e-12) throw error(errc::invalid_input, "mu does not sum to 1");
  }
};

/// Uniform questions, win iff a xor b = x and y.
inline GameSpec chsh_game() {
  GameSpec g;
  g.s_x = g.s_y = g.t_a = g.t_b = 2;
  g.mu.assign(2, std::vector<double>(2, 0.25));
  g.V.assign(2, std::vector<std::vector<std::vector<int>>>(2, std::vector<std::vector<int>>(2, std::vector<int>(2))));
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) g.V[x][y][a][b] = ((a ^ b) == (x & y)) ? 1 : 0;
  return g;
}

inline nlohmann::json game_to_json(const GameSpec& g) {
  return {{"s_x", g.s_x}, {"s_y", g.s_y}, {"t_a", g.t_a}, {"t_b", g.t_b}, {"mu", g.mu}, {"V", g.V}};
}

inline GameSpec game_from_json(const nlohmann::json& j) {
  GameSpec g;
  try {
    g.s_x = j.at("s_x").get<int>();
    g.s_y = j.at("s_y").get<int>();
    g.t_a = j.at("t_a").get<int>();
    g.t_b = j.at("t_b").get<int>();
    g.mu = j.at("mu").get<std::vector<std::vector<double>>>();
    g.V = j.at("V").get<std::vector<std::vector<std::vector<std::vector<int>>>>>();
  } catch (const nlohmann::json::exception& e) {
    throw error(errc::parse_error, std::string("game file: ") + e.what());
  }
  try {
    g.validate();
  } catch (const error& e) {
    throw error(errc::parse_error, std::string("game file: ") + e.what());
  }
  return g;
}

inline GameSpec read_game(std::istream& is) {
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw error(errc::parse_error, std::string("game file: ") + e.what());
  }
  return game_from_json(j);
}

enum class Party { alice, bob };

inline char party_letter(Party p) { return p == Party::alice ? 'A' : 'B'; }

/// Fourier coefficients of a pseudo-strategy as integers over 2^w.
struct Certificate {
  using Table = std::map<std::tuple<int, int, std::uint64_t>, std::int64_t>;  // (question, answer, key)

  static constexpr int kMaxWidth = 60;

  int m = 2, D = 1, d = 0, w = 0;
  int s_x = 0, t_a = 0, s_y = 0, t_b = 0;
  Table alice, bob;

  IndexCodec codec() const { return IndexCodec(m, D); }
  Table& table(Party p) { return p == Party::alice ? alice : bob; }
  const Table& table(Party p) const { return p == Party::alice ? alice : bob; }
  int questions(Party p) const { return p == Party::alice ? s_x : s_y; }
  int answers(Party p) const { return p == Party::alice ? t_a : t_b; }

  double value(std::int64_t numerator) const { return std::ldexp(static_cast<double>(numerator), -w); }

  void set(Party p, int q, int a, std::uint64_t key, std::int64_t numerator) {
    if (numerator == 0) {
      table(p).erase({q, a, key});
    } else {
      table(p)[{q, a, key}] = numerator;
    }
  }

  /// Decoded operator for (question, answer) tagged with `basis_tag`.
  FourierOperator operator_for(Party p, int q, int a, const std::string& basis_tag) const {
    FourierOperator op(m, D, basis_tag);
    const Table& t = table(p);
    for (auto it = t.lower_bound({q, a, 0}); it != t.end(); ++it) {
      const auto& [qq, aa, key] = it->first;
      if (qq != q || aa != a) break;
      op.set(key, value(it->second));
    }
    return op;
  }

  /// Shape from the largest indices present.
  void infer_shape() {
    s_x = t_a = s_y = t_b = 0;
    for (const auto& [k, v] : alice) {
      s_x = std::max(s_x, std::get<0>(k) + 1);
      t_a = std::max(t_a, std::get<1>(k) + 1);
    }
    for (const auto& [k, v] : bob) {
      s_y = std::max(s_y, std::get<0>(k) + 1);
      t_b = std::max(t_b, std::get<1>(k) + 1);
    }
  }

  /// Adopts the game's shape; records outside it are a mismatch.
  void conform(const GameSpec& g) {
    infer_shape();
    if (s_x > g.s_x || t_a > g.t_a || s_y > g.s_y || t_b > g.t_b) {
      throw error(errc::shape_mismatch, "certificate references questions or answers outside the game");
    }
    s_x = g.s_x;
    t_a = g.t_a;
    s_y = g.s_y;
    t_b = g.t_b;
  }

  void validate() const {
    if (w < 0 || w > kMaxWidth) throw error(errc::invalid_input, "width must lie in [0, 60]");
    if (d < 0 || d > D) throw error(errc::invalid_input, "degree must lie in [0, D]");
    const IndexCodec c = codec();
    const std::int64_t one = std::int64_t{1} << w;
    for (Party p : {Party::alice, Party::bob}) {
      for (const auto& [k, v] : table(p)) {
        if (std::get<0>(k) < 0 || std::get<1>(k) < 0) throw error(errc::invalid_input, "negative index");
        if (std::get<2>(k) >= c.key_limit()) throw error(errc::invalid_index, "multi-index out of range");
        if (c.weight(std::get<2>(k)) > d) throw error(errc::invalid_input, "record exceeds the declared degree");
        if (v > one || v < -one) throw error(errc::invalid_input, "coefficient magnitude exceeds 1");
      }
    }
  }
};

inline void write_certificate(std::ostream& os, const Certificate& cert) {
  os << cert.m << ' ' << cert.D << ' ' << cert.d << ' ' << cert.w << '\n';
  const IndexCodec c = cert.codec();
  for (Party p : {Party::alice, Party::bob}) {
    for (const auto& [k, v] : cert.table(p)) {
      os << party_letter(p) << ' ' << std::get<0>(k) << ' ' << std::get<1>(k) << ' '
         << io_detail::format_sigma(c.unpack(std::get<2>(k))) << ' ' << v << '\n';
    }
  }
}

inline Certificate read_certificate(std::istream& is) {
  Certificate cert;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  auto fail = [&](const std::string& msg) {
    return error(errc::parse_error, "certificate line " + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(is, line)) {
    ++line_no;
    if (io_detail::skippable(line)) continue;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (!have_header) {
      if (tok.size() != 4) throw fail("header must be '<m> <D> <d> <w>'");
      cert.m = io_detail::parse_int<int>(tok[0], line_no);
      cert.D = io_detail::parse_int<int>(tok[1], line_no);
      cert.d = io_detail::parse_int<int>(tok[2], line_no);
      cert.w = io_detail::parse_int<int>(tok[3], line_no);
      try {
        (void)cert.codec();
      } catch (const error& e) {
        throw fail(e.what());
      }
      if (cert.w < 0 || cert.w > Certificate::kMaxWidth) throw fail("width must lie in [0, 60]");
      have_header = true;
      continue;
    }
    if (tok.size() != 5) throw fail("record must be '<A|B> <question> <answer> <sigma> <numerator>'");
    Party p;
    if (tok[0] == "A") {
      p = Party::alice;
    } else if (tok[0] == "B") {
      p = Party::bob;
    } else {
      throw fail("party must be A or B");
    }
    const int q = io_detail::parse_int<int>(tok[1], line_no);
    const int a = io_detail::parse_int<int>(tok[2], line_no);
    const std::vector<int> sigma = io_detail::parse_sigma(tok[3], line_no);
    const auto num = io_detail::parse_int<std::int64_t>(tok[4], line_no);
    if (q < 0 || a < 0) throw fail("indices must be non-negative");
    std::uint64_t key = 0;
    try {
      key = cert.codec().pack(MultiIndex(sigma));
    } catch (const error& e) {
      throw fail(e.what());
    }
    if (cert.table(p).count({q, a, key})) throw fail("duplicate record");
    cert.set(p, q, a, key, num);
  }
  if (!have_header) throw error(errc::parse_error, "certificate: missing header");
  try {
    cert.validate();
  } catch (const error& e) {
    throw error(errc::parse_error, std::string("certificate: ") + e.what());
  }
  cert.infer_shape();
  return cert;
}

}  // namespace nga
