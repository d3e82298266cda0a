#pragma once

// Games and strategies shared by several test binaries.

#include <cmath>
#include <random>
#include <vector>

#include "nga/game.hpp"
#include "nga/prover_tools.hpp"
#include "oracles.hpp"

namespace fixture {

using nga::cplx;
using nga::DenseHermitian;
using nga::Matrix;

inline Matrix projector(double theta) {
  // |v><v| with v = (cos theta, sin theta)
  Matrix v(2, 1);
  v << std::cos(theta), std::sin(theta);
  return v * v.adjoint();
}

inline std::vector<DenseHermitian> two_outcome(double theta) {
  const Matrix p = projector(theta);
  return {DenseHermitian(p), DenseHermitian(Matrix::Identity(2, 2) - p)};
}

/// Alice measures Z / X, Bob the two diagonal directions; one register.
inline nga::ExplicitStrategy chsh_qubit_strategy() {
  const double pi = std::acos(-1.0);
  nga::ExplicitStrategy s;
  s.m = 2;
  s.D = 1;
  s.alice = {two_outcome(0.0), two_outcome(pi / 4)};
  s.bob = {two_outcome(pi / 8), two_outcome(-pi / 8)};
  return s;
}

/// Every element (1/t) I.
inline nga::ExplicitStrategy uniform_strategy(int m, int D, int s_x, int t_a, int s_y, int t_b) {
  nga::ExplicitStrategy s;
  s.m = m;
  s.D = D;
  const auto dim = static_cast<Eigen::Index>(s.dim());
  auto side = [&](int q, int t) {
    std::vector<std::vector<DenseHermitian>> out(static_cast<std::size_t>(q));
    for (auto& row : out)
      for (int a = 0; a < t; ++a) row.emplace_back(Matrix(Matrix::Identity(dim, dim) / static_cast<double>(t)));
    return out;
  };
  s.alice = side(s_x, t_a);
  s.bob = side(s_y, t_b);
  return s;
}

/// Deterministic answers a = 0, b = 0.
inline nga::ExplicitStrategy constant_answer_strategy() {
  nga::ExplicitStrategy s;
  s.m = 2;
  s.D = 1;
  const DenseHermitian id = DenseHermitian::identity(2);
  const DenseHermitian zero(Matrix::Zero(2, 2));
  s.alice = {{id, zero}, {id, zero}};
  s.bob = {{id, zero}, {id, zero}};
  return s;
}

inline nga::GameSpec random_game(std::mt19937_64& rng, int s_x, int s_y, int t_a, int t_b) {
  nga::GameSpec g;
  g.s_x = s_x;
  g.s_y = s_y;
  g.t_a = t_a;
  g.t_b = t_b;
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::bernoulli_distribution coin(0.5);
  g.mu.assign(static_cast<std::size_t>(s_x), std::vector<double>(static_cast<std::size_t>(s_y)));
  double total = 0.0;
  for (auto& row : g.mu)
    for (auto& v : row) total += (v = u(rng));
  for (auto& row : g.mu)
    for (auto& v : row) v /= total;
  g.V.assign(static_cast<std::size_t>(s_x),
             std::vector<std::vector<std::vector<int>>>(
                 static_cast<std::size_t>(s_y),
                 std::vector<std::vector<int>>(static_cast<std::size_t>(t_a), std::vector<int>(static_cast<std::size_t>(t_b)))));
  for (auto& a : g.V)
    for (auto& b : a)
      for (auto& c : b)
        for (auto& v : c) v = coin(rng) ? 1 : 0;
  return g;
}

inline nga::ExplicitStrategy random_strategy(std::mt19937_64& rng, int m, int D, const nga::GameSpec& g) {
  nga::ExplicitStrategy s;
  s.m = m;
  s.D = D;
  const auto dim = static_cast<Eigen::Index>(s.dim());
  auto side = [&](int q, int t) {
    std::vector<std::vector<DenseHermitian>> out;
    for (int i = 0; i < q; ++i) {
      out.emplace_back();
      for (const auto& e : oracle::random_povm(rng, dim, t)) out.back().emplace_back(e);
    }
    return out;
  };
  s.alice = side(g.s_x, g.t_a);
  s.bob = side(g.s_y, g.t_b);
  return s;
}

}  // namespace fixture
