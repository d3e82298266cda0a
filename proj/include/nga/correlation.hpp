#pragma once

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "nga/basis.hpp"
#include "nga/dense.hpp"
#include "nga/error.hpp"
#include "nga/fourier.hpp"

namespace nga {

/// A bipartite state on C^m (x) C^m with maximally mixed marginals, together
/// with an aligned pair of standard bases: Tr((A_i (x) B_j) state) = delta_ij c_i.
struct NoisyMES {
  int m = 2;
  DenseHermitian state;
  std::vector<double> c;  // c[0] = 1, nonincreasing from index 1
  StandardBasis basis_a;
  StandardBasis basis_b;

  double maximal_correlation() const { return c.size() > 1 ? c[1] : 0.0; }

  /// c_sigma = prod_i c_{sigma_i}.
  double correlation(const IndexCodec& codec, std::uint64_t key) const {
    double p = 1.0;
    for (int i = 0; i < codec.registers(); ++i) p *= c[static_cast<std::size_t>(codec.digit(key, i))];
    return p;
  }
};

/// Tr_B of a state on C^m (x) C^m (A is the leading tensor factor).
inline Matrix partial_trace_b(const Matrix& state, int m) {
  Matrix out = Matrix::Zero(m, m);
  for (int a = 0; a < m; ++a)
    for (int a2 = 0; a2 < m; ++a2)
      for (int b = 0; b < m; ++b) out(a, a2) += state(a * m + b, a2 * m + b);
  return out;
}

inline Matrix partial_trace_a(const Matrix& state, int m) {
  Matrix out = Matrix::Zero(m, m);
  for (int b = 0; b < m; ++b)
    for (int b2 = 0; b2 < m; ++b2)
      for (int a = 0; a < m; ++a) out(b, b2) += state(a * m + b, a * m + b2);
  return out;
}

/// Rotates the traceless part of the standard basis on each side by the
/// singular vectors of M_ij = Tr((B_i (x) B_j) state), i, j >= 1.
inline NoisyMES align_bases(const DenseHermitian& state, int m, const std::string& tag = "mes") {
  if (m < 2) throw error(errc::invalid_dimension, "qudit dimension must be >= 2");
  const auto dim = static_cast<Eigen::Index>(m) * m;
  if (static_cast<Eigen::Index>(state.dim()) != dim) {
    throw error(errc::invalid_dimension, "state must have dimension m^2");
  }
  const Matrix& rho = state.matrix();
  if (std::abs(rho.trace() - cplx(1.0, 0.0)) > 1e-10) {
    throw error(errc::invalid_state, "state trace is not 1");
  }
  if (min_eigenvalue(state) < -1e-10) throw error(errc::invalid_state, "state is not PSD");
  const Matrix mixed = Matrix::Identity(m, m) / static_cast<double>(m);
  if ((partial_trace_b(rho, m) - mixed).cwiseAbs().maxCoeff() > 1e-9 ||
      (partial_trace_a(rho, m) - mixed).cwiseAbs().maxCoeff() > 1e-9) {
    throw error(errc::invalid_state, "marginals are not maximally mixed");
  }

  const StandardBasis std_basis = build_standard_basis(m);
  const Eigen::Index k = dim - 1;
  Eigen::MatrixXd corr(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      const Matrix op = Eigen::kroneckerProduct(std_basis[static_cast<std::size_t>(i + 1)],
                                                std_basis[static_cast<std::size_t>(j + 1)]);
      corr(i, j) = (op * rho).trace().real();
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(corr, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return sv(x) > sv(y); });

  std::vector<Matrix> a_el{Matrix::Identity(m, m)};
  std::vector<Matrix> b_el{Matrix::Identity(m, m)};
  std::vector<double> c{1.0};
  for (Eigen::Index col : order) {
    Matrix a = Matrix::Zero(m, m);
    Matrix b = Matrix::Zero(m, m);
    for (Eigen::Index r = 0; r < k; ++r) {
      a += svd.matrixU()(r, col) * std_basis[static_cast<std::size_t>(r + 1)];
      b += svd.matrixV()(r, col) * std_basis[static_cast<std::size_t>(r + 1)];
    }
    a_el.push_back((a + a.adjoint()) * 0.5);
    b_el.push_back((b + b.adjoint()) * 0.5);
    c.push_back(std::max(sv(col), 0.0));
  }
  if (c.size() > 1 && c[1] >= 1.0 - 1e-9) {
    throw error(errc::not_noisy, "maximal correlation is 1; state is not a noisy MES");
  }
  return NoisyMES{m, state, std::move(c), StandardBasis(m, std::move(a_el), tag + ":A"),
                  StandardBasis(m, std::move(b_el), tag + ":B")};
}

/// (1 - eps) |Psi><Psi| + eps (I/m (x) I/m), |Psi> = m^-1/2 sum_i |ii>.
inline NoisyMES depolarized_mes(int m, double eps) {
  if (m < 2) throw error(errc::invalid_dimension, "qudit dimension must be >= 2");
  if (eps == 0.0) throw error(errc::not_noisy, "eps = 0 gives maximal correlation 1");
  if (!(eps > 0.0 && eps <= 1.0)) throw error(errc::invalid_parameter, "eps must lie in (0, 1]");
  const auto dim = static_cast<Eigen::Index>(m) * m;
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
  for (int i = 0; i < m; ++i) psi(i * m + i) = 1.0 / std::sqrt(static_cast<double>(m));
  const Matrix state = (1.0 - eps) * psi * psi.adjoint() +
                       eps * Matrix::Identity(dim, dim) / static_cast<double>(dim);
  char tag[64];
  std::snprintf(tag, sizeof(tag), "depolarized:m=%d,eps=%.17g", m, eps);
  NoisyMES mes = align_bases(DenseHermitian(state), m, tag);
  if (std::abs(mes.maximal_correlation() - (1.0 - eps)) > 1e-9) {
    throw error(errc::invalid_state, "aligned maximal correlation differs from 1 - eps");
  }
  return mes;
}

/// Largest |Tr((A_i (x) B_j) state) - delta_ij c_i| over all i, j.
inline double alignment_residual(const NoisyMES& mes) {
  double worst = 0.0;
  for (std::size_t i = 0; i < mes.basis_a.size(); ++i) {
    for (std::size_t j = 0; j < mes.basis_b.size(); ++j) {
      const Matrix op = Eigen::kroneckerProduct(mes.basis_a[i], mes.basis_b[j]);
      const double v = (op * mes.state.matrix()).trace().real();
      worst = std::max(worst, std::abs(v - (i == j ? mes.c[i] : 0.0)));
    }
  }
  return worst;
}

/// sum_sigma P(sigma) Q(sigma) c_sigma = Tr((P (x) Q) state^(x)D) when P is
/// expanded in basis_a and Q in basis_b.
inline double pair_expectation(const FourierOperator& p, const FourierOperator& q,
                               const NoisyMES& mes) {
  if (p.m() != mes.m || q.m() != mes.m) throw error(errc::shape_mismatch, "qudit dimension differs");
  if (p.registers() != q.registers()) throw error(errc::shape_mismatch, "register counts differ");
  if (p.basis_tag() != mes.basis_a.tag() || q.basis_tag() != mes.basis_b.tag()) {
    throw error(errc::basis_mismatch, "operators are not expressed in the aligned bases");
  }
  double s = 0.0;
  auto qi = q.coefficients().begin();
  const auto qe = q.coefficients().end();
  for (const auto& [key, pv] : p.coefficients()) {
    while (qi != qe && qi->first < key) ++qi;
    if (qi == qe) break;
    if (qi->first == key) s += pv * qi->second * mes.correlation(p.codec(), key);
  }
  return s;
}

/// Dense route: Tr((A (x) B) state^(x)D) with A on the D Alice registers and
/// B on the D Bob registers, contracted entry by entry.
inline double tensor_power_expectation(const DenseHermitian& a, const DenseHermitian& b,
                                       const DenseHermitian& state, int m, int registers,
                                       std::size_t budget = dense_budget()) {
  const std::size_t dim = checked_power(static_cast<std::size_t>(m), registers);
  require_dense_budget(dim * dim, budget);
  if (a.dim() != dim || b.dim() != dim || state.dim() != static_cast<std::size_t>(m * m)) {
    throw error(errc::shape_mismatch, "operator dimensions do not match m^D");
  }
  const Matrix& am = a.matrix();
  const Matrix& bm = b.matrix();
  const Matrix& psi = state.matrix();
  const auto mm = static_cast<std::size_t>(m);
  auto digit = [&](std::size_t idx, int i) {
    for (int k = registers - 1; k > i; --k) idx /= mm;
    return idx % mm;
  };
  // psi_tensor[(a', b'), (a, b)] = prod_i psi[(a'_i, b'_i), (a_i, b_i)]
  cplx total(0.0, 0.0);
  for (std::size_t ar = 0; ar < dim; ++ar) {
    for (std::size_t ac = 0; ac < dim; ++ac) {
      const cplx av = am(static_cast<Eigen::Index>(ar), static_cast<Eigen::Index>(ac));
      if (av == cplx(0.0, 0.0)) continue;
      for (std::size_t br = 0; br < dim; ++br) {
        for (std::size_t bc = 0; bc < dim; ++bc) {
          const cplx bv = bm(static_cast<Eigen::Index>(br), static_cast<Eigen::Index>(bc));
          if (bv == cplx(0.0, 0.0)) continue;
          cplx prod(1.0, 0.0);
          for (int i = 0; i < registers; ++i) {
            const auto row = static_cast<Eigen::Index>(digit(ac, i) * mm + digit(bc, i));
            const auto col = static_cast<Eigen::Index>(digit(ar, i) * mm + digit(br, i));
            prod *= psi(row, col);
          }
          total += av * bv * prod;
        }
      }
    }
  }
  return total.real();
}

}  // namespace nga
