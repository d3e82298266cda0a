#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "nga/dense.hpp"
#include "nga/error.hpp"

namespace nga {

inline constexpr const char* kGellMannTag = "gell-mann";

/// Hermitian m x m matrices {B_0 = I, B_1, ..., B_{m^2-1}} orthonormal under
/// <P, Q> = (1/m) Tr(P^dagger Q).
class StandardBasis {
 public:
  static constexpr double kTolerance = 1e-12;

  struct Entry {
    int row;
    int col;
    cplx value;
  };

  StandardBasis() = default;

  /// Validates all invariants; throws invalid-input when any fails.
  StandardBasis(int m, std::vector<Matrix> elements, std::string tag)
      : m_(m), elements_(std::move(elements)), tag_(std::move(tag)) {
    if (m < 2) throw error(errc::invalid_dimension, "basis dimension must be >= 2");
    const std::size_t count = static_cast<std::size_t>(m) * static_cast<std::size_t>(m);
    if (elements_.size() != count) {
      throw error(errc::invalid_input, "basis must have m^2 elements");
    }
    for (const Matrix& b : elements_) {
      if (b.rows() != m || b.cols() != m) {
        throw error(errc::invalid_dimension, "basis element has wrong shape");
      }
      if (hermitian_defect(b) > kTolerance) {
        throw error(errc::invalid_input, "basis element is not Hermitian");
      }
    }
    if ((elements_[0] - Matrix::Identity(m, m)).cwiseAbs().maxCoeff() > kTolerance) {
      throw error(errc::invalid_input, "basis element 0 must be the identity");
    }
    const Eigen::MatrixXd g = gram();
    if ((g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() > kTolerance) {
      throw error(errc::invalid_input, "basis is not orthonormal");
    }
    nonzeros_.resize(count);
    for (std::size_t s = 0; s < count; ++s) {
      for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
          const cplx v = elements_[s](r, c);
          if (v != cplx(0.0, 0.0)) nonzeros_[s].push_back({r, c, v});
        }
      }
    }
  }

  int m() const noexcept { return m_; }
  std::size_t size() const noexcept { return elements_.size(); }
  const std::string& tag() const noexcept { return tag_; }
  const Matrix& operator[](std::size_t i) const { return elements_.at(i); }
  const std::vector<Matrix>& elements() const noexcept { return elements_; }

  /// Nonzero entries of element i, row-major.
  const std::vector<Entry>& nonzeros(std::size_t i) const { return nonzeros_.at(i); }

  /// G_ij = (1/m) Tr(B_i B_j), real for Hermitian elements.
  Eigen::MatrixXd gram() const {
    const auto n = static_cast<Eigen::Index>(elements_.size());
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        g(i, j) = (elements_[static_cast<std::size_t>(i)] * elements_[static_cast<std::size_t>(j)])
                      .trace()
                      .real() /
                  m_;
      }
    }
    return g;
  }

 private:
  int m_ = 0;
  std::vector<Matrix> elements_;
  std::string tag_;
  std::vector<std::vector<Entry>> nonzeros_;
};

/// Identity followed by generalized Gell-Mann matrices scaled by sqrt(m/2):
/// symmetric pairs (j<k, lexicographic), antisymmetric pairs, then the m-1
/// diagonal generators. For m = 2 this yields {I, X, Y, Z}.
inline StandardBasis build_standard_basis(int m) {
  if (m < 2) throw error(errc::invalid_dimension, "qudit dimension must be >= 2");
  const double scale = std::sqrt(m / 2.0);
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(m * m));
  out.push_back(Matrix::Identity(m, m));
  for (int j = 0; j < m; ++j) {
    for (int k = j + 1; k < m; ++k) {
      Matrix b = Matrix::Zero(m, m);
      b(j, k) = scale;
      b(k, j) = scale;
      out.push_back(std::move(b));
    }
  }
  for (int j = 0; j < m; ++j) {
    for (int k = j + 1; k < m; ++k) {
      Matrix b = Matrix::Zero(m, m);
      b(j, k) = cplx(0.0, -scale);
      b(k, j) = cplx(0.0, scale);
      out.push_back(std::move(b));
    }
  }
  for (int l = 1; l < m; ++l) {
    Matrix b = Matrix::Zero(m, m);
    const double norm = scale * std::sqrt(2.0 / (l * (l + 1.0)));
    for (int i = 0; i < l; ++i) b(i, i) = norm;
    b(l, l) = -l * norm;
    out.push_back(std::move(b));
  }
  return StandardBasis(m, std::move(out), kGellMannTag);
}

}  // namespace nga
