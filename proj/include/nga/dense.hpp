#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdlib>
#include <string>
#include <vector>

#include "nga/error.hpp"

namespace nga {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

inline constexpr std::size_t kDefaultDenseBudget = 4096;

/// Largest matrix dimension any dense oracle will materialize. The
/// NGA_DENSE_BUDGET environment variable overrides the default of 4096.
inline std::size_t dense_budget() {
  if (const char* env = std::getenv("NGA_DENSE_BUDGET")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return kDefaultDenseBudget;
}

inline void require_dense_budget(std::size_t dim, std::size_t budget) {
  if (dim > budget) {
    throw error(errc::size_limit, "dense dimension " + std::to_string(dim) +
                                      " exceeds budget " + std::to_string(budget));
  }
}

/// Largest entrywise deviation |M - M^dagger|.
inline double hermitian_defect(const Matrix& m) {
  if (m.rows() != m.cols()) return INFINITY;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// A square complex matrix that is Hermitian to within 1e-10 entrywise. The
/// stored entries are symmetrized, so downstream eigensolvers see an exactly
/// Hermitian input.
class DenseHermitian {
 public:
  static constexpr double kTolerance = 1e-10;

  DenseHermitian() = default;

  explicit DenseHermitian(Matrix entries, double tolerance = kTolerance) {
    if (entries.rows() != entries.cols()) {
      throw error(errc::invalid_dimension, "matrix is not square");
    }
    if (entries.size() > 0 && hermitian_defect(entries) > tolerance) {
      throw error(errc::invalid_input, "matrix is not Hermitian within tolerance");
    }
    m_ = (entries + entries.adjoint()) * 0.5;
  }

  static DenseHermitian identity(std::size_t dim) {
    return DenseHermitian(Matrix::Identity(static_cast<Eigen::Index>(dim),
                                           static_cast<Eigen::Index>(dim)));
  }

  static DenseHermitian diagonal(const std::vector<double>& values) {
    Eigen::VectorXd d(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) d(static_cast<Eigen::Index>(i)) = values[i];
    return DenseHermitian(Matrix(d.cast<cplx>().asDiagonal()));
  }

  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  const Matrix& matrix() const noexcept { return m_; }

  DenseHermitian operator+(const DenseHermitian& o) const { return DenseHermitian(m_ + o.m_); }
  DenseHermitian operator-(const DenseHermitian& o) const { return DenseHermitian(m_ - o.m_); }
  DenseHermitian operator*(double s) const { return DenseHermitian(m_ * s); }

 private:
  Matrix m_;
};

struct Spectrum {
  Eigen::VectorXd values;  // ascending
  Matrix vectors;
};

inline Spectrum eigen_decompose(const DenseHermitian& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m.matrix());
  if (solver.info() != Eigen::Success) {
    throw error(errc::invalid_input, "eigendecomposition failed");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline Eigen::VectorXd eigenvalues(const DenseHermitian& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw error(errc::invalid_input, "eigendecomposition failed");
  }
  return solver.eigenvalues();
}

/// Sum of squared negative eigenvalues (un-normalized). Divide by the matrix
/// dimension for the normalized distance.
inline double zeta_trace(const DenseHermitian& m) {
  double s = 0.0;
  for (double lambda : eigenvalues(m)) {
    if (lambda < 0.0) s += lambda * lambda;
  }
  return s;
}

inline double zeta_trace(const Matrix& m) { return zeta_trace(DenseHermitian(m)); }

/// Projection onto the PSD cone: eigenvalues clamped at zero.
inline DenseHermitian positive_part(const DenseHermitian& m) {
  const Spectrum s = eigen_decompose(m);
  const Eigen::VectorXd clamped = s.values.cwiseMax(0.0);
  return DenseHermitian(s.vectors * clamped.cast<cplx>().asDiagonal() * s.vectors.adjoint());
}

/// ((1/dim) * sum_i s_i^p)^(1/p) over singular values.
inline double normalized_p_norm(const DenseHermitian& m, double p) {
  if (!(p >= 1.0)) throw error(errc::invalid_parameter, "p must be >= 1");
  if (m.dim() == 0) return 0.0;
  double s = 0.0;
  for (double lambda : eigenvalues(m)) s += std::pow(std::abs(lambda), p);
  return std::pow(s / static_cast<double>(m.dim()), 1.0 / p);
}

inline double frobenius_sq(const Matrix& m) { return m.squaredNorm(); }

/// Smallest eigenvalue; PSD checks compare it against a tolerance.
inline double min_eigenvalue(const DenseHermitian& m) {
  const Eigen::VectorXd ev = eigenvalues(m);
  return ev.size() ? ev(0) : 0.0;
}

}  // namespace nga
