#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <vector>

#include "hbm/errors.hpp"

namespace hbm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using Complex = std::complex<double>;
using Mat2c = Eigen::Matrix2cd;

// Absolute tolerance for magnitudes up to 1, relative beyond.
inline bool within_tol(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

// Symmetric matrix. The constructor averages m with its transpose, so
// entry(i,j) == entry(j,i) holds bit-for-bit afterwards.
class SymMat {
public:
  SymMat() = default;
  explicit SymMat(const Mat& m);
  static SymMat diagonal(const Vec& d);
  static SymMat scalar(double v) { return diagonal(Vec::Constant(1, v)); }

  const Mat& mat() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  SymMat operator*(double s) const;
  SymMat operator+(const SymMat& o) const;

private:
  Mat m_;
};

struct SymEigen {
  Vec values;   // descending
  Mat vectors;  // columns, orthonormal
};

// Eigenvalues descending. Ties keep the solver's (input-derived) order, and
// each eigenvector is signed so its largest-magnitude entry is positive.
SymEigen sym_eigen(const SymMat& m);

namespace detail {
double hermitian_max_eig(const CMat& g);
double hermitian_max_eig(const Mat& g);
} // namespace detail

// Largest singular value, from the Gram matrix M M* of the smaller side.
template <typename Derived>
double spectral_norm(const Eigen::MatrixBase<Derived>& m) {
  if (!m.allFinite()) throw InvalidInput("spectral_norm: non-finite entry");
  if (m.size() == 0) return 0.0;
  using S = typename Derived::Scalar;
  using M = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  M a = m;
  M g = a.rows() <= a.cols() ? M(a * a.adjoint()) : M(a.adjoint() * a);
  return std::sqrt(std::max(0.0, detail::hermitian_max_eig(g)));
}

// max |eigenvalue| of a real square matrix.
double spectral_radius(const Mat& m);

// Builds a vector from an initializer list; handy in tests and configs.
inline Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

} // namespace hbm
