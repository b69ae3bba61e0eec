#include "hbm/linalg.hpp"

#include <algorithm>
#include <numeric>

namespace hbm {

SymMat::SymMat(const Mat& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("SymMat: matrix is not square");
  if (!m.allFinite()) throw InvalidInput("SymMat: non-finite entry");
  m_ = 0.5 * (m + m.transpose());
}

SymMat SymMat::diagonal(const Vec& d) {
  return SymMat(Mat(d.asDiagonal()));
}

SymMat SymMat::operator*(double s) const {
  SymMat r;
  r.m_ = m_ * s;
  return r;
}

SymMat SymMat::operator+(const SymMat& o) const {
  if (o.dim() != dim()) throw DimensionMismatch("SymMat: dimension mismatch in sum");
  SymMat r;
  r.m_ = m_ + o.m_;
  return r;
}

SymEigen sym_eigen(const SymMat& m) {
  const Mat& a = m.mat();
  if (!a.allFinite()) throw InvalidInput("sym_eigen: non-finite entry");
  const Eigen::Index n = a.rows();
  SymEigen out;
  if (n == 0) return out;

  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  if (es.info() != Eigen::Success) throw NumericalFailure("sym_eigen: solver did not converge");

  // A diagonal input keeps its coordinate order on ties, which the solver
  // alone does not promise.
  const bool diag = (a - Mat(a.diagonal().asDiagonal())).isZero(0.0);
  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  out.values.resize(n);
  out.vectors.resize(n, n);
  if (diag) {
    std::stable_sort(idx.begin(), idx.end(),
                     [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });
    for (Eigen::Index k = 0; k < n; ++k) {
      out.values(k) = a(idx[k], idx[k]);
      out.vectors.col(k) = Vec::Unit(n, idx[k]);
    }
    return out;
  }

  const Vec& ev = es.eigenvalues();
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return ev(i) > ev(j); });
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = ev(idx[k]);
    Vec u = es.eigenvectors().col(idx[k]);
    Eigen::Index imax = 0;
    u.cwiseAbs().maxCoeff(&imax);
    if (u(imax) < 0) u = -u;
    out.vectors.col(k) = u;
  }
  return out;
}

namespace detail {

namespace {

// Largest eigenvalue of a 2x2 Hermitian [[a, b], [conj(b), d]].
double max_eig_2x2(double a, double d, double abs_b) {
  const double half_gap = 0.5 * (a - d);
  return 0.5 * (a + d) + std::hypot(half_gap, abs_b);
}

} // namespace

double hermitian_max_eig(const CMat& g) {
  if (g.rows() == 1) return g(0, 0).real();
  if (g.rows() == 2) return max_eig_2x2(g(0, 0).real(), g(1, 1).real(), std::abs(g(0, 1)));
  Eigen::SelfAdjointEigenSolver<CMat> es(g, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalFailure("spectral_norm: eigen solve failed");
  return es.eigenvalues().maxCoeff();
}

double hermitian_max_eig(const Mat& g) {
  if (g.rows() == 1) return g(0, 0);
  if (g.rows() == 2) return max_eig_2x2(g(0, 0), g(1, 1), std::abs(g(0, 1)));
  Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalFailure("spectral_norm: eigen solve failed");
  return es.eigenvalues().maxCoeff();
}

} // namespace detail

double spectral_radius(const Mat& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("spectral_radius: matrix is not square");
  if (!m.allFinite()) throw InvalidInput("spectral_radius: non-finite entry");
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1) return std::abs(m(0, 0));
  if (m.rows() == 2) {
    // x^2 - tr x + det
    const double tr = m.trace();
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const double disc = 0.25 * tr * tr - det;
    if (disc < 0) return std::sqrt(std::max(0.0, det));
    const double s = std::sqrt(disc);
    return std::max(std::abs(0.5 * tr + s), std::abs(0.5 * tr - s));
  }
  Eigen::EigenSolver<Mat> es(m, false);
  if (es.info() != Eigen::Success) throw NumericalFailure("spectral_radius: eigen solve failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

} // namespace hbm
