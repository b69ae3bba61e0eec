#pragma once

#include <vector>

#include "hbm/problems.hpp"

namespace hbm {

struct AvgHessianResult {
  SymMat matrix;
  Vec eigenvalues;   // descending
  Mat eigenvectors;  // matching columns
  double lambda_min = 0.0;
  double kappa = 0.0;  // L / lambda_min, +inf when lambda_min <= 0
  double quad_error_estimate = 0.0;
  int nodes = 0;  // 0 for closed forms
};

// H_f(w) = int_0^1 hess(theta w + (1 - theta) opt) dtheta, by closed form
// when the objective has one and Gauss-Legendre quadrature otherwise.
AvgHessianResult avg_hessian(const Problem& p, const Vec& w, const Vec& opt);
inline AvgHessianResult avg_hessian(const Problem& p, const Vec& w) {
  return avg_hessian(p, w, p.optimum());
}

struct QuadratureResult {
  SymMat matrix;
  double error_estimate = 0.0;
  int nodes = 0;
};

// Node count doubles from 8 until two successive estimates agree to 1e-10
// (relative once the Frobenius norm exceeds 1). Gives up past 2^14 nodes.
QuadratureResult avg_hessian_quadrature(const Objective& f, const Vec& w, const Vec& opt);

double avg_condition(const Problem& p, const AvgHessianResult& r);

struct GaussLegendre {
  std::vector<double> nodes;    // on [0, 1]
  std::vector<double> weights;  // sum to 1
};

// Rule with n points, cached per power of two.
const GaussLegendre& gauss_legendre(int n);

} // namespace hbm
