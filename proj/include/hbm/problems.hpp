#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "hbm/linalg.hpp"

namespace hbm {

// A twice-differentiable function with analytic derivatives. Terms that are
// not problems in their own right (the rough part of a sum, a zero function)
// are plain objectives.
class Objective {
public:
  virtual ~Objective() = default;
  virtual Eigen::Index dim() const = 0;
  virtual double value(const Vec& w) const = 0;
  virtual Vec gradient(const Vec& w) const = 0;
  virtual SymMat hessian(const Vec& w) const = 0;

  // Global bounds on the gradient and Hessian Lipschitz constants. Only
  // used when composing sums.
  virtual double grad_lipschitz() const = 0;
  virtual double hess_lipschitz() const = 0;

  // Integral of the Hessian along the segment opt -> w when it has a closed
  // form; nullopt sends the caller to quadrature.
  virtual std::optional<SymMat> avg_hessian_closed(const Vec& w, const Vec& opt) const;
};

using ObjectivePtr = std::shared_ptr<const Objective>;

enum class ProblemKind { Quadratic, Sin2, DiagNet, Sum };

// An objective together with a known global minimizer and its constants.
// Immutable; copies share the underlying objective.
class Problem {
public:
  Problem() = default;
  Problem(std::string name, ProblemKind kind, ObjectivePtr f, Vec optimum, double L, double L_H,
          double mu, std::optional<double> lambda_star);

  const std::string& name() const { return name_; }
  ProblemKind kind() const { return kind_; }
  Eigen::Index dim() const { return f_ ? f_->dim() : 0; }
  const Objective& objective() const { return *f_; }
  const ObjectivePtr& objective_ptr() const { return f_; }
  const Vec& optimum() const { return optimum_; }
  double f_opt() const { return f_opt_; }
  double L() const { return L_; }
  double L_H() const { return L_H_; }
  double mu() const { return mu_; }
  const std::optional<double>& lambda_star() const { return lambda_star_; }

  // Construction parameters, kept so runs can be written out and replayed.
  const std::map<std::string, double>& scalars() const { return scalars_; }
  const std::map<std::string, Vec>& vectors() const { return vectors_; }
  Problem with_params(std::map<std::string, double> s, std::map<std::string, Vec> v) const;

private:
  std::string name_;
  ProblemKind kind_ = ProblemKind::Quadratic;
  ObjectivePtr f_;
  Vec optimum_;
  double f_opt_ = 0.0;
  double L_ = 0.0;
  double L_H_ = 0.0;
  double mu_ = 0.0;
  std::optional<double> lambda_star_;
  std::map<std::string, double> scalars_;
  std::map<std::string, Vec> vectors_;
};

double eval(const Problem& p, const Vec& w);
Vec grad(const Problem& p, const Vec& w);
SymMat hess(const Problem& p, const Vec& w);

// 0.5 w'Mw + b'w with M symmetric positive definite.
Problem make_quadratic(const Mat& M, const Vec& b);
inline Problem make_quadratic(const Mat& M) { return make_quadratic(M, Vec::Zero(M.rows())); }

// w^2 + alpha sin^2(w), one-dimensional. Requires 0 < alpha < 2/0.46 so that
// lambda_star = 2 - 0.46 alpha stays positive.
Problem make_sin2(double alpha);

// (1/N^2) ||u^N - w_star||^2 on the ball ||u||_inf <= R. Constants are valid
// on the part of that ball where branch*u_i >= floor for every i; branch
// selects the global minimizer +-w_star^(1/N) (only +1 for odd N).
Problem make_diag_net(int N, const Vec& w_star, double R, double floor, int branch = 1);

// Pointwise PL constant of sin2: lambda(w)^2 / L
// with lambda(w) the average Hessian at w. The problem's mu() is the global
// lower bound (2 - 0.46 alpha)^2 / (2 + 2 alpha).
double sin2_pointwise_mu(double alpha, double w);

// Terms for make_sum_problem.
ObjectivePtr quadratic_term(const Mat& M, const Vec& b);
ObjectivePtr sin2_term(double alpha, Eigen::Index dim = 1);
ObjectivePtr zero_term(Eigen::Index dim);

// strong + rough where strong is a quadratic with lambda_min(M) = 2 lambda
// and every average Hessian of rough (toward strong's minimizer) has
// lambda_min >= -lambda. Both conditions are checked, the second on a grid
// (d = 1) or 2000 seeded samples (d > 1) in [-10, 10]^d.
Problem make_sum_problem(const Problem& strong, const ObjectivePtr& rough);

// sin(2w)/w with the removable singularity handled by its series.
double sin2w_over_w(double w);

} // namespace hbm
