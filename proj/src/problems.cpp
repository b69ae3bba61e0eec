#include "hbm/problems.hpp"

#include <limits>
#include <random>
#include <sstream>

#include "hbm/avg_hessian.hpp"

namespace hbm {

std::optional<SymMat> Objective::avg_hessian_closed(const Vec&, const Vec&) const {
  return std::nullopt;
}

namespace {

void check_dim(const Objective& f, const Vec& w) {
  if (w.size() != f.dim()) {
    std::ostringstream os;
    os << "expected a vector of length " << f.dim() << ", got " << w.size();
    throw InvalidInput(os.str());
  }
}

class QuadraticObjective final : public Objective {
public:
  QuadraticObjective(SymMat M, Vec b) : M_(std::move(M)), b_(std::move(b)) {}
  Eigen::Index dim() const override { return M_.dim(); }
  double value(const Vec& w) const override { return 0.5 * w.dot(M_.mat() * w) + b_.dot(w); }
  Vec gradient(const Vec& w) const override { return M_.mat() * w + b_; }
  SymMat hessian(const Vec&) const override { return M_; }
  double grad_lipschitz() const override { return spectral_norm(M_.mat()); }
  double hess_lipschitz() const override { return 0.0; }
  std::optional<SymMat> avg_hessian_closed(const Vec&, const Vec&) const override { return M_; }
  const SymMat& M() const { return M_; }

private:
  SymMat M_;
  Vec b_;
};

// alpha * sum_i sin^2(w_i), optionally plus sum_i w_i^2.
class Sin2Objective final : public Objective {
public:
  Sin2Objective(double alpha, Eigen::Index d, bool with_square)
      : alpha_(alpha), d_(d), sq_(with_square ? 1.0 : 0.0) {}
  Eigen::Index dim() const override { return d_; }
  double value(const Vec& w) const override {
    return sq_ * w.squaredNorm() + alpha_ * w.array().sin().square().sum();
  }
  Vec gradient(const Vec& w) const override {
    return 2.0 * sq_ * w.array() + alpha_ * (2.0 * w.array()).sin();
  }
  SymMat hessian(const Vec& w) const override {
    return SymMat::diagonal((2.0 * sq_ + 2.0 * alpha_ * (2.0 * w.array()).cos()).matrix());
  }
  double grad_lipschitz() const override { return 2.0 * sq_ + 2.0 * alpha_; }
  double hess_lipschitz() const override { return 4.0 * alpha_; }
  std::optional<SymMat> avg_hessian_closed(const Vec& w, const Vec& opt) const override {
    if (!opt.isZero(0.0)) return std::nullopt;
    Vec d(d_);
    for (Eigen::Index i = 0; i < d_; ++i) d(i) = 2.0 * sq_ + alpha_ * sin2w_over_w(w(i));
    return SymMat::diagonal(d);
  }

private:
  double alpha_;
  Eigen::Index d_;
  double sq_;
};

class ZeroObjective final : public Objective {
public:
  explicit ZeroObjective(Eigen::Index d) : d_(d) {}
  Eigen::Index dim() const override { return d_; }
  double value(const Vec&) const override { return 0.0; }
  Vec gradient(const Vec&) const override { return Vec::Zero(d_); }
  SymMat hessian(const Vec&) const override { return SymMat(Mat::Zero(d_, d_)); }
  double grad_lipschitz() const override { return 0.0; }
  double hess_lipschitz() const override { return 0.0; }
  std::optional<SymMat> avg_hessian_closed(const Vec&, const Vec&) const override {
    return SymMat(Mat::Zero(d_, d_));
  }

private:
  Eigen::Index d_;
};

class DiagNetObjective final : public Objective {
public:
  DiagNetObjective(int N, Vec w_star, double L, double L_H)
      : N_(N), w_(std::move(w_star)), L_(L), L_H_(L_H) {}
  Eigen::Index dim() const override { return w_.size(); }
  double value(const Vec& u) const override {
    return (u.array().pow(N_) - w_.array()).square().sum() / (double(N_) * N_);
  }
  Vec gradient(const Vec& u) const override {
    return (2.0 / N_) * (u.array().pow(N_) - w_.array()) * u.array().pow(N_ - 1);
  }
  SymMat hessian(const Vec& u) const override {
    const double n = N_;
    Eigen::ArrayXd h = 2.0 * (2.0 * n - 1.0) / n * u.array().pow(2 * N_ - 2) -
                       2.0 * (n - 1.0) / n * u.array().pow(N_ - 2) * w_.array();
    return SymMat::diagonal(h.matrix());
  }
  double grad_lipschitz() const override { return L_; }
  double hess_lipschitz() const override { return L_H_; }
  std::optional<SymMat> avg_hessian_closed(const Vec& u, const Vec& opt) const override {
    if (N_ != 2) return std::nullopt;
    // u^2 + u*uhat needs uhat^2 == w_star.
    for (Eigen::Index i = 0; i < w_.size(); ++i) {
      if (std::abs(opt(i) * opt(i) - w_(i)) > 1e-12 * std::max(1.0, w_(i))) return std::nullopt;
    }
    return SymMat::diagonal((u.array().square() + u.array() * opt.array()).matrix());
  }

private:
  int N_;
  Vec w_;
  double L_;
  double L_H_;
};

class SumObjective final : public Objective {
public:
  SumObjective(ObjectivePtr a, ObjectivePtr b) : a_(std::move(a)), b_(std::move(b)) {}
  Eigen::Index dim() const override { return a_->dim(); }
  double value(const Vec& w) const override { return a_->value(w) + b_->value(w); }
  Vec gradient(const Vec& w) const override { return a_->gradient(w) + b_->gradient(w); }
  SymMat hessian(const Vec& w) const override { return a_->hessian(w) + b_->hessian(w); }
  double grad_lipschitz() const override { return a_->grad_lipschitz() + b_->grad_lipschitz(); }
  double hess_lipschitz() const override { return a_->hess_lipschitz() + b_->hess_lipschitz(); }
  std::optional<SymMat> avg_hessian_closed(const Vec& w, const Vec& opt) const override {
    auto ha = a_->avg_hessian_closed(w, opt);
    auto hb = b_->avg_hessian_closed(w, opt);
    if (!ha || !hb) return std::nullopt;
    return *ha + *hb;
  }

private:
  ObjectivePtr a_;
  ObjectivePtr b_;
};

} // namespace

Problem::Problem(std::string name, ProblemKind kind, ObjectivePtr f, Vec optimum, double L,
                 double L_H, double mu, std::optional<double> lambda_star)
    : name_(std::move(name)), kind_(kind), f_(std::move(f)), optimum_(std::move(optimum)), L_(L),
      L_H_(L_H), mu_(mu), lambda_star_(lambda_star) {
  if (!f_) throw InvalidInput("Problem: missing objective");
  if (optimum_.size() != f_->dim()) throw DimensionMismatch("Problem: optimum has wrong length");
  if (!(L_ > 0)) throw ParameterError("Problem: L must be positive");
  if (!(L_H_ >= 0)) throw ParameterError("Problem: L_H must be non-negative");
  if (!(mu_ > 0 && mu_ <= L_)) throw ParameterError("Problem: need 0 < mu <= L");
  if (lambda_star_ && !(*lambda_star_ > 0 && *lambda_star_ <= L_ * (1 + 1e-12)))
    throw ParameterError("Problem: need 0 < lambda_star <= L");
  const double g = f_->gradient(optimum_).norm();
  if (!(g <= 1e-10)) {
    std::ostringstream os;
    os << "Problem: gradient norm at the optimum is " << g;
    throw ParameterError(os.str());
  }
  f_opt_ = f_->value(optimum_);
}

Problem Problem::with_params(std::map<std::string, double> s, std::map<std::string, Vec> v) const {
  Problem p = *this;
  p.scalars_ = std::move(s);
  p.vectors_ = std::move(v);
  return p;
}

double eval(const Problem& p, const Vec& w) {
  check_dim(p.objective(), w);
  return p.objective().value(w);
}

Vec grad(const Problem& p, const Vec& w) {
  check_dim(p.objective(), w);
  return p.objective().gradient(w);
}

SymMat hess(const Problem& p, const Vec& w) {
  check_dim(p.objective(), w);
  return p.objective().hessian(w);
}

double sin2w_over_w(double w) {
  if (std::abs(w) < 1e-8) return 2.0 - (4.0 / 3.0) * w * w;
  return std::sin(2.0 * w) / w;
}

double sin2_pointwise_mu(double alpha, double w) {
  const double h = 2.0 + alpha * sin2w_over_w(w);
  return h * h / (2.0 + 2.0 * alpha);
}

ObjectivePtr quadratic_term(const Mat& M, const Vec& b) {
  if (b.size() != M.rows()) throw DimensionMismatch("quadratic: b has wrong length");
  if (!b.allFinite()) throw InvalidInput("quadratic: non-finite b");
  return std::make_shared<QuadraticObjective>(SymMat(M), b);
}

ObjectivePtr sin2_term(double alpha, Eigen::Index dim) {
  if (!std::isfinite(alpha) || dim < 1) throw ParameterError("sin2_term: bad parameters");
  return std::make_shared<Sin2Objective>(alpha, dim, false);
}

ObjectivePtr zero_term(Eigen::Index dim) {
  if (dim < 1) throw ParameterError("zero_term: dimension must be positive");
  return std::make_shared<ZeroObjective>(dim);
}

Problem make_quadratic(const Mat& M, const Vec& b) {
  auto f = std::make_shared<QuadraticObjective>(SymMat(M), b);
  if (b.size() != M.rows()) throw DimensionMismatch("quadratic: b has wrong length");
  const SymEigen e = sym_eigen(f->M());
  const double lmin = e.values(e.values.size() - 1);
  const double lmax = e.values(0);
  if (!(lmin > 0)) throw ParameterError("quadratic: M must be positive definite");
  Vec opt = f->M().mat().ldlt().solve(-b);
  Problem p("quadratic", ProblemKind::Quadratic, f, opt, lmax, 0.0, lmin, lmin);
  Eigen::Map<const Vec> flat(f->M().mat().data(), f->M().mat().size());
  return p.with_params({}, {{"M", Vec(flat)}, {"b", b}});
}

Problem make_sin2(double alpha) {
  const double lambda_star = 2.0 - 0.46 * alpha;
  if (!(alpha > 0) || !(lambda_star > 0))
    throw ParameterError("sin2: alpha must lie in (0, 2/0.46)");
  auto f = std::make_shared<Sin2Objective>(alpha, 1, true);
  const double L = 2.0 + 2.0 * alpha;
  Problem p("sin2", ProblemKind::Sin2, f, Vec::Zero(1), L, 4.0 * alpha, lambda_star * lambda_star / L,
            lambda_star);
  return p.with_params({{"alpha", alpha}}, {});
}

Problem make_diag_net(int N, const Vec& w_star, double R, double floor, int branch) {
  if (N < 2) throw ParameterError("diag-net: N must be at least 2");
  if (branch != 1 && branch != -1) throw ParameterError("diag-net: branch must be +1 or -1");
  if (branch == -1 && N % 2 == 1) throw ParameterError("diag-net: odd N has no negative branch");
  if (w_star.size() < 1 || !(w_star.array() > 0).all() || !w_star.allFinite())
    throw ParameterError("diag-net: w_star entries must be positive");
  Vec uhat = branch * w_star.array().pow(1.0 / N);
  if (N == 2) uhat = branch * w_star.array().sqrt();
  const double umin = uhat.cwiseAbs().minCoeff();
  const double umax = uhat.cwiseAbs().maxCoeff();
  if (!(R >= umax)) throw ParameterError("diag-net: radius R must contain the optimum");
  if (!(floor > 0 && floor < umin))
    throw ParameterError("diag-net: region floor must lie in (0, min |uhat_i|)");

  const double n = N;
  const double wmax = w_star.maxCoeff();
  const double L = std::max(2.0 * (2.0 * n - 1.0) / n * std::pow(R, 2 * N - 2),
                            2.0 * (n - 1.0) / n * std::pow(R, N - 2) * wmax);
  double L_H = 2.0 * (2.0 * n - 1.0) * (2.0 * n - 2.0) / n * std::pow(R, 2 * N - 3);
  if (N > 2) L_H += 2.0 * (n - 1.0) * (n - 2.0) / n * std::pow(R, N - 3) * wmax;
  const double mu = 2.0 * std::pow(floor, 2 * N - 2);
  // lambda_i(u) = (2/N) u^{N-1} sum_k u^k uhat^{N-1-k}, increasing in |u|, so
  // the smallest value over the region sits at |u| = floor.
  double lambda_star = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < w_star.size(); ++i) {
    const double h = std::abs(uhat(i));
    double s = 0.0;
    for (int k = 0; k < N; ++k) s += std::pow(floor, k) * std::pow(h, N - 1 - k);
    lambda_star = std::min(lambda_star, 2.0 / n * std::pow(floor, N - 1) * s);
  }
  auto f = std::make_shared<DiagNetObjective>(N, w_star, L, L_H);
  Problem p("diagnet", ProblemKind::DiagNet, f, uhat, L, L_H, mu, lambda_star);
  return p.with_params({{"N", n}, {"R", R}, {"floor", floor}, {"branch", double(branch)}},
                       {{"w_star", w_star}});
}

Problem make_sum_problem(const Problem& strong, const ObjectivePtr& rough) {
  if (!rough) throw InvalidInput("sum: missing rough term");
  if (strong.kind() != ProblemKind::Quadratic)
    throw ConstraintError("sum: the strong part must be a quadratic");
  if (rough->dim() != strong.dim()) throw DimensionMismatch("sum: parts differ in dimension");
  const Eigen::Index d = strong.dim();
  const double lambda = 0.5 * strong.mu();  // mu() is lambda_min(M) for quadratics

  auto f = std::make_shared<SumObjective>(strong.objective_ptr(), rough);
  const Vec& opt = strong.optimum();
  const double g = f->gradient(opt).norm();
  if (!(g <= 1e-10)) {
    std::ostringstream os;
    os << "sum: rough term moves the minimizer (gradient " << g << " at the strong optimum)";
    throw ConstraintError(os.str());
  }

  auto check_point = [&](const Vec& w) {
    SymMat h;
    if (auto c = rough->avg_hessian_closed(w, opt)) {
      h = *c;
    } else {
      h = avg_hessian_quadrature(*rough, w, opt).matrix;
    }
    const SymEigen e = sym_eigen(h);
    const double lo = e.values(d - 1);
    if (lo < -lambda - 1e-12) {
      std::ostringstream os;
      os << "sum: rough average Hessian reaches " << lo << " < -" << lambda << " at w = "
         << w.transpose();
      throw ConstraintError(os.str());
    }
  };
  if (d == 1) {
    for (int k = 0; k <= 2000; ++k) check_point(Vec::Constant(1, -10.0 + 0.01 * k));
  } else {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int k = 0; k < 2000; ++k) {
      Vec w(d);
      for (Eigen::Index i = 0; i < d; ++i) w(i) = u(rng);
      check_point(w);
    }
  }

  const double L = f->grad_lipschitz();
  const double L_H = f->hess_lipschitz();
  // AVG(lambda) gives PL with lambda^2 / L.
  Problem p("sum", ProblemKind::Sum, f, opt, L, L_H, lambda * lambda / L, lambda);
  return p.with_params({{"lambda_star", lambda}}, {});
}

} // namespace hbm
