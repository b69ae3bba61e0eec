#include "hbm/avg_hessian.hpp"

#include <array>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>

namespace hbm {

namespace {

constexpr int kMinNodes = 8;
constexpr int kMaxNodes = 1 << 14;
constexpr double kQuadTol = 1e-10;

GaussLegendre build_rule(int n) {
  GaussLegendre g;
  g.nodes.resize(n);
  g.weights.resize(n);
  // Newton on P_n from the Tricomi initial guesses; roots are symmetric so
  // only half are solved.
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // map [-1, 1] -> [0, 1]
    g.nodes[i] = 0.5 * (1.0 - x);
    g.nodes[n - 1 - i] = 0.5 * (1.0 + x);
    g.weights[i] = 0.5 * w;
    g.weights[n - 1 - i] = 0.5 * w;
  }
  return g;
}

struct RuleCache {
  static constexpr int kLevels = 15;  // 1, 2, 4, ..., 2^14
  std::array<std::once_flag, kLevels> once;
  std::array<GaussLegendre, kLevels> rules;
};

RuleCache& cache() {
  static RuleCache c;
  return c;
}

AvgHessianResult finish(const Problem& p, SymMat m, double err, int nodes) {
  AvgHessianResult r;
  const SymEigen e = sym_eigen(m);
  r.matrix = std::move(m);
  r.eigenvalues = e.values;
  r.eigenvectors = e.vectors;
  r.lambda_min = e.values(e.values.size() - 1);
  r.kappa = r.lambda_min > 0 ? p.L() / r.lambda_min : std::numeric_limits<double>::infinity();
  r.quad_error_estimate = err;
  r.nodes = nodes;
  return r;
}

} // namespace

const GaussLegendre& gauss_legendre(int n) {
  if (n < 1 || n > kMaxNodes || (n & (n - 1)) != 0)
    throw InvalidInput("gauss_legendre: n must be a power of two up to 2^14");
  int level = 0;
  while ((1 << level) < n) ++level;
  RuleCache& c = cache();
  std::call_once(c.once[level], [&] { c.rules[level] = build_rule(n); });
  return c.rules[level];
}

QuadratureResult avg_hessian_quadrature(const Objective& f, const Vec& w, const Vec& opt) {
  if (w.size() != f.dim() || opt.size() != f.dim())
    throw InvalidInput("avg_hessian: vector length does not match the problem");
  if (!w.allFinite() || !opt.allFinite()) throw InvalidInput("avg_hessian: non-finite point");

  auto integrate = [&](int n) {
    const GaussLegendre& g = gauss_legendre(n);
    Mat acc = Mat::Zero(f.dim(), f.dim());
    for (int k = 0; k < n; ++k) {
      const double th = g.nodes[k];
      acc += g.weights[k] * f.hessian(th * w + (1.0 - th) * opt).mat();
    }
    return acc;
  };

  Mat prev = integrate(kMinNodes);
  double diff = std::numeric_limits<double>::infinity();
  for (int n = 2 * kMinNodes; n <= kMaxNodes; n *= 2) {
    Mat cur = integrate(n);
    diff = (cur - prev).norm();
    if (diff <= kQuadTol * std::max(1.0, cur.norm())) return {SymMat(cur), diff, n};
    prev = std::move(cur);
  }
  std::ostringstream os;
  os << "avg_hessian: quadrature did not converge with " << kMaxNodes
     << " nodes (last difference " << diff << ", last estimate " << prev << ")";
  throw NumericalFailure(os.str());
}

AvgHessianResult avg_hessian(const Problem& p, const Vec& w, const Vec& opt) {
  if (w.size() != p.dim() || opt.size() != p.dim())
    throw InvalidInput("avg_hessian: vector length does not match the problem");
  if (auto c = p.objective().avg_hessian_closed(w, opt)) return finish(p, *c, 0.0, 0);
  QuadratureResult q = avg_hessian_quadrature(p.objective(), w, opt);
  return finish(p, std::move(q.matrix), q.error_estimate, q.nodes);
}

double avg_condition(const Problem& p, const AvgHessianResult& r) {
  if (!(r.lambda_min > 0)) {
    std::ostringstream os;
    os << "avg_condition: lambda_min = " << r.lambda_min << " is not positive";
    throw AvgViolated(os.str());
  }
  return p.L() / r.lambda_min;
}

} // namespace hbm
