#include "hbm/verify.hpp"

#include <algorithm>
#include <functional>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "hbm/avg_hessian.hpp"
#include "hbm/optimizers.hpp"
#include "hbm/rate_analysis.hpp"

namespace hbm {

namespace {

std::string fmt(double x, int prec = 6) {
  std::ostringstream os;
  os << std::setprecision(prec) << x;
  return os.str();
}

Mat companion(double eta_lambda, double beta) {
  return build_A(SymMat::scalar(eta_lambda), beta);
}

} // namespace

CheckResult check_counterexample() {
  const Mat A = companion(0.1, 0.9);
  const double rho = spectral_radius(A);
  const double nrm = spectral_norm(A);
  const double gap = nrm - rho;
  CheckResult r;
  r.name = "counterexample";
  r.observed = gap;
  r.expected = 1.25;
  r.tolerance = 0.02;
  const bool rho_ok = std::abs(rho - 0.9487) <= 1e-3;
  const bool norm_ok = std::abs(nrm - 2.21) <= 0.01;
  r.passed = rho_ok && norm_ok && std::abs(gap - 1.25) <= 0.02;
  r.detail = "rho = " + fmt(rho, 12) + " (0.9487 +- 1e-3), norm = " + fmt(nrm, 12) +
             " (2.21 +- 0.01), gap = " + fmt(gap, 12);
  return r;
}

CheckResult check_norm_ge_one(int samples, std::uint64_t seed) {
  if (samples < 1) throw InvalidInput("check_norm_ge_one: samples must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::pair<double, double>> cases = {{0.1, 0.9}, {0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}};
  for (int k = 0; k < samples; ++k) cases.emplace_back(u(rng), u(rng));
  double worst = std::numeric_limits<double>::infinity();
  std::pair<double, double> at{0, 0};
  for (auto [el, b] : cases) {
    const double n = spectral_norm(companion(el, b));
    if (n < worst) {
      worst = n;
      at = {el, b};
    }
  }
  CheckResult r;
  r.name = "norm_ge_one";
  r.observed = worst;
  r.expected = 1.0;
  r.tolerance = 1e-10;
  r.passed = worst >= 1.0 - 1e-10;
  r.detail = std::to_string(cases.size()) + " matrices, minimum at eta*lambda = " + fmt(at.first) +
             ", beta = " + fmt(at.second);
  return r;
}

CheckResult check_block_decomposition(int samples, std::uint64_t seed) {
  if (samples < 1) throw InvalidInput("check_block_decomposition: samples must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_mod = 0.0;
  double worst_rec = 0.0;
  int invalid = 0;
  for (int k = 0; k < samples; ++k) {
    const double lambda = 1.0 - u(rng);  // (0, 1]
    const double lo = std::pow(1.0 - std::sqrt(lambda), 2);
    const double beta = 1.0 - (1.0 - lo) * u(rng);  // (lo, 1]
    const SymMat H = SymMat::scalar(lambda);
    const BlockSpectrum s = decompose(H, beta);
    if (!s.valid) {
      ++invalid;
      continue;
    }
    worst_mod = std::max(worst_mod, std::abs(std::abs(s.blocks[0].z) - std::sqrt(beta)));
    const CMat diff = reconstruct(s) - build_A(H, beta).cast<Complex>();
    worst_rec = std::max(worst_rec, diff.norm());
  }
  int rejected = 0;
  const double boundary[] = {0.04, 0.25, 0.5, 0.81, 1.0};
  for (double lambda : boundary) {
    const double beta = std::pow(1.0 - std::sqrt(lambda), 2);
    if (!decompose(SymMat::scalar(lambda), beta).valid) ++rejected;
  }
  CheckResult r;
  r.name = "block_decomposition";
  r.observed = worst_rec;
  r.expected = 0.0;
  r.tolerance = 1e-10;
  r.passed = invalid == 0 && worst_mod <= 1e-12 && worst_rec <= 1e-10 && rejected == 5;
  r.detail = "max ||z| - sqrt(beta)| = " + fmt(worst_mod, 3) + ", max reconstruction residual = " +
             fmt(worst_rec, 3) + ", invalid samples = " + std::to_string(invalid) +
             ", boundary inputs rejected = " + std::to_string(rejected) + "/5";
  return r;
}

CheckResult check_avg_implies_pl(const Problem& p, int points, bool improved, std::uint64_t seed) {
  if (points < 1) throw InvalidInput("check_avg_implies_pl: points must be positive");
  const Eigen::Index d = p.dim();
  std::mt19937_64 rng(seed);
  std::vector<Vec> xs;
  std::string region;
  if (p.kind() == ProblemKind::Sin2) {
    region = "grid on [-10, 10]";
    for (int k = 0; k < points; ++k)
      xs.push_back(Vec::Constant(1, -10.0 + 20.0 * k / std::max(1, points - 1)));
  } else if (p.kind() == ProblemKind::DiagNet) {
    const double hi = 2.0 * std::sqrt(p.vectors().at("w_star").maxCoeff());
    const double branch = p.scalars().at("branch");
    region = "branch * (0, " + fmt(hi) + "]^" + std::to_string(d);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < points; ++k) {
      Vec w(d);
      for (Eigen::Index i = 0; i < d; ++i) w(i) = branch * hi * (1.0 - u(rng));
      xs.push_back(w);
    }
  } else {
    region = "[-10, 10]^" + std::to_string(d);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int k = 0; k < points; ++k) {
      Vec w(d);
      for (Eigen::Index i = 0; i < d; ++i) w(i) = u(rng);
      xs.push_back(w);
    }
  }

  int skipped = 0, evaluated = 0, held = 0;
  double worst = 0.0;
  Vec worst_at;
  for (const Vec& w : xs) {
    const double lw = avg_hessian(p, w).lambda_min;
    if (!(lw > 0)) {
      ++skipped;
      continue;
    }
    ++evaluated;
    const double mu = improved ? lw : lw * lw / p.L();
    const double g2 = grad(p, w).squaredNorm();
    const double gap = eval(p, w) - p.f_opt();
    const double need = 2.0 * mu * gap;
    if (g2 >= need - 1e-10) {
      ++held;
    } else if (need - g2 > worst) {
      worst = need - g2;
      worst_at = w;
    }
  }
  if (skipped * 10 > points) {
    throw Inconclusive("check_avg_implies_pl: " + std::to_string(skipped) + " of " +
                       std::to_string(points) + " samples have lambda_min <= 0");
  }
  CheckResult r;
  r.name = std::string(improved ? "pl_improved_" : "pl_basic_") + p.name();
  r.observed = evaluated > 0 ? double(held) / evaluated : 0.0;
  r.expected = 1.0;
  r.tolerance = 1e-3;
  r.passed = evaluated > 0 && r.observed >= 1.0 - 1e-3;
  std::ostringstream os;
  os << held << "/" << evaluated << " points hold (" << skipped << " skipped), region " << region
     << ", mu_w = " << (improved ? "lambda_w" : "lambda_w^2 / L");
  if (worst_at.size() > 0)
    os << "; largest shortfall " << fmt(worst, 4) << " at w = " << worst_at.transpose().format(Eigen::IOFormat(6, Eigen::DontAlignCols, " ", " "));
  r.detail = os.str();
  return r;
}

CheckResult check_sin_bound(double grid_step) {
  if (!(grid_step > 0 && grid_step <= 1e-3)) throw InvalidInput("check_sin_bound: grid step must lie in (0, 1e-3]");
  const long n = std::lround(200.0 / grid_step);
  double lo = std::numeric_limits<double>::infinity();
  double at = 0.0;
  for (long k = 0; k <= n; ++k) {
    const double x = -100.0 + k * grid_step;
    if (std::abs(x) < 1e-8) continue;
    const double g = std::sin(2.0 * x) / x;
    if (g < lo) {
      lo = g;
      at = x;
    }
  }
  CheckResult r;
  r.name = "sin_bound";
  r.observed = lo;
  r.expected = -0.46;
  r.tolerance = 0.0;
  r.passed = lo >= -0.46;
  r.detail = "grid minimum " + fmt(lo, 10) + " at x = " + fmt(at, 8) + ", step " + fmt(grid_step);
  return r;
}

double containment_beta_cap(double alpha, double L, double c_eta, double c_tilde, double c_mu) {
  const double a2 = alpha * alpha;
  const double x = 1.0 - 2.0 * c_eta * c_eta * c_tilde * a2 / L;
  const double y = 1.0 - 4.0 * c_mu * 2.0 * a2 / L;
  if (!(x > 0 && y > 0)) throw ParameterError("containment_beta_cap: alpha too large for L");
  return std::sqrt(x * y);
}

CheckResult check_stay_region(double alpha, const Vec& w_star, int iters, int branch,
                              StaySchedule schedule) {
  if (!(w_star.array() > 0).all()) throw ParameterError("check_stay_region: w_star must be positive");
  if (!(alpha > 0 && alpha < std::sqrt(w_star.minCoeff())))
    throw ParameterError("check_stay_region: need 0 < alpha < min sqrt(w_star)");
  const double wmax = w_star.maxCoeff();
  const double L = 6.0 * wmax;
  const double R = std::sqrt(2.0 * wmax);  // 3 R^2 = L
  const Problem p = make_diag_net(2, w_star, R, alpha, branch);
  const double cap = containment_beta_cap(alpha, L);

  RunConfig cfg;
  cfg.problem = p;
  cfg.algo = Algo::HB_v1;
  cfg.eta = 1.0 / L;
  cfg.iters = iters;
  cfg.init = Vec::Constant(w_star.size(), branch * alpha);
  if (schedule == StaySchedule::AdaptiveCapped) {
    cfg.schedule = MomentumSchedule::adaptive(0.9);
    cfg.schedule.cap_enforced = true;
  } else {
    cfg.schedule = MomentumSchedule::constant(cap);
  }
  cfg.schedule.cap_override = cap;

  const Vec hi = (2.0 * w_star.array() - alpha * alpha).sqrt();
  double margin = std::numeric_limits<double>::infinity();
  int first_t = -1, first_i = -1;
  double first_val = 0.0;
  std::string diverged;
  Trajectory tr;
  try {
    tr = run(cfg);
  } catch (const DivergenceError& e) {
    tr = e.partial();
    diverged = std::string("; run diverged: ") + e.what();
  }
  // u_0 sits on the lower endpoint; the open interval is required from t = 1 on.
  for (const StepRecord& s : tr.steps) {
    if (s.t == 0) continue;
    for (Eigen::Index i = 0; i < s.w.size(); ++i) {
      const double u = branch * s.w(i);
      const double m = std::min(u - alpha, hi(i) - u);
      if (m <= 0 && first_t < 0) {
        first_t = s.t;
        first_i = static_cast<int>(i);
        first_val = s.w(i);
      }
      margin = std::min(margin, m);
    }
  }
  CheckResult r;
  r.name = std::string("stay_region") + (schedule == StaySchedule::AtCap ? "_at_cap" : "") +
           (branch < 0 ? "_negative" : "");
  r.observed = margin;
  r.expected = 0.0;
  r.tolerance = 0.0;
  r.passed = first_t < 0 && diverged.empty();
  std::ostringstream os;
  os << "alpha = " << alpha << ", beta cap = " << std::setprecision(12) << cap << ", "
     << (schedule == StaySchedule::AtCap ? "constant beta at the cap" : "adaptive beta clipped to the cap")
     << ", " << tr.size() << " iterates, smallest margin " << std::setprecision(6) << margin;
  if (first_t >= 0)
    os << "; first exit at t = " << first_t << ", coordinate " << first_i << ", u = " << first_val
       << " (interval " << branch * alpha << ", " << branch * hi(first_i) << ")";
  os << diverged;
  r.detail = os.str();
  return r;
}

namespace {

using CheckFn = std::function<CheckResult(std::uint64_t)>;

const std::map<std::string, CheckFn>& registry() {
  static const std::map<std::string, CheckFn> reg = [] {
    std::map<std::string, CheckFn> m;
    const Vec w_target = vec({12, 6, 4, 3});
    m["counterexample"] = [](std::uint64_t) { return check_counterexample(); };
    m["norm_ge_one"] = [](std::uint64_t s) { return check_norm_ge_one(1000, s); };
    m["block_decomposition"] = [](std::uint64_t s) { return check_block_decomposition(500, s); };
    m["sin_bound"] = [](std::uint64_t) { return check_sin_bound(1e-3); };
    for (double a : {2.0, 4.0, 4.34}) {
      const std::string tag = "sin2_a" + fmt(a);
      for (bool imp : {false, true}) {
        m[std::string(imp ? "pl_improved_" : "pl_basic_") + tag] = [a, imp, tag](std::uint64_t s) {
          CheckResult r = check_avg_implies_pl(make_sin2(a), 1000, imp, s);
          r.name = std::string(imp ? "pl_improved_" : "pl_basic_") + tag;
          return r;
        };
      }
    }
    for (bool imp : {false, true}) {
      m[std::string(imp ? "pl_improved_" : "pl_basic_") + "diagnet"] = [w_target, imp](std::uint64_t s) {
        const double R = 2.0 * std::sqrt(w_target.maxCoeff());
        return check_avg_implies_pl(make_diag_net(2, w_target, R, 0.01), 1000, imp, s);
      };
      m[std::string(imp ? "pl_improved_" : "pl_basic_") + "quadratic"] = [imp](std::uint64_t s) {
        return check_avg_implies_pl(make_quadratic(Mat(vec({6, 2}).asDiagonal())), 1000, imp, s);
      };
    }
    for (int branch : {1, -1}) {
      for (StaySchedule sch : {StaySchedule::AdaptiveCapped, StaySchedule::AtCap}) {
        CheckResult probe;
        probe.name = std::string("stay_region") + (sch == StaySchedule::AtCap ? "_at_cap" : "") +
                     (branch < 0 ? "_negative" : "");
        m[probe.name] = [w_target, branch, sch](std::uint64_t) {
          return check_stay_region(0.01, w_target, 2000, branch, sch);
        };
      }
    }
    return m;
  }();
  return reg;
}

} // namespace

std::vector<std::string> registered_checks() {
  std::vector<std::string> names;
  for (const auto& [k, v] : registry()) names.push_back(k);
  return names;
}

std::vector<CheckResult> run_suite(const std::vector<std::string>& selection, std::uint64_t seed) {
  if (selection.empty()) throw InvalidInput("run_suite: empty selection");
  std::vector<std::string> names;
  for (const std::string& s : selection) {
    if (s == "all") {
      for (const auto& [k, v] : registry()) names.push_back(k);
    } else if (registry().count(s)) {
      names.push_back(s);
    } else {
      throw InvalidInput("run_suite: unknown check '" + s + "'");
    }
  }
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  std::vector<CheckResult> out;
  for (const std::string& n : names) {
    try {
      out.push_back(registry().at(n)(seed));
    } catch (const Error& e) {
      CheckResult r;
      r.name = n;
      r.passed = false;
      r.detail = std::string("error: ") + e.what();
      out.push_back(r);
    }
  }
  return out;
}

std::string format_table(const std::vector<CheckResult>& results) {
  std::ostringstream os;
  for (const CheckResult& r : results) {
    os << (r.passed ? "PASS " : "FAIL ") << std::left << std::setw(30) << r.name
       << " observed=" << std::setprecision(10) << r.observed << " expected=" << r.expected
       << " tol=" << r.tolerance << "\n      " << r.detail << "\n";
  }
  return os.str();
}

std::string report_json(const std::vector<CheckResult>& results, std::uint64_t seed) {
  nlohmann::json j;
  j["seed"] = seed;
  j["passed"] = std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
  j["checks"] = nlohmann::json::array();
  for (const CheckResult& r : results) {
    j["checks"].push_back({{"name", r.name},
                           {"passed", r.passed},
                           {"observed", r.observed},
                           {"expected", r.expected},
                           {"tolerance", r.tolerance},
                           {"detail", r.detail}});
  }
  return j.dump(2);
}

} // namespace hbm
