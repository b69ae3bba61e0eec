// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hbm/io.hpp"
#include "hbm/lyapunov.hpp"
#include "hbm/verify.hpp"

using namespace hbm;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [miss: " << what << "]";
    }
  }
};

struct Criterion {
  int id;
  const char* title;
  double budget_s;  // runtime limit, 0 when none is stated
  std::function<void(Outcome&)> body;
};

RunConfig make_cfg(const Problem& p, Algo algo, double eta, MomentumSchedule s, int iters, const Vec& init,
                   bool rates) {
  RunConfig c;
  c.problem = p;
  c.algo = algo;
  c.eta = eta;
  c.schedule = std::move(s);
  c.iters = iters;
  c.init = init;
  c.record_rates = rates;
  return c;
}

Mat random_rotation(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n;
  Mat a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = n(rng);
  return Eigen::HouseholderQR<Mat>(a).householderQ();
}

const Vec kDiagTarget = vec({12, 6, 4, 3});

// Trajectories from 6, 7 and 8, kept for the eigenvalue-drift audit in 10.
std::vector<Trajectory> g_trajectories;

void c1(Outcome& o) {
  const Mat A = build_A(SymMat::scalar(0.1), 0.9);
  const double rho = spectral_radius(A), nrm = spectral_norm(A);
  o.detail << std::setprecision(10) << "rho = " << rho << ", ||A|| = " << nrm << ", gap = " << nrm - rho;
  o.require(std::abs(rho - 0.9487) <= 1e-3, "rho = 0.9487 +- 1e-3");
  o.require(std::abs(nrm - 2.21) <= 0.01, "||A|| = 2.21 +- 0.01");
  o.require(std::abs(nrm - rho - 1.25) <= 0.02, "gap = 1.25 +- 0.02");
}

void c2(Outcome& o) {
  const CheckResult r = check_block_decomposition(500, kDefaultSeed);
  o.detail << r.detail;
  o.require(r.passed, "block decomposition");
}

void c3(Outcome& o) {
  const CheckResult r = check_norm_ge_one(1000, kDefaultSeed);
  o.detail << std::setprecision(12) << "min ||A|| = " << r.observed << "; " << r.detail;
  o.require(r.passed && r.observed >= 1 - 1e-10, "||A|| >= 1 - 1e-10");
}

void c4(Outcome& o) {
  std::mt19937_64 rng(kDefaultSeed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int pairs = 0, const_pairs = 0, violations = 0;
  double worst_excess = -1e300, worst_form_gap = 0.0;
  while (pairs < 1000) {
    const int d = 1 + pairs % 3;
    const bool const_beta = pairs % 2 == 0;
    const Mat U = random_rotation(rng, d);
    Vec lp(d), lt(d);
    for (int i = 0; i < d; ++i) {
      lp(i) = 0.01 + 0.99 * u(rng);
      lt(i) = std::clamp(lp(i) * (1 + 0.3 * (u(rng) - 0.5)), 0.005, 1.0);
    }
    std::sort(lp.data(), lp.data() + d, std::greater<>());
    std::sort(lt.data(), lt.data() + d, std::greater<>());
    auto threshold = [](const Vec& l) {
      const double r = 1 - std::sqrt(l.minCoeff());
      return r * r;
    };
    const double bt = threshold(lt) + (1 - threshold(lt)) * (0.02 + 0.98 * u(rng));
    const double bp = const_beta ? bt : threshold(lp) + (1 - threshold(lp)) * (0.02 + 0.98 * u(rng));
    const BlockSpectrum prev = decompose(SymEigen{lp, U}, bp);
    const BlockSpectrum cur = decompose(SymEigen{lt, U}, bt);
    if (!prev.valid || !cur.valid) continue;
    ++pairs;
    const double exact = psi_exact(prev, cur);
    const SharedBasisBound b = shared_basis_bound(prev, cur);
    worst_excess = std::max(worst_excess, exact - b.bound);
    if (exact > b.bound + 1e-8) ++violations;
    if (const_beta) {
      ++const_pairs;
      for (int i = 0; i < d; ++i)
        worst_form_gap = std::max(worst_form_gap, std::abs(transfer_block_norm_const_beta(prev, cur, i) -
                                                    transfer_block_norm_general(prev, cur, i)));
    }
  }
  o.detail << std::setprecision(4) << pairs << " pairs (" << const_pairs << " constant beta), violations "
           << violations << ", max(psi_exact - bound) = " << worst_excess
           << ", max |const-beta form - general form| = " << worst_form_gap;
  o.require(violations == 0, "psi_exact <= bound + 1e-8");
  o.require(worst_form_gap <= 1e-12, "constant-beta form equals general form within 1e-12");
}

void c5(Outcome& o) {
  const Problem p = make_quadratic(vec({6.0, 2.0}).asDiagonal());
  double worst = 0.0;
  int steps = 0;
  for (double beta : {0.3, 0.5, 0.8, 0.95}) {
    const Trajectory tr =
        run(make_cfg(p, Algo::HB_v1, 1.0 / 6, MomentumSchedule::constant(beta), 100, vec({1.0, -1.0}), true));
    for (const StepRecord& s : tr.steps) {
      if (s.t == 0) continue;
      ++steps;
      if (!s.rate) {
        o.require(false, "rate recorded at every step");
        continue;
      }
      worst = std::max(worst, std::abs(s.rate->psi_exact - std::sqrt(beta)));
    }
  }
  o.detail << steps << " steps over beta in {0.3, 0.5, 0.8, 0.95}, max |psi_exact - sqrt(beta)| = " << worst;
  o.require(worst <= 1e-12, "psi_exact = sqrt(beta) within 1e-12");
}

// c_tilde and c_mu from the feasibility condition with c = 0.9, c_eta = 1:
// c_tilde <= 0.9 r, c_mu <= 0.225 r, r = lambda_star / mu.
MomentumSchedule capped_adaptive(const Problem& p) {
  const double r = p.lambda_star().value_or(p.mu()) / p.mu();
  MomentumSchedule s = MomentumSchedule::adaptive(0.9, 1.0, std::min(1.0, 0.9 * r), std::min(0.25, 0.225 * r));
  s.cap_enforced = true;
  return s;
}

void c6(Outcome& o) {
  struct Case {
    std::string name;
    Problem p;
    Vec init;
    std::optional<double> cap;
  };
  const double alpha = 0.01;
  const double L_net = 6 * kDiagTarget.maxCoeff();
  std::vector<Case> cases = {
      {"quadratic Diag(6,2)", make_quadratic(vec({6.0, 2.0}).asDiagonal()), vec({1.0, 1.0}), std::nullopt},
      {"sin2 alpha=2", make_sin2(2.0), vec({-5.0}), std::nullopt},
      {"sin2 alpha=4", make_sin2(4.0), vec({-5.0}), std::nullopt},
      {"diag-net containment setup",
       make_diag_net(2, kDiagTarget, std::sqrt(2 * kDiagTarget.maxCoeff()), alpha),
       Vec::Constant(4, alpha), containment_beta_cap(alpha, L_net)},
  };
  for (Case& c : cases) {
    MomentumSchedule s = capped_adaptive(c.p);
    if (c.cap) s.cap_override = *c.cap;
    const Trajectory tr = run(make_cfg(c.p, Algo::HB_v1, s.c_eta / c.p.L(), s, 2000, c.init, true));
    const LyapunovParams lp = make_params(c.p.L(), c.p.mu(), s.c_eta, s.c_mu, s.c_tilde);
    const DecayCheck d = verify_decay(tr, lp);
    o.detail << "\n    " << c.name << ": c_tilde = " << s.c_tilde << ", c_mu = " << s.c_mu << ", clips "
             << tr.clips.size() << ", worst V_t/(decay^t V_0) = " << std::setprecision(6) << d.worst_ratio
             << " at t = " << d.worst_t;
    if (!d.ok) o.detail << ", first violation t = " << d.first_violation;
    o.require(d.ok, c.name);
    g_trajectories.push_back(tr);
  }
}

void c7(Outcome& o) {
  const Problem p = make_sin2(4.0);
  const Trajectory tr =
      run(make_cfg(p, Algo::HB_v1, 1 / p.L(), MomentumSchedule::adaptive(0.9), 500, vec({-5.0}), true));
  g_trajectories.push_back(tr);
  const int t0 = detect_burn_in(tr, 0.9, 1.0, 0.05);
  o.detail << "t0 = " << t0 << " of " << tr.size();
  o.require(t0 < tr.size(), "finite burn-in");
  if (t0 < tr.size()) {
    const DistanceAudit a = audit_distance_product(tr, t0);
    o.detail << ", product bound over " << a.windows << " window ends, worst actual/predicted "
             << std::setprecision(6) << a.worst_ratio;
    o.require(a.ok, "product bound dominates the distance");
  }
}

int iters_to(const Trajectory& tr, double tol) {
  for (const StepRecord& s : tr.steps)
    if (s.f - tr.config.problem.f_opt() <= tol) return s.t;
  return -1;
}

void c8(Outcome& o) {
  {
    const Problem p = make_sin2(4.0);
    RunConfig hb = make_cfg(p, Algo::HB_v1, 1 / p.L(), MomentumSchedule::adaptive(0.9), 500, vec({-5.0}), true);
    RunConfig gd = hb;
    gd.algo = Algo::GD;
    const CompareRuns r = compare_runs(gd, hb, 1e-10);
    o.detail << "sin2 alpha=4: GD " << r.report.gd.iters_to_tol << ", HB " << r.report.hb.iters_to_tol;
    o.require(r.report.hb.iters_to_tol > 0 && r.report.gd.iters_to_tol > 0 &&
                  r.report.hb.iters_to_tol < r.report.gd.iters_to_tol,
              "sin2 ordering");
    g_trajectories.push_back(r.gd);
    g_trajectories.push_back(r.hb);
  }
  {
    const Problem p = make_diag_net(2, kDiagTarget, std::sqrt(2 * kDiagTarget.maxCoeff()), 0.01);
    RunConfig hb =
        make_cfg(p, Algo::HB_v1, 1 / p.L(), MomentumSchedule::adaptive(0.9), 3000, Vec::Constant(4, 0.01), true);
    RunConfig gd = hb;
    gd.algo = Algo::GD;
    const CompareRuns r = compare_runs(gd, hb, 1e-8);
    const double ratio = r.report.speedup();
    o.detail << "; diag-net: GD " << r.report.gd.iters_to_tol << ", HB " << r.report.hb.iters_to_tol
             << ", ratio " << std::setprecision(4) << ratio;
    o.require(r.report.hb.iters_to_tol > 0 && r.report.gd.iters_to_tol > 0 &&
                  r.report.hb.iters_to_tol < r.report.gd.iters_to_tol,
              "diag-net ordering");
    o.require(std::isfinite(ratio) && ratio >= 1.5, "diag-net ratio >= 1.5");
    g_trajectories.push_back(r.gd);
    g_trajectories.push_back(r.hb);
  }
  const std::vector<int> depths = {2, 3, 5, 10, 20};
  int monotone_breaks = 0;
  for (double u : sweep_u_grid()) {
    double last = std::numeric_limits<double>::infinity();
    for (int N : depths) {
      const double l = diag_net_lambda_min(N, u);
      if (l > last + 1e-12) ++monotone_breaks;
      last = l;
    }
  }
  o.detail << "; depth sweep over u in (0.1..0.9): " << monotone_breaks << " increases in N";
  o.require(monotone_breaks == 0, "lambda_min non-increasing in N");
}

void c9(Outcome& o) {
  std::vector<std::string> names;
  for (const std::string& n : registered_checks())
    if (n.rfind("pl_", 0) == 0) names.push_back(n);
  for (const CheckResult& r : run_suite(names, kDefaultSeed)) {
    o.detail << "\n    " << (r.passed ? "ok   " : "fail ") << r.name << ": " << r.detail;
    o.require(r.passed, r.name);
  }
}

void c10(Outcome& o) {
  int audited = 0;
  for (const Trajectory& tr : g_trajectories) {
    const ProblemKind k = tr.config.problem.kind();
    if (k != ProblemKind::Sin2 && k != ProblemKind::DiagNet) continue;
    const DriftAudit a = audit_lambda_drift(tr);
    ++audited;
    o.detail << "\n    " << tr.config.problem.name() << " (" << (tr.config.algo == Algo::GD ? "GD" : "HB")
             << ", L_H = " << tr.config.problem.L_H() << "): " << a.steps << " steps, worst ratio "
             << std::setprecision(4) << a.worst_ratio << ", eta-scaled " << a.worst_eta_ratio;
    o.require(a.ok, "drift audit on " + tr.config.problem.name());
  }
  o.require(audited >= 4, "trajectories available");
}

void c11(Outcome& o) {
  const CheckResult r = check_sin_bound(1e-3);
  o.detail << r.detail;
  o.require(r.passed, "min sin(2x)/x >= -0.46");
}

void c12(Outcome& o) {
  for (StaySchedule s : {StaySchedule::AdaptiveCapped, StaySchedule::AtCap}) {
    for (int branch : {1, -1}) {
      const CheckResult r = check_stay_region(0.01, kDiagTarget, 2000, branch, s);
      o.detail << "\n    " << (r.passed ? "ok   " : "fail ") << r.name << ": " << r.detail;
      o.require(r.passed, r.name);
    }
  }
}

Vec fd_grad(const Problem& p, const Vec& w) {
  const double h = 1e-6;
  Vec g(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    Vec a = w, b = w;
    a(i) += h;
    b(i) -= h;
    g(i) = (eval(p, a) - eval(p, b)) / (2 * h);
  }
  return g;
}

Mat fd_hess(const Problem& p, const Vec& w) {
  const double h = 1e-5;
  Mat H(w.size(), w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    Vec a = w, b = w;
    a(i) += h;
    b(i) -= h;
    H.col(i) = (grad(p, a) - grad(p, b)) / (2 * h);
  }
  return H;
}

void c13(Outcome& o) {
  std::mt19937_64 rng(kDefaultSeed);
  Mat M(2, 2);
  M << 6, 1, 1, 2;
  struct Case {
    Problem p;
    double lo, hi;
  };
  const std::vector<Case> cases = {
      {make_quadratic(M, vec({1.0, -2.0})), -5, 5},
      {make_sin2(2.0), -10, 10},
      {make_sin2(4.0), -10, 10},
      {make_diag_net(2, kDiagTarget, std::sqrt(24.0), 0.01), 0.05, 4.8},
      {make_diag_net(3, vec({1.0, 2.0}), 2.0, 0.1), 0.2, 1.8},
  };
  double g_err = 0, h_err = 0, q_err = 0;
  for (const Case& c : cases) {
    std::uniform_real_distribution<double> u(c.lo, c.hi);
    for (int k = 0; k < 100; ++k) {
      Vec w(c.p.dim());
      for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = u(rng);
      g_err = std::max(g_err, (grad(c.p, w) - fd_grad(c.p, w)).cwiseAbs().maxCoeff());
      h_err = std::max(h_err, (hess(c.p, w).mat() - fd_hess(c.p, w)).cwiseAbs().maxCoeff());
      const auto closed = c.p.objective().avg_hessian_closed(w, c.p.optimum());
      if (closed) {
        const QuadratureResult q = avg_hessian_quadrature(c.p.objective(), w, c.p.optimum());
        q_err = std::max(q_err, (closed->mat() - q.matrix.mat()).norm());
      }
    }
  }
  o.detail << std::setprecision(3) << "grad vs FD " << g_err << ", Hessian vs FD " << h_err
           << ", closed vs quadrature " << q_err;
  o.require(g_err <= 1e-5, "gradients within 1e-5");
  o.require(h_err <= 1e-4, "Hessians within 1e-4");
  o.require(q_err <= 1e-8, "average Hessians within 1e-8");

  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double v_gap = 0;
  for (int k = 0; k < 20; ++k) {
    const Case& c = cases[k % cases.size()];
    std::vector<double> betas(100);
    for (double& b : betas) b = u01(rng);
    const Vec init = c.p.optimum() + Vec::Constant(c.p.dim(), 0.3);
    const double eta = 0.5 / c.p.L();
    const Trajectory a = run(make_cfg(c.p, Algo::HB_v1, eta, MomentumSchedule::sequence(betas), 100, init, false));
    const Trajectory b = run(make_cfg(c.p, Algo::HB_v2, eta, MomentumSchedule::sequence(betas), 100, init, false));
    for (int t = 0; t < a.size(); ++t)
      v_gap = std::max(v_gap, (a.steps[t].w - b.steps[t].w).cwiseAbs().maxCoeff());
  }
  o.detail << ", HB v1/v2 gap " << v_gap;
  o.require(v_gap <= 1e-10, "v1/v2 within 1e-10");

  const Problem p = make_sin2(4.0);
  const Trajectory tr =
      run(make_cfg(p, Algo::HB_v1, 1 / p.L(), MomentumSchedule::adaptive(0.9), 200, vec({-5.0}), true));
  const CsvTable t = parse_csv(csv_string(tr));
  int mismatched = 0;
  for (int i = 0; i < tr.size(); ++i) {
    const double f = *t.rows[i][1];
    if (std::memcmp(&f, &tr.steps[i].f, sizeof f) != 0) ++mismatched;
  }
  o.detail << ", CSV round trip mismatches " << mismatched;
  o.require(mismatched == 0, "CSV bit-exact");
}

} // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "counterexample: rho, norm and gap", 1, c1},
      {2, "block decomposition on 500 random inputs", 5, c2},
      {3, "transition matrix norm at least 1", 5, c3},
      {4, "closed-form rate bound soundness", 10, c4},
      {5, "constant-Hessian rate identity", 0, c5},
      {6, "Lyapunov decay on the example problems", 30, c6},
      {7, "burn-in and product bound on sin2", 0, c7},
      {8, "GD vs HB orderings and depth sweep", 60, c8},
      {9, "average Hessian implies PL", 10, c9},
      {10, "eigenvalue drift within L_H |dw|", 0, c10},
      {11, "sin(2x)/x grid minimum", 0, c11},
      {12, "diag-net containment", 0, c12},
      {13, "cross-cutting oracles", 0, c13},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [error: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0 && secs > c.budget_s) {
      o.pass = false;
      o.detail << " [over the " << c.budget_s << " s budget]";
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << std::setw(2) << c.id << ": " << c.title << " ("
              << std::fixed << std::setprecision(2) << secs << " s)" << std::defaultfloat;
    const std::string d = o.detail.str();
    std::cout << (d.rfind('\n', 0) == 0 ? "" : "\n    ") << d << "\n";
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria pass\n";
  return failed ? 1 : 0;
}
