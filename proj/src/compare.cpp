#include <algorithm>
#include <iomanip>
#include <limits>
#include <sstream>

#include "hbm/io.hpp"
#include "hbm/lyapunov.hpp"

namespace hbm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool same_problem(const Problem& a, const Problem& b) {
  if (a.name() != b.name() || a.dim() != b.dim() || a.scalars() != b.scalars()) return false;
  if (a.vectors().size() != b.vectors().size()) return false;
  for (const auto& [k, v] : a.vectors()) {
    auto it = b.vectors().find(k);
    if (it == b.vectors().end() || it->second.size() != v.size() || it->second != v) return false;
  }
  return true;
}

int first_below(const Trajectory& tr, double tol) {
  for (const StepRecord& s : tr.steps)
    if (s.f - tr.config.problem.f_opt() <= tol) return s.t;
  return -1;
}

double stacked_norm(const Trajectory& tr, int t) {
  const Vec& opt = tr.config.problem.optimum();
  const Vec& prev = t > 0 ? tr.steps[t - 1].w : tr.steps[t].w;
  return std::sqrt((tr.steps[t].w - opt).squaredNorm() + (prev - opt).squaredNorm());
}

// Geometric-mean contraction of ||(xi_t; xi_t-1)|| over [from, to] and the
// mean of rate(t) over the same steps.
template <typename Rate>
void window(const Trajectory& tr, int from, int to, Rate rate, AlgoSummary& out) {
  out.contraction = kNaN;
  out.target = kNaN;
  if (from < 0 || to <= from || to >= tr.size()) return;
  const double a = stacked_norm(tr, from);
  const double b = stacked_norm(tr, to);
  if (a > 0 && b > 0) out.contraction = std::pow(b / a, 1.0 / (to - from));
  double sum = 0.0;
  int n = 0;
  for (int t = from; t < to; ++t) {
    const auto& avg = tr.steps[t].avg;
    if (!avg || !std::isfinite(avg->kappa)) continue;
    sum += rate(avg->kappa);
    ++n;
  }
  if (n) out.target = sum / n;
}

} // namespace

double CompareReport::speedup() const {
  if (gd.iters_to_tol < 0 || hb.iters_to_tol <= 0) return kNaN;
  return double(gd.iters_to_tol) / hb.iters_to_tol;
}

CompareRuns compare_runs(const RunConfig& cfg_gd, const RunConfig& cfg_hb, double tol) {
  if (!same_problem(cfg_gd.problem, cfg_hb.problem))
    throw InvalidInput("compare: the two configs use different problems");
  if (cfg_gd.init.size() != cfg_hb.init.size() || cfg_gd.init != cfg_hb.init)
    throw InvalidInput("compare: the two configs start from different points");
  RunConfig g = cfg_gd;
  RunConfig h = cfg_hb;
  g.algo = Algo::GD;
  g.record_rates = true;
  h.record_rates = true;
  if (h.algo == Algo::GD) h.algo = Algo::HB_v1;

  CompareRuns out;
  out.gd = run(g);
  out.hb = run(h);
  CompareReport& r = out.report;
  r.problem = g.problem.name();
  r.tol = tol;
  r.gd.iters_to_tol = first_below(out.gd, tol);
  r.hb.iters_to_tol = first_below(out.hb, tol);
  r.gd.final_gap = out.gd.steps.back().f - g.problem.f_opt();
  r.hb.final_gap = out.hb.steps.back().f - h.problem.f_opt();
  const MomentumSchedule& s = h.schedule;
  r.burn_in = detect_burn_in(out.hb, s.c, s.c_eta);

  const int hb_end = r.hb.iters_to_tol >= 0 ? r.hb.iters_to_tol : out.hb.size() - 1;
  const int gd_end = r.gd.iters_to_tol >= 0 ? r.gd.iters_to_tol : out.gd.size() - 1;
  const double k_hb = s.c * std::sqrt(s.c_eta) / 2.0;
  const double c_eta_gd = g.eta * g.problem.L();
  window(out.hb, r.burn_in, hb_end, [&](double kappa) { return 1.0 - k_hb / std::sqrt(kappa); }, r.hb);
  window(out.gd, std::min(r.burn_in, gd_end), gd_end,
         [&](double kappa) { return 1.0 - c_eta_gd / kappa; }, r.gd);
  return out;
}

CompareReport compare(const RunConfig& cfg_gd, const RunConfig& cfg_hb, double tol) {
  return compare_runs(cfg_gd, cfg_hb, tol).report;
}

std::string format_report(const CompareReport& r) {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "problem " << r.problem << ", tolerance " << r.tol << "\n";
  auto line = [&](const char* name, const AlgoSummary& a) {
    os << "  " << name << ": iterations to tolerance "
       << (a.iters_to_tol >= 0 ? std::to_string(a.iters_to_tol) : std::string("not reached"))
       << ", final gap " << a.final_gap << ", contraction " << a.contraction << " (target " << a.target
       << ")\n";
  };
  line("GD", r.gd);
  line("HB", r.hb);
  os << "  HB burn-in t0 = " << r.burn_in << ", speedup " << r.speedup() << "\n";
  return os.str();
}

std::vector<double> sweep_u_grid() { return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}; }

double diag_net_lambda_min(int N, double u) {
  const Problem p = make_diag_net(N, Vec::Ones(1), 1.0, 0.5);
  return avg_hessian(p, Vec::Constant(1, u)).lambda_min;
}

std::vector<SweepRow> sweep(const ConfigMap& base, const std::string& param, const std::vector<double>& values) {
  static const std::vector<std::string> allowed = {"alpha", "N", "c", "c_eta", "beta"};
  if (std::find(allowed.begin(), allowed.end(), param) == allowed.end())
    throw UsageError("sweep: parameter must be one of alpha, N, c, c_eta, beta");
  std::vector<SweepRow> rows;
  for (double v : values) {
    ConfigMap m = base;
    m[param] = format_real(v);
    if (param == "c_eta") m.erase("eta");
    if (param == "beta") {
      m["schedule"] = "constant";
      m.erase("c");
    }
    if (param == "c") m["schedule"] = "adaptive";
    ParsedConfig pc = parse_config(m);
    RunConfig hb = pc.run;
    if (hb.algo == Algo::GD) hb.algo = Algo::HB_v1;
    RunConfig gd = pc.run;
    gd.algo = Algo::GD;
    SweepRow row;
    row.value = v;
    row.report = compare(gd, hb, pc.tol);
    row.lambda_star = hb.problem.lambda_star();
    if (param == "N") {
      for (double u : sweep_u_grid()) row.lambda_curve.push_back(diag_net_lambda_min(static_cast<int>(v), u));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_sweep(const std::string& param, const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << param << ",gd_iters,hb_iters,speedup,burn_in,lambda_star";
  bool curve = !rows.empty() && !rows.front().lambda_curve.empty();
  if (curve)
    for (double u : sweep_u_grid()) os << ",lambda_min_u" << u;
  os << "\n";
  for (const SweepRow& r : rows) {
    os << format_real(r.value) << "," << r.report.gd.iters_to_tol << "," << r.report.hb.iters_to_tol << ","
       << format_real(r.report.speedup()) << "," << r.report.burn_in << ","
       << (r.lambda_star ? format_real(*r.lambda_star) : std::string());
    for (double x : r.lambda_curve) os << "," << format_real(x);
    os << "\n";
  }
  return os.str();
}

} // namespace hbm
