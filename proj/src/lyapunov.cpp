#include "hbm/lyapunov.hpp"

#include <cmath>
#include <sstream>

namespace hbm {

LyapunovParams make_params(double L, double mu, double c_eta, double c_mu, double c_tilde) {
  if (!(L > 0) || !(mu > 0) || !(mu <= L)) throw ParameterError("make_params: need 0 < mu <= L");
  if (!(c_eta > 0 && c_eta <= 1)) throw ParameterError("make_params: c_eta must lie in (0, 1]");
  if (!(c_mu > 0 && c_mu <= 0.25)) throw ParameterError("make_params: c_mu must lie in (0, 1/4]");
  if (!(c_tilde > 0 && c_tilde <= 1)) throw ParameterError("make_params: c_tilde must lie in (0, 1]");
  LyapunovParams p;
  p.L = L;
  p.mu = mu;
  p.c_eta = c_eta;
  p.c_mu = c_mu;
  p.c_tilde = c_tilde;
  const double q = L / 4.0 * (1.0 + 1.0 / c_eta);
  p.theta = 2.0 * (q - c_mu * mu);
  if (!(p.theta > 0)) throw ParameterError("make_params: theta is not positive");
  p.decay_factor = 1.0 - c_tilde * c_eta * c_eta * mu / L;
  if (!(p.decay_factor > 0 && p.decay_factor < 1)) {
    std::ostringstream os;
    os << "make_params: decay factor " << p.decay_factor << " outside (0, 1); shrink c_tilde";
    throw ParameterError(os.str());
  }
  p.beta_cap = std::sqrt(p.decay_factor * (1.0 - c_mu * mu / (q + p.theta / 2.0)));
  return p;
}

double lyapunov_value(const Problem& p, const Vec& w_t, const Vec& w_prev, double theta) {
  return eval(p, w_t) - p.f_opt() + theta * (w_t - w_prev).squaredNorm();
}

void attach_lyapunov(Trajectory& traj, double theta) {
  traj.theta = theta;
  for (int t = 0; t < traj.size(); ++t) {
    const Vec& prev = t > 0 ? traj.steps[t - 1].w : traj.steps[t].w;
    traj.steps[t].V = lyapunov_value(traj.config.problem, traj.steps[t].w, prev, theta);
  }
}

DecayCheck verify_decay(const Trajectory& traj, const LyapunovParams& params) {
  const RunConfig& cfg = traj.config;
  const double eta_expected = params.c_eta / params.L;
  if (std::abs(cfg.eta - eta_expected) > 1e-12 * eta_expected) {
    std::ostringstream os;
    os << "verify_decay: eta = " << cfg.eta << " but c_eta / L = " << eta_expected;
    throw Inapplicable(os.str());
  }
  // beta_t moves w_t to w_{t+1}; the last row's beta is never applied.
  for (int t = 0; t + 1 < traj.size(); ++t) {
    if (traj.steps[t].beta > params.beta_cap * (1.0 + 1e-15)) {
      std::ostringstream os;
      os << "verify_decay: beta_" << t << " = " << traj.steps[t].beta << " exceeds the cap "
         << params.beta_cap;
      throw Inapplicable(os.str());
    }
  }
  DecayCheck c;
  if (traj.size() == 0) return c;
  const Problem& p = cfg.problem;
  const double V0 = lyapunov_value(p, traj.steps[0].w, traj.steps[0].w, params.theta);
  const double log_decay = std::log(params.decay_factor);
  const double log_tol = std::log1p(1e-8);
  c.worst_ratio = 0.0;
  for (int t = 0; t < traj.size(); ++t) {
    const Vec& prev = t > 0 ? traj.steps[t - 1].w : traj.steps[t].w;
    const double V = lyapunov_value(p, traj.steps[t].w, prev, params.theta);
    if (V <= 0.0) continue;
    if (V0 <= 0.0) {
      // Started at the optimum; anything positive afterwards is a violation.
      c.ok = false;
      if (c.first_violation < 0) c.first_violation = t;
      c.worst_ratio = std::numeric_limits<double>::infinity();
      c.worst_t = t;
      continue;
    }
    const double log_ratio = std::log(V) - std::log(V0) - t * log_decay;
    const double ratio = std::exp(log_ratio);
    if (ratio > c.worst_ratio) {
      c.worst_ratio = ratio;
      c.worst_t = t;
    }
    if (log_ratio > log_tol) {
      c.ok = false;
      if (c.first_violation < 0) c.first_violation = t;
    }
  }
  return c;
}

int detect_burn_in(const Trajectory& traj, double c, double c_eta, double slack) {
  bool any_rate = false;
  for (const StepRecord& r : traj.steps) any_rate = any_rate || r.rate.has_value();
  if (!any_rate && traj.size() > 1) throw InvalidInput("detect_burn_in: trajectory has no rate reports");
  int t0 = traj.size();
  for (int s = traj.size() - 1; s >= 0; --s) {
    const StepRecord& r = traj.steps[s];
    if (!r.rate || !r.avg || !std::isfinite(r.avg->kappa)) break;
    const double target = 1.0 - (c * std::sqrt(c_eta) / 2.0) / std::sqrt(r.avg->kappa) * (1.0 - slack);
    if (r.rate->psi_exact > target) break;
    t0 = s;
  }
  return t0;
}

int detect_burn_in(const Trajectory& traj, double slack) {
  const MomentumSchedule& s = traj.config.schedule;
  return detect_burn_in(traj, s.c, s.c_eta, slack);
}

} // namespace hbm
