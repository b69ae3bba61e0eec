#include "hbm/optimizers.hpp"

#include <sstream>

#include "hbm/lyapunov.hpp"

namespace hbm {

namespace {

constexpr double kDivergence = 1e12;

void require_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw InvalidInput(std::string(what) + ": non-finite input");
}

void require_beta(double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw ParameterError("momentum must lie in [0, 1]");
}

Vec checked_grad(const Problem& p, const Vec& w) {
  Vec g = grad(p, w);
  if (!g.allFinite()) throw Error("non-finite gradient");
  return g;
}

void validate(const RunConfig& cfg) {
  if (cfg.problem.dim() == 0) throw InvalidInput("run: no problem given");
  if (!(cfg.eta > 0) || !std::isfinite(cfg.eta)) throw ParameterError("run: eta must be positive");
  if (cfg.iters < 1) throw ParameterError("run: iters must be at least 1");
  if (cfg.init.size() != cfg.problem.dim()) throw InvalidInput("run: init has the wrong length");
  require_finite(cfg.init, "run");
  const MomentumSchedule& s = cfg.schedule;
  if (cfg.algo == Algo::GD) return;
  switch (s.kind) {
  case MomentumSchedule::Kind::Constant:
    require_beta(s.beta);
    break;
  case MomentumSchedule::Kind::Adaptive:
    if (!(s.c > 0 && s.c < 1)) throw ParameterError("adaptive schedule: c must lie in (0, 1)");
    break;
  case MomentumSchedule::Kind::Custom:
    if (s.custom.empty()) throw ParameterError("custom schedule: empty sequence");
    for (double b : s.custom) require_beta(b);
    break;
  }
  if (!s.cap_enforced) return;
  if (!(s.c_eta > 0 && s.c_eta <= 1)) throw ParameterError("schedule: c_eta must lie in (0, 1]");
  if (!(s.c_tilde > 0 && s.c_tilde <= 1)) throw ParameterError("schedule: c_tilde must lie in (0, 1]");
  if (!(s.c_mu > 0 && s.c_mu <= 0.25)) throw ParameterError("schedule: c_mu must lie in (0, 1/4]");
}

double scheduled_beta(const RunConfig& cfg, int t, const StepRecord& r) {
  const MomentumSchedule& s = cfg.schedule;
  switch (s.kind) {
  case MomentumSchedule::Kind::Constant:
    return s.beta;
  case MomentumSchedule::Kind::Custom:
    return s.custom[std::min<size_t>(t, s.custom.size() - 1)];
  case MomentumSchedule::Kind::Adaptive:
    return beta_adaptive(r.avg->lambda_min, cfg.eta, s.c);
  }
  return 0.0;
}

} // namespace

MomentumSchedule MomentumSchedule::constant(double beta) {
  MomentumSchedule s;
  s.kind = Kind::Constant;
  s.beta = beta;
  return s;
}

MomentumSchedule MomentumSchedule::adaptive(double c, double c_eta, double c_tilde, double c_mu) {
  MomentumSchedule s;
  s.kind = Kind::Adaptive;
  s.c = c;
  s.c_eta = c_eta;
  s.c_tilde = c_tilde;
  s.c_mu = c_mu;
  return s;
}

MomentumSchedule MomentumSchedule::sequence(std::vector<double> betas) {
  MomentumSchedule s;
  s.kind = Kind::Custom;
  s.custom = std::move(betas);
  return s;
}

Vec gd_step(const Problem& p, const Vec& w, double eta) {
  require_finite(w, "gd_step");
  return w - eta * checked_grad(p, w);
}

Vec hb_step_v1(const Problem& p, const Vec& w_t, const Vec& w_prev, double eta, double beta_t) {
  require_finite(w_t, "hb_step_v1");
  require_finite(w_prev, "hb_step_v1");
  require_beta(beta_t);
  return w_t - eta * checked_grad(p, w_t) + beta_t * (w_t - w_prev);
}

HbV2Step hb_step_v2(const Problem& p, const Vec& w_t, const Vec& m_prev, double eta, double beta_t) {
  require_finite(w_t, "hb_step_v2");
  require_finite(m_prev, "hb_step_v2");
  require_beta(beta_t);
  HbV2Step s;
  s.m = beta_t * m_prev + checked_grad(p, w_t);
  s.w_next = w_t - eta * s.m;
  return s;
}

double beta_adaptive(double lmin_t, double eta, double c) {
  if (!(lmin_t > 0)) {
    std::ostringstream os;
    os << "beta_adaptive: lambda_min = " << lmin_t << " is not positive";
    throw AvgViolated(os.str());
  }
  if (!(c > 0 && c < 1)) throw ParameterError("beta_adaptive: c must lie in (0, 1)");
  const double x = eta * lmin_t;
  if (!(x <= 1.0)) throw ParameterError("beta_adaptive: eta * lambda_min exceeds 1");
  const double r = 1.0 - c * std::sqrt(x);
  return r * r;
}

double schedule_cap(const MomentumSchedule& s, const Problem& p) {
  if (s.cap_override) return *s.cap_override;
  return make_params(p.L(), p.mu(), s.c_eta, s.c_mu, s.c_tilde).beta_cap;
}

BlockSpectrum step_spectrum(const StepRecord& s, double eta) {
  if (!s.avg) throw InvalidInput("step_spectrum: average Hessian not recorded");
  SymEigen e{eta * s.avg->eigenvalues, s.avg->eigenvectors};
  return decompose(e, s.beta);
}

Trajectory run(const RunConfig& cfg) {
  validate(cfg);
  const Problem& p = cfg.problem;
  const MomentumSchedule& s = cfg.schedule;
  const bool momentum = cfg.algo != Algo::GD;
  const bool need_avg = cfg.record_rates || (momentum && s.kind == MomentumSchedule::Kind::Adaptive);

  Trajectory tr;
  tr.config = cfg;
  try {
    const LyapunovParams lp = make_params(p.L(), p.mu(), s.c_eta, s.c_mu, s.c_tilde);
    tr.theta = lp.theta;
    tr.cap = lp.beta_cap;
  } catch (const ParameterError&) {
  }
  if (s.cap_override) tr.cap = *s.cap_override;
  if (momentum && s.cap_enforced && !std::isfinite(tr.cap))
    throw ParameterError("run: cap requested but the Lyapunov constants are invalid");

  Vec w = cfg.init;
  Vec w_prev = cfg.init;
  Vec m = Vec::Zero(p.dim());
  tr.steps.reserve(cfg.iters + 1);
  for (int t = 0; t <= cfg.iters; ++t) {
    StepRecord r;
    r.t = t;
    r.w = w;
    r.f = eval(p, w);
    r.grad_norm = grad(p, w).norm();
    r.dist_to_opt = (w - p.optimum()).norm();
    r.step_dist = (w - w_prev).norm();
    if (need_avg) r.avg = avg_hessian(p, w);

    double beta = 0.0;
    if (momentum) {
      beta = scheduled_beta(cfg, t, r);
      if (s.cap_enforced && beta > tr.cap) {
        tr.clips.push_back({t, beta, tr.cap});
        beta = tr.cap;
      }
    }
    r.beta = beta;
    if (std::isfinite(tr.theta)) r.V = lyapunov_value(p, w, w_prev, tr.theta);
    if (cfg.record_rates) {
      r.spectrum = step_spectrum(r, cfg.eta);
      if (t > 0) {
        const auto& prev = tr.steps.back().spectrum;
        if (prev && prev->valid && r.spectrum->valid) r.rate = rate_report(*prev, *r.spectrum);
      }
    }
    tr.steps.push_back(std::move(r));
    if (t == cfg.iters) break;

    Vec next;
    try {
      switch (cfg.algo) {
      case Algo::GD:
        next = gd_step(p, w, cfg.eta);
        break;
      case Algo::HB_v1:
        next = hb_step_v1(p, w, w_prev, cfg.eta, beta);
        break;
      case Algo::HB_v2: {
        HbV2Step st = hb_step_v2(p, w, m, cfg.eta, beta);
        next = std::move(st.w_next);
        m = std::move(st.m);
        break;
      }
      }
    } catch (const InvalidInput&) {
      throw;
    } catch (const Error& e) {
      throw DivergenceError(std::string("run: ") + e.what() + " at t = " + std::to_string(t), t, tr);
    }
    if (!next.allFinite() || next.cwiseAbs().maxCoeff() > kDivergence) {
      std::ostringstream os;
      os << "run: iterate left the 1e12 box at t = " << t + 1;
      throw DivergenceError(os.str(), t + 1, tr);
    }
    w_prev = std::move(w);
    w = std::move(next);
  }
  return tr;
}

} // namespace hbm
