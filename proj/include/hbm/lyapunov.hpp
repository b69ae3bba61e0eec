#pragma once

#include "hbm/optimizers.hpp"

namespace hbm {

struct LyapunovParams {
  double L = 0.0;
  double mu = 0.0;
  double c_eta = 1.0;
  double c_mu = 0.25;
  double c_tilde = 1.0;
  double theta = 0.0;
  double beta_cap = 0.0;
  double decay_factor = 0.0;  // 1 - c_tilde c_eta^2 mu / L
};

LyapunovParams make_params(double L, double mu, double c_eta, double c_mu, double c_tilde);

// f(w_t) - f* + theta ||w_t - w_prev||^2
double lyapunov_value(const Problem& p, const Vec& w_t, const Vec& w_prev, double theta);

struct DecayCheck {
  bool ok = true;
  double worst_ratio = 0.0;  // max_t V_t / (decay^t V_0)
  int worst_t = 0;
  int first_violation = -1;
};

// V_t <= decay^t V_0 (1 + 1e-8) for every t. The comparison runs in logs so
// decay^t may go below the double range. Throws Inapplicable when the run
// broke the hypotheses (eta != c_eta / L or some applied beta above the cap).
DecayCheck verify_decay(const Trajectory& traj, const LyapunovParams& params);

// Smallest t such that every recorded s >= t has
// psi_s <= 1 - (c sqrt(c_eta) / 2) / sqrt(kappa_s) * (1 - slack).
// Rows without a rate (t = 0, or an invalid spectrum) count as misses.
// Returns traj.size() when the last row misses.
int detect_burn_in(const Trajectory& traj, double c, double c_eta, double slack = 0.05);
int detect_burn_in(const Trajectory& traj, double slack = 0.05);

// Fills V_t in place with the given theta.
void attach_lyapunov(Trajectory& traj, double theta);

} // namespace hbm
