#pragma once

#include <optional>
#include <vector>

#include "hbm/avg_hessian.hpp"
#include "hbm/problems.hpp"
#include "hbm/rate_analysis.hpp"

namespace hbm {

enum class Algo { GD, HB_v1, HB_v2 };

// Momentum rule plus the constants of the Lyapunov cap. The cap constants
// are carried by every kind so constant and custom schedules can be capped
// too.
struct MomentumSchedule {
  enum class Kind { Constant, Adaptive, Custom };
  Kind kind = Kind::Constant;
  double beta = 0.0;           // Constant
  double c = 0.9;              // Adaptive
  std::vector<double> custom;  // Custom; the last value repeats past the end
  double c_eta = 1.0;
  double c_tilde = 1.0;
  double c_mu = 0.25;
  bool cap_enforced = false;
  std::optional<double> cap_override;  // replaces the computed cap when set

  static MomentumSchedule constant(double beta);
  static MomentumSchedule adaptive(double c, double c_eta = 1.0, double c_tilde = 1.0,
                                   double c_mu = 0.25);
  static MomentumSchedule sequence(std::vector<double> betas);
};

struct RunConfig {
  Problem problem;
  Algo algo = Algo::HB_v1;
  double eta = 0.0;
  MomentumSchedule schedule;
  int iters = 0;
  Vec init;
  bool record_rates = false;
};

struct StepRecord {
  int t = 0;
  Vec w;
  double f = 0.0;
  double grad_norm = 0.0;
  double dist_to_opt = 0.0;
  double step_dist = 0.0;
  double beta = 0.0;
  double V = std::numeric_limits<double>::quiet_NaN();
  std::optional<AvgHessianResult> avg;
  std::optional<BlockSpectrum> spectrum;  // of (eta * avg, beta)
  std::optional<RateReport> rate;         // from spectra t-1 and t
};

struct ClipEvent {
  int t = 0;
  double requested = 0.0;
  double cap = 0.0;
};

struct Trajectory {
  RunConfig config;
  std::vector<StepRecord> steps;  // t = 0..T
  std::vector<ClipEvent> clips;
  double cap = std::numeric_limits<double>::quiet_NaN();    // NaN when not computable
  double theta = std::numeric_limits<double>::quiet_NaN();  // used for V
  int size() const { return static_cast<int>(steps.size()); }
};

// Raised when an iterate leaves the 1e12 box or turns non-finite. Holds the
// rows computed so far.
class DivergenceError : public Error {
public:
  DivergenceError(const std::string& what, int t, Trajectory partial)
      : Error(what), t_(t), partial_(std::move(partial)) {}
  int t() const { return t_; }
  const Trajectory& partial() const { return partial_; }

private:
  int t_;
  Trajectory partial_;
};

Vec gd_step(const Problem& p, const Vec& w, double eta);
Vec hb_step_v1(const Problem& p, const Vec& w_t, const Vec& w_prev, double eta, double beta_t);

struct HbV2Step {
  Vec w_next;
  Vec m;
};
HbV2Step hb_step_v2(const Problem& p, const Vec& w_t, const Vec& m_prev, double eta, double beta_t);

// (1 - c sqrt(eta lmin))^2
double beta_adaptive(double lmin_t, double eta, double c);

// The Lyapunov cap for this schedule and problem, or cap_override.
double schedule_cap(const MomentumSchedule& s, const Problem& p);

Trajectory run(const RunConfig& cfg);

// Builds the spectrum of (eta * H_t, beta_t) from a recorded step.
BlockSpectrum step_spectrum(const StepRecord& s, double eta);

} // namespace hbm
