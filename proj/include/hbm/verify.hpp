#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hbm/problems.hpp"

namespace hbm {

struct CheckResult {
  std::string name;
  bool passed = false;
  double observed = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

constexpr std::uint64_t kDefaultSeed = 20240601;

// Transition matrix for d = 1, eta*lambda = 0.1, beta = 0.9: spectral radius
// 0.9487, norm 2.21 and their gap 1.25 at the printed precision.
CheckResult check_counterexample();

// min ||A|| over corner cases plus random eta*lambda, beta in [0, 1].
CheckResult check_norm_ge_one(int samples, std::uint64_t seed = kDefaultSeed);

// |z| = sqrt(beta), P D P^-1 = A and boundary rejection on random inputs
// above the complex-spectrum threshold.
CheckResult check_block_decomposition(int samples, std::uint64_t seed = kDefaultSeed);

// ||grad||^2 >= 2 mu_w (f - f*) at sampled points, mu_w = lambda_w^2 / L or
// lambda_w when improved. Regions: sin2 [-10, 10] (uniform grid), diag-net
// branch * (0, 2 sqrt(max w_star)]^d, others [-10, 10]^d. Passes when at
// least 99.9% of the evaluated points satisfy it. Throws Inconclusive when
// more than 10% of points have lambda_w <= 0.
CheckResult check_avg_implies_pl(const Problem& p, int points, bool improved,
                                 std::uint64_t seed = kDefaultSeed);

// Grid minimum of sin(2x)/x on [-100, 100] against -0.46.
CheckResult check_sin_bound(double grid_step = 1e-3);

double containment_beta_cap(double alpha, double L, double c_eta = 1.0, double c_tilde = 1.0,
                       double c_mu = 0.25);

enum class StaySchedule {
  AdaptiveCapped,  // (1 - 0.9 sqrt(eta lambda_min))^2 clipped to the cap
  AtCap,           // constant beta equal to the cap
};

// HB on diag-net (N = 2) from u_0 = branch * alpha, eta = 1/L with
// L = 6 max w_star. Every coordinate must stay strictly inside
// branch * (alpha, sqrt(2 w_i - alpha^2)) for t >= 1.
CheckResult check_stay_region(double alpha, const Vec& w_star, int iters, int branch = 1,
                              StaySchedule schedule = StaySchedule::AdaptiveCapped);

std::vector<std::string> registered_checks();

// Runs the named checks ("all" expands to every registered one) and returns
// them sorted by name. Unknown or empty selection throws InvalidInput.
std::vector<CheckResult> run_suite(const std::vector<std::string>& selection,
                                   std::uint64_t seed = kDefaultSeed);

std::string format_table(const std::vector<CheckResult>& results);
std::string report_json(const std::vector<CheckResult>& results, std::uint64_t seed);

} // namespace hbm
