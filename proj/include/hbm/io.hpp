#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hbm/optimizers.hpp"

namespace hbm {

// ---- configuration --------------------------------------------------------

using ConfigMap = std::map<std::string, std::string>;

// Flat "key = value" lines; '#' starts a comment. Duplicate keys: last wins.
ConfigMap read_config_file(const std::string& path);
ConfigMap parse_config_text(const std::string& text);
// Each entry must look like key=value; later entries win.
void apply_overrides(ConfigMap& m, const std::vector<std::string>& kv);

struct ParsedConfig {
  RunConfig run;
  double tol = 1e-10;  // objective-gap tolerance used by compare and sweep
  std::vector<std::string> warnings;
};

// Rejects unknown keys; requires problem, algo, eta or c_eta, and iters.
ParsedConfig parse_config(const ConfigMap& m);
ParsedConfig parse_config(const std::string& path, const std::vector<std::string>& overrides);

// The fully resolved parameter set of a run (every default filled in), in a
// form parse_config accepts back.
ConfigMap resolved_config(const RunConfig& cfg, double tol = 1e-10);
std::string format_config(const ConfigMap& m);

// Round-trip formatting of reals: 17 significant digits.
std::string format_real(double x);

// ---- CSV -------------------------------------------------------------------

inline constexpr std::array<const char*, 13> kCsvColumns = {
    "t",       "f",        "grad_norm", "dist_to_opt", "step_dist",   "beta_t",     "lambda_min_avgH",
    "kappa_t", "V_t",      "psi_exact", "psi_bound",   "extra_factor", "basis_drift"};

std::string csv_string(const Trajectory& traj);
void emit_csv(const Trajectory& traj, const std::string& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::optional<double>>> rows;  // empty cell -> nullopt
};
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::string& path);

// Iterates and applied momenta: t, beta_t, w_0, ..., w_{d-1}.
std::string iterates_string(const Trajectory& traj);
struct StoredIterates {
  std::vector<Vec> w;
  std::vector<double> beta;
};
StoredIterates parse_iterates(const std::string& text);

// Writes <path>, <path>.params (resolved config plus clip log) and
// <path>.iterates.
void write_run(const Trajectory& traj, const std::string& path, double tol = 1e-10);

// Recomputes every derived column (average Hessians, spectra, rate reports,
// V_t) from stored iterates and momenta.
Trajectory rebuild_trajectory(const RunConfig& cfg, const StoredIterates& it);

// ---- comparison ------------------------------------------------------------

struct AlgoSummary {
  int iters_to_tol = -1;  // -1 when the tolerance is never met
  double final_gap = 0.0;
  double contraction = 0.0;  // geometric mean per-step distance ratio after burn-in; NaN if no window
  double target = 0.0;       // mean theoretical per-step rate over the same window
};

struct CompareReport {
  std::string problem;
  double tol = 0.0;
  int burn_in = -1;  // HB burn-in index, trajectory length if never reached
  AlgoSummary gd;
  AlgoSummary hb;
  // gd.iters_to_tol / hb.iters_to_tol, NaN when either is missing
  double speedup() const;
};

struct CompareRuns {
  CompareReport report;
  Trajectory gd;
  Trajectory hb;
};

// Both configs must share problem and init. Rates are recorded on both runs.
CompareRuns compare_runs(const RunConfig& cfg_gd, const RunConfig& cfg_hb, double tol);
CompareReport compare(const RunConfig& cfg_gd, const RunConfig& cfg_hb, double tol);

std::string format_report(const CompareReport& r);

// ---- sweeps ----------------------------------------------------------------

struct SweepRow {
  double value = 0.0;
  CompareReport report;
  std::optional<double> lambda_star;
  std::vector<double> lambda_curve;  // N sweeps: lambda_min(H_f(u)) on sweep_u_grid(), w_star = 1
};

std::vector<double> sweep_u_grid();
// lambda_min of the 1-d diag-net average Hessian at u toward uhat = 1.
double diag_net_lambda_min(int N, double u);

// One row per value; the base config supplies everything else. The HB run
// uses base's algo unless it is GD, in which case HB_v1.
std::vector<SweepRow> sweep(const ConfigMap& base, const std::string& param,
                            const std::vector<double>& values);
std::string format_sweep(const std::string& param, const std::vector<SweepRow>& rows);

} // namespace hbm
