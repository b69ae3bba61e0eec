// Command-line front end: run, compare, analyze, verify, sweep.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hbm/io.hpp"
#include "hbm/lyapunov.hpp"
#include "hbm/verify.hpp"

using namespace hbm;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_warnings(const ParsedConfig& pc) {
  for (const std::string& w : pc.warnings) std::cerr << "warning: " << w << "\n";
}

void print_clips(const Trajectory& tr) {
  if (tr.clips.empty()) return;
  std::cerr << "warning: momentum clipped to the cap " << format_real(tr.cap) << " at " << tr.clips.size()
            << " step(s), first at t = " << tr.clips.front().t << "\n";
}

std::vector<double> parse_values(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw UsageError("bad value '" + item + "'");
    }
  }
  return out;
}

int cmd_run(const std::string& config, const std::vector<std::string>& kv, const std::string& out) {
  const ParsedConfig pc = parse_config(config, kv);
  print_warnings(pc);
  Trajectory tr;
  int status = 0;
  try {
    tr = run(pc.run);
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    tr = e.partial();
    status = 1;
  }
  print_clips(tr);
  if (!out.empty()) write_run(tr, out, pc.tol);
  const StepRecord& last = tr.steps.back();
  std::cout << "problem " << pc.run.problem.name() << ", " << tr.size() << " iterates, final gap "
            << format_real(last.f - pc.run.problem.f_opt()) << ", distance to optimum "
            << format_real(last.dist_to_opt) << "\n";
  return status;
}

int cmd_compare(const std::string& config, const std::vector<std::string>& kv, const std::string& out_dir,
                double min_speedup) {
  const ParsedConfig pc = parse_config(config, kv);
  print_warnings(pc);
  RunConfig gd = pc.run;
  gd.algo = Algo::GD;
  const CompareRuns runs = compare_runs(gd, pc.run, pc.tol);
  print_clips(runs.hb);
  const std::string text = format_report(runs.report);
  std::cout << text;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_run(runs.gd, out_dir + "/gd.csv", pc.tol);
    write_run(runs.hb, out_dir + "/hb.csv", pc.tol);
    std::ofstream(out_dir + "/summary.txt") << text;
  }
  if (min_speedup > 0) {
    const double s = runs.report.speedup();
    const bool ok = std::isfinite(s) && s >= min_speedup;
    std::cout << (ok ? "PASS" : "FAIL") << " speedup " << s << " >= " << min_speedup << "\n";
    return ok ? 0 : 1;
  }
  return 0;
}

int cmd_analyze(const std::string& input, const std::string& out, double slack) {
  const ParsedConfig pc = parse_config(parse_config_text(slurp(input + ".params")));
  const StoredIterates it = parse_iterates(slurp(input + ".iterates"));
  const Trajectory tr = rebuild_trajectory(pc.run, it);
  if (!out.empty()) emit_csv(tr, out);

  bool ok = true;
  const DriftAudit drift = audit_lambda_drift(tr);
  ok = ok && drift.ok;
  std::cout << (drift.ok ? "PASS" : "FAIL") << " eigenvalue drift within L_H |dw|: worst ratio "
            << drift.worst_ratio << " (eta-scaled " << drift.worst_eta_ratio << ")\n";

  int violations = 0, compared = 0;
  for (const StepRecord& s : tr.steps) {
    if (!s.rate || !std::isfinite(s.rate->bound_shared_basis)) continue;
    ++compared;
    if (s.rate->psi_exact > s.rate->bound_shared_basis + 1e-8) ++violations;
  }
  ok = ok && violations == 0;
  std::cout << (violations == 0 ? "PASS" : "FAIL") << " per-step rate below its closed-form bound at "
            << compared - violations << "/" << compared << " shared-basis steps\n";

  const MomentumSchedule& s = pc.run.schedule;
  try {
    const int t0 = detect_burn_in(tr, s.c, s.c_eta, slack);
    std::cout << "INFO burn-in t0 = " << t0 << " of " << tr.size() << "\n";
    if (t0 + 1 < tr.size()) {
      const DistanceAudit d = audit_distance_product(tr, t0);
      ok = ok && d.ok;
      std::cout << (d.ok ? "PASS" : "FAIL") << " product bound covers the distance over " << d.windows
                << " windows, worst actual/predicted " << d.worst_ratio << "\n";
    }
  } catch (const InvalidInput& e) {
    std::cout << "INFO no rate analysis: " << e.what() << "\n";
  }

  try {
    const LyapunovParams lp = make_params(pc.run.problem.L(), pc.run.problem.mu(), s.c_eta, s.c_mu, s.c_tilde);
    const DecayCheck dc = verify_decay(tr, lp);
    ok = ok && dc.ok;
    std::cout << (dc.ok ? "PASS" : "FAIL") << " Lyapunov decay: worst V_t / (decay^t V_0) = " << dc.worst_ratio
              << " at t = " << dc.worst_t << "\n";
  } catch (const Error& e) {
    std::cout << "INFO Lyapunov decay not applicable: " << e.what() << "\n";
  }
  return ok ? 0 : 1;
}

int cmd_verify(const std::string& checks, const std::string& report, std::uint64_t seed, bool list) {
  if (list) {
    for (const std::string& n : registered_checks()) std::cout << n << "\n";
    return 0;
  }
  std::vector<std::string> names;
  std::stringstream ss(checks);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) names.push_back(item);
  const std::vector<std::string> known = registered_checks();
  for (const std::string& n : names)
    if (n != "all" && std::find(known.begin(), known.end(), n) == known.end())
      throw UsageError("unknown check '" + n + "' (see --list)");
  const std::vector<CheckResult> results = run_suite(names, seed);
  std::cout << format_table(results);
  if (!report.empty()) std::ofstream(report) << report_json(results, seed) << "\n";
  for (const CheckResult& r : results)
    if (!r.passed) return 1;
  return 0;
}

int cmd_sweep(const std::string& config, const std::vector<std::string>& kv, const std::string& param,
              const std::string& values, const std::string& out) {
  ConfigMap m = config.empty() ? ConfigMap{} : read_config_file(config);
  apply_overrides(m, kv);
  const std::vector<SweepRow> rows = sweep(m, param, parse_values(values));
  const std::string table = format_sweep(param, rows);
  std::cout << table;
  if (!out.empty()) std::ofstream(out) << table;
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heavy Ball momentum rate analysis"};
  app.require_subcommand(1);

  std::string config, out, out_dir, input, checks = "all", report, param, values;
  std::vector<std::string> kv;
  double slack = 0.05, min_speedup = 0.0;
  std::uint64_t seed = kDefaultSeed;
  bool list = false;

  auto* run_cmd = app.add_subcommand("run", "Run GD or HB and write the trajectory");
  run_cmd->add_option("-c,--config", config, "key=value config file");
  run_cmd->add_option("-o,--out", out, "trajectory CSV (plus .params and .iterates)");
  run_cmd->add_option("overrides", kv, "key=value overrides");

  auto* cmp_cmd = app.add_subcommand("compare", "Run GD and HB on the same problem");
  cmp_cmd->add_option("-c,--config", config, "key=value config file");
  cmp_cmd->add_option("-o,--out-dir", out_dir, "directory for gd.csv, hb.csv and summary.txt");
  cmp_cmd->add_option("--min-speedup", min_speedup, "fail unless GD/HB iteration ratio reaches this");
  cmp_cmd->add_option("overrides", kv, "key=value overrides");

  auto* an_cmd = app.add_subcommand("analyze", "Recompute rate reports from a stored run");
  an_cmd->add_option("-i,--input", input, "trajectory CSV written by run")->required();
  an_cmd->add_option("-o,--out", out, "recomputed trajectory CSV");
  an_cmd->add_option("--slack", slack, "burn-in slack");

  auto* ver_cmd = app.add_subcommand("verify", "Run the verification checks");
  ver_cmd->add_option("--checks", checks, "comma-separated check names, or all");
  ver_cmd->add_option("--report", report, "JSON report path");
  ver_cmd->add_option("--seed", seed, "random seed");
  ver_cmd->add_flag("--list", list, "list check names");

  auto* sw_cmd = app.add_subcommand("sweep", "Compare GD and HB over a parameter range");
  sw_cmd->add_option("-c,--config", config, "key=value config file");
  sw_cmd->add_option("-p,--param", param, "alpha, N, c, c_eta or beta")->required();
  sw_cmd->add_option("-v,--values", values, "comma-separated values")->required();
  sw_cmd->add_option("-o,--out", out, "table CSV");
  sw_cmd->add_option("overrides", kv, "key=value overrides");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return cmd_run(config, kv, out);
    if (*cmp_cmd) return cmd_compare(config, kv, out_dir, min_speedup);
    if (*an_cmd) return cmd_analyze(input, out, slack);
    if (*ver_cmd) return cmd_verify(checks, report, seed, list);
    if (*sw_cmd) return cmd_sweep(config, kv, param, values, out);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
