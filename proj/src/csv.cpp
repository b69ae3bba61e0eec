#include <fstream>
#include <sstream>

#include "hbm/io.hpp"
#include "hbm/lyapunov.hpp"

namespace hbm {

namespace {

std::string cell(double x) { return std::isnan(x) ? std::string() : format_real(x); }

std::string cell(const std::optional<double>& x) { return x ? cell(*x) : std::string(); }

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error("write to '" + path + "' failed");
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_cell(const std::string& s) {
  size_t pos = 0;
  double x = 0;
  try {
    x = std::stod(s, &pos);
  } catch (const std::out_of_range&) {
    // stod rejects subnormals; strtod handles them.
    x = std::strtod(s.c_str(), nullptr);
    pos = s.size();
  } catch (const std::exception&) {
    throw InvalidInput("csv: bad number '" + s + "'");
  }
  if (pos != s.size()) throw InvalidInput("csv: bad number '" + s + "'");
  return x;
}

} // namespace

std::string csv_string(const Trajectory& traj) {
  std::ostringstream os;
  for (size_t k = 0; k < kCsvColumns.size(); ++k) os << (k ? "," : "") << kCsvColumns[k];
  os << "\n";
  for (const StepRecord& s : traj.steps) {
    std::optional<double> lmin, kappa, psi, bound, extra, drift;
    if (s.avg) {
      lmin = s.avg->lambda_min;
      kappa = s.avg->kappa;
    }
    if (s.rate) {
      psi = s.rate->psi_exact;
      bound = s.rate->bound_shared_basis;
      extra = s.rate->extra_factor;
      drift = s.rate->basis_drift;
    }
    os << s.t << "," << cell(s.f) << "," << cell(s.grad_norm) << "," << cell(s.dist_to_opt) << ","
       << cell(s.step_dist) << "," << cell(s.beta) << "," << cell(lmin) << "," << cell(kappa) << ","
       << cell(s.V) << "," << cell(psi) << "," << cell(bound) << "," << cell(extra) << ","
       << cell(drift) << "\n";
  }
  return os.str();
}

void emit_csv(const Trajectory& traj, const std::string& path) { write_file(path, csv_string(traj)); }

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line)) throw InvalidInput("csv: empty file");
  t.header = split_line(line);
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != t.header.size()) throw InvalidInput("csv: ragged row");
    std::vector<std::optional<double>> row;
    for (const std::string& c : cells) {
      if (c.empty()) row.emplace_back();
      else row.emplace_back(parse_cell(c));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

std::string iterates_string(const Trajectory& traj) {
  std::ostringstream os;
  const Eigen::Index d = traj.config.problem.dim();
  os << "t,beta_t";
  for (Eigen::Index i = 0; i < d; ++i) os << ",w_" << i;
  os << "\n";
  for (const StepRecord& s : traj.steps) {
    os << s.t << "," << format_real(s.beta);
    for (Eigen::Index i = 0; i < d; ++i) os << "," << format_real(s.w(i));
    os << "\n";
  }
  return os.str();
}

StoredIterates parse_iterates(const std::string& text) {
  const CsvTable t = parse_csv(text);
  if (t.header.size() < 3 || t.header[0] != "t" || t.header[1] != "beta_t")
    throw InvalidInput("iterates: unexpected header");
  StoredIterates it;
  const Eigen::Index d = static_cast<Eigen::Index>(t.header.size()) - 2;
  for (const auto& row : t.rows) {
    Vec w(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      if (!row[i + 2]) throw InvalidInput("iterates: missing coordinate");
      w(i) = *row[i + 2];
    }
    if (!row[1]) throw InvalidInput("iterates: missing beta");
    it.w.push_back(w);
    it.beta.push_back(*row[1]);
  }
  return it;
}

void write_run(const Trajectory& traj, const std::string& path, double tol) {
  emit_csv(traj, path);
  std::string params = format_config(resolved_config(traj.config, tol));
  params += "# resolved: L=" + format_real(traj.config.problem.L()) +
            " mu=" + format_real(traj.config.problem.mu()) + " theta=" + format_real(traj.theta) +
            " cap=" + format_real(traj.cap) + "\n";
  params += "# clips=" + std::to_string(traj.clips.size()) + "\n";
  for (const ClipEvent& c : traj.clips)
    params += "# clip t=" + std::to_string(c.t) + " requested=" + format_real(c.requested) +
              " cap=" + format_real(c.cap) + "\n";
  write_file(path + ".params", params);
  write_file(path + ".iterates", iterates_string(traj));
}

Trajectory rebuild_trajectory(const RunConfig& cfg, const StoredIterates& it) {
  if (it.w.empty() || it.w.size() != it.beta.size()) throw InvalidInput("rebuild: empty or ragged iterates");
  const Problem& p = cfg.problem;
  Trajectory tr;
  tr.config = cfg;
  try {
    const auto lp = make_params(p.L(), p.mu(), cfg.schedule.c_eta, cfg.schedule.c_mu, cfg.schedule.c_tilde);
    tr.theta = lp.theta;
    tr.cap = lp.beta_cap;
  } catch (const ParameterError&) {
  }
  if (cfg.schedule.cap_override) tr.cap = *cfg.schedule.cap_override;
  for (size_t t = 0; t < it.w.size(); ++t) {
    const Vec& w = it.w[t];
    if (w.size() != p.dim()) throw InvalidInput("rebuild: iterate dimension does not match the problem");
    const Vec& prev = t > 0 ? it.w[t - 1] : w;
    StepRecord r;
    r.t = static_cast<int>(t);
    r.w = w;
    r.f = eval(p, w);
    r.grad_norm = grad(p, w).norm();
    r.dist_to_opt = (w - p.optimum()).norm();
    r.step_dist = (w - prev).norm();
    r.beta = it.beta[t];
    if (std::isfinite(tr.theta)) r.V = lyapunov_value(p, w, prev, tr.theta);
    r.avg = avg_hessian(p, w);
    r.spectrum = step_spectrum(r, cfg.eta);
    if (t > 0) {
      const auto& ps = tr.steps.back().spectrum;
      if (ps->valid && r.spectrum->valid) r.rate = rate_report(*ps, *r.spectrum);
    }
    tr.steps.push_back(std::move(r));
  }
  return tr;
}

} // namespace hbm
