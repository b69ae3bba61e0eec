#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "hbm/io.hpp"

namespace hbm {

namespace {

const std::set<std::string> kKeys = {
    "problem", "alpha", "N",      "w_star", "R",     "floor",       "branch", "diag",
    "M",       "b",     "algo",   "eta",    "c_eta", "c",           "c_tilde", "c_mu",
    "schedule", "beta", "betas",  "cap",    "beta_cap", "iters",    "init",   "record_rates",
    "tol"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_real(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw UsageError("config: '" + key + "' expects a number, got '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  const double x = to_real(key, v);
  if (x != std::floor(x) || std::abs(x) > 1e9)
    throw UsageError("config: '" + key + "' expects an integer, got '" + v + "'");
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw UsageError("config: '" + key + "' expects true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_real(key, item));
  }
  if (out.empty()) throw UsageError("config: '" + key + "' is empty");
  return out;
}

Vec to_vec(const std::vector<double>& xs) {
  return Eigen::Map<const Vec>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

std::string join(const Vec& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += format_real(v(i));
  }
  return s;
}

std::string join(const std::vector<double>& v) { return join(to_vec(v)); }

const std::string* find(const ConfigMap& m, const std::string& key) {
  auto it = m.find(key);
  return it == m.end() ? nullptr : &it->second;
}

const std::string& require(const ConfigMap& m, const std::string& key) {
  const std::string* v = find(m, key);
  if (!v) throw UsageError("config: missing required key '" + key + "'");
  return *v;
}

Problem build_problem(const ConfigMap& m, Vec& default_init) {
  const std::string& name = require(m, "problem");
  if (name == "sin2") {
    const Problem p = make_sin2(to_real("alpha", require(m, "alpha")));
    default_init = Vec::Constant(1, -5.0);
    return p;
  }
  if (name == "diagnet") {
    const Vec w = to_vec(to_list("w_star", require(m, "w_star")));
    const int N = find(m, "N") ? to_int("N", *find(m, "N")) : 2;
    // Default radius gives L = 6 max w_star for N = 2.
    const double R = find(m, "R") ? to_real("R", *find(m, "R")) : std::sqrt(2.0 * w.maxCoeff());
    const double floor = find(m, "floor") ? to_real("floor", *find(m, "floor")) : 0.01;
    const int branch = find(m, "branch") ? to_int("branch", *find(m, "branch")) : 1;
    default_init = Vec::Constant(w.size(), branch * 0.01);
    return make_diag_net(N, w, R, floor, branch);
  }
  if (name == "quadratic") {
    Mat M;
    if (const std::string* d = find(m, "diag")) {
      M = to_vec(to_list("diag", *d)).asDiagonal();
    } else if (const std::string* full = find(m, "M")) {
      const std::vector<double> xs = to_list("M", *full);
      const auto n = static_cast<Eigen::Index>(std::lround(std::sqrt(double(xs.size()))));
      if (n * n != static_cast<Eigen::Index>(xs.size()))
        throw UsageError("config: 'M' must list d*d entries row by row");
      M = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(xs.data(), n, n);
    } else {
      throw UsageError("config: quadratic needs 'diag' or 'M'");
    }
    Vec b = Vec::Zero(M.rows());
    if (const std::string* bs = find(m, "b")) b = to_vec(to_list("b", *bs));
    default_init = Vec::Ones(M.rows());
    return make_quadratic(M, b);
  }
  throw UsageError("config: unknown problem '" + name + "' (expected sin2, diagnet or quadratic)");
}

} // namespace

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap m;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(lineno) + ": expected key=value");
    m[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return m;
}

ConfigMap read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void apply_overrides(ConfigMap& m, const std::vector<std::string>& kv) {
  for (const std::string& s : kv) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw UsageError("override '" + s + "' is not key=value");
    m[trim(s.substr(0, eq))] = trim(s.substr(eq + 1));
  }
}

ParsedConfig parse_config(const ConfigMap& m) {
  for (const auto& [k, v] : m) {
    if (!kKeys.count(k)) throw UsageError("config: unknown key '" + k + "'");
  }
  ParsedConfig out;
  RunConfig& cfg = out.run;
  Vec default_init;
  cfg.problem = build_problem(m, default_init);
  const Problem& p = cfg.problem;

  std::string algo = require(m, "algo");
  std::transform(algo.begin(), algo.end(), algo.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (algo == "gd") cfg.algo = Algo::GD;
  else if (algo == "hb" || algo == "hb_v1") cfg.algo = Algo::HB_v1;
  else if (algo == "hb_v2") cfg.algo = Algo::HB_v2;
  else throw UsageError("config: unknown algo '" + algo + "' (expected gd, hb, hb_v1 or hb_v2)");

  const std::string* eta = find(m, "eta");
  const std::string* c_eta = find(m, "c_eta");
  if (!eta && !c_eta) throw UsageError("config: missing required key 'eta' (or 'c_eta')");
  MomentumSchedule& s = cfg.schedule;
  if (eta) {
    cfg.eta = to_real("eta", *eta);
    if (!(cfg.eta > 0)) throw UsageError("config: 'eta' must be positive");
    s.c_eta = c_eta ? to_real("c_eta", *c_eta) : cfg.eta * p.L();
  } else {
    s.c_eta = to_real("c_eta", *c_eta);
    if (!(s.c_eta > 0)) throw UsageError("config: 'c_eta' must be positive");
    cfg.eta = s.c_eta / p.L();
  }
  cfg.iters = to_int("iters", require(m, "iters"));
  if (cfg.iters < 1) throw UsageError("config: 'iters' must be at least 1");

  const std::string* sched = find(m, "schedule");
  const std::string* beta = find(m, "beta");
  const std::string* betas = find(m, "betas");
  const std::string* c = find(m, "c");
  if (cfg.algo == Algo::GD) {
    if (sched || beta || betas || c) out.warnings.push_back("algo=gd: momentum schedule ignored");
  }
  std::string kind = sched ? *sched : (beta ? "constant" : betas ? "custom" : "adaptive");
  if (kind == "constant") {
    s.kind = MomentumSchedule::Kind::Constant;
    if (cfg.algo != Algo::GD) s.beta = to_real("beta", require(m, "beta"));
  } else if (kind == "adaptive") {
    s.kind = MomentumSchedule::Kind::Adaptive;
  } else if (kind == "custom") {
    s.kind = MomentumSchedule::Kind::Custom;
    if (cfg.algo != Algo::GD) s.custom = to_list("betas", require(m, "betas"));
  } else {
    throw UsageError("config: unknown schedule '" + kind + "' (expected constant, adaptive or custom)");
  }
  if (c) s.c = to_real("c", *c);
  if (const std::string* v = find(m, "c_tilde")) s.c_tilde = to_real("c_tilde", *v);
  if (const std::string* v = find(m, "c_mu")) s.c_mu = to_real("c_mu", *v);
  if (const std::string* v = find(m, "cap")) s.cap_enforced = to_bool("cap", *v);
  if (const std::string* v = find(m, "beta_cap")) s.cap_override = to_real("beta_cap", *v);

  if (const std::string* v = find(m, "init")) {
    const std::vector<double> xs = to_list("init", *v);
    if (xs.size() == 1) cfg.init = Vec::Constant(p.dim(), xs[0]);
    else cfg.init = to_vec(xs);
    if (cfg.init.size() != p.dim()) throw UsageError("config: 'init' has the wrong length");
  } else {
    cfg.init = default_init;
  }
  cfg.record_rates = true;
  if (const std::string* v = find(m, "record_rates")) cfg.record_rates = to_bool("record_rates", *v);
  if (const std::string* v = find(m, "tol")) out.tol = to_real("tol", *v);
  return out;
}

ParsedConfig parse_config(const std::string& path, const std::vector<std::string>& overrides) {
  ConfigMap m = path.empty() ? ConfigMap{} : read_config_file(path);
  apply_overrides(m, overrides);
  return parse_config(m);
}

ConfigMap resolved_config(const RunConfig& cfg, double tol) {
  ConfigMap m;
  const Problem& p = cfg.problem;
  switch (p.kind()) {
  case ProblemKind::Sin2:
    m["problem"] = "sin2";
    m["alpha"] = format_real(p.scalars().at("alpha"));
    break;
  case ProblemKind::DiagNet:
    m["problem"] = "diagnet";
    m["N"] = format_real(p.scalars().at("N"));
    m["R"] = format_real(p.scalars().at("R"));
    m["floor"] = format_real(p.scalars().at("floor"));
    m["branch"] = format_real(p.scalars().at("branch"));
    m["w_star"] = join(p.vectors().at("w_star"));
    break;
  case ProblemKind::Quadratic: {
    m["problem"] = "quadratic";
    const Vec& flat = p.vectors().at("M");
    m["M"] = join(flat);  // symmetric, so storage order does not matter
    m["b"] = join(p.vectors().at("b"));
    break;
  }
  case ProblemKind::Sum:
    throw UsageError("resolved_config: sum problems are library-only");
  }
  switch (cfg.algo) {
  case Algo::GD: m["algo"] = "gd"; break;
  case Algo::HB_v1: m["algo"] = "hb_v1"; break;
  case Algo::HB_v2: m["algo"] = "hb_v2"; break;
  }
  const MomentumSchedule& s = cfg.schedule;
  m["eta"] = format_real(cfg.eta);
  m["c_eta"] = format_real(s.c_eta);
  m["iters"] = std::to_string(cfg.iters);
  m["init"] = join(cfg.init);
  m["record_rates"] = cfg.record_rates ? "true" : "false";
  m["c_tilde"] = format_real(s.c_tilde);
  m["c_mu"] = format_real(s.c_mu);
  m["cap"] = s.cap_enforced ? "true" : "false";
  if (s.cap_override) m["beta_cap"] = format_real(*s.cap_override);
  m["tol"] = format_real(tol);
  if (cfg.algo != Algo::GD) {
    switch (s.kind) {
    case MomentumSchedule::Kind::Constant:
      m["schedule"] = "constant";
      m["beta"] = format_real(s.beta);
      break;
    case MomentumSchedule::Kind::Adaptive:
      m["schedule"] = "adaptive";
      m["c"] = format_real(s.c);
      break;
    case MomentumSchedule::Kind::Custom:
      m["schedule"] = "custom";
      m["betas"] = join(s.custom);
      break;
    }
  }
  return m;
}

std::string format_config(const ConfigMap& m) {
  std::string s;
  for (const auto& [k, v] : m) s += k + "=" + v + "\n";
  return s;
}

} // namespace hbm
