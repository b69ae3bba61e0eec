#include "hbm/rate_analysis.hpp"

#include <limits>
#include <sstream>

#include "hbm/optimizers.hpp"

namespace hbm {

namespace {

constexpr double kMinImag = 1e-14;
constexpr double kSharedBasisTol = 1e-8;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const Complex kI(0.0, 1.0);

void require_valid(const BlockSpectrum& s) {
  if (s.valid) return;
  if (!s.blocks.empty() && s.min_imag < kMinImag) {
    bool threshold_ok = s.beta <= 1.0;
    for (const Block& b : s.blocks) {
      const double r = 1.0 - std::sqrt(std::max(0.0, b.lambda));
      threshold_ok = threshold_ok && b.lambda >= 0 && s.beta > r * r;
    }
    if (threshold_ok) throw IllConditioned("P is numerically singular: Im z below 1e-14");
  }
  throw InvalidInput("spectrum outside the complex-eigenvalue regime");
}

void require_pair(const BlockSpectrum& prev, const BlockSpectrum& cur) {
  require_valid(prev);
  require_valid(cur);
  if (prev.blocks.size() != cur.blocks.size())
    throw DimensionMismatch("spectra have different dimensions");
}

void require_index(const BlockSpectrum& s, int i) {
  if (i < 0 || i >= static_cast<int>(s.blocks.size())) throw InvalidInput("block index out of range");
}

double re_z(double lambda, double beta) { return 0.5 * (1.0 + beta - lambda); }

// 4 beta - (1 + beta - lambda)^2, i.e. 4 (Im z)^2
double den4(double lambda, double beta) {
  const double s = 1.0 + beta - lambda;
  return 4.0 * beta - s * s;
}

} // namespace

Mat build_A(const SymMat& H_eta, double beta) {
  if (!std::isfinite(beta)) throw InvalidInput("build_A: non-finite beta");
  const Eigen::Index d = H_eta.dim();
  const Mat I = Mat::Identity(d, d);
  Mat A = Mat::Zero(2 * d, 2 * d);
  A.topLeftCorner(d, d) = (1.0 + beta) * I - H_eta.mat();
  A.topRightCorner(d, d) = -beta * I;
  A.bottomLeftCorner(d, d) = I;
  return A;
}

BlockSpectrum decompose(const SymMat& H_eta, double beta) { return decompose(sym_eigen(H_eta), beta); }

BlockSpectrum decompose(const SymEigen& eig, double beta) {
  if (!std::isfinite(beta) || !eig.values.allFinite()) throw InvalidInput("decompose: non-finite input");
  BlockSpectrum s;
  s.beta = beta;
  s.U = eig.vectors;
  s.valid = beta <= 1.0;
  s.min_imag = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    Block b;
    b.lambda = eig.values(i);
    const double re = re_z(b.lambda, beta);
    const double im2 = beta - re * re;
    const double im = std::sqrt(std::max(0.0, im2));
    b.z = Complex(re, im);
    b.Q << b.z, std::conj(b.z), 1.0, 1.0;
    const double r = 1.0 - std::sqrt(std::max(0.0, b.lambda));
    s.valid = s.valid && b.lambda >= 0 && beta > r * r && im >= kMinImag;
    s.min_imag = std::min(s.min_imag, im);
    s.blocks.push_back(b);
  }
  return s;
}

CMat assemble_P(const BlockSpectrum& s) {
  const Eigen::Index d = s.U.rows();
  CMat P(2 * d, 2 * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const Eigen::VectorXcd u = s.U.col(i).cast<Complex>();
    const Complex z = s.blocks[i].z;
    P.block(0, 2 * i, d, 1) = z * u;
    P.block(d, 2 * i, d, 1) = u;
    P.block(0, 2 * i + 1, d, 1) = std::conj(z) * u;
    P.block(d, 2 * i + 1, d, 1) = u;
  }
  return P;
}

CMat assemble_P_inv(const BlockSpectrum& s) {
  const Eigen::Index d = s.U.rows();
  CMat Pi(2 * d, 2 * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const Eigen::RowVectorXcd u = s.U.col(i).transpose().cast<Complex>();
    const Complex z = s.blocks[i].z;
    const Complex inv_det = 1.0 / (2.0 * kI * z.imag());
    Pi.block(2 * i, 0, 1, d) = inv_det * u;
    Pi.block(2 * i, d, 1, d) = -inv_det * std::conj(z) * u;
    Pi.block(2 * i + 1, 0, 1, d) = -inv_det * u;
    Pi.block(2 * i + 1, d, 1, d) = inv_det * z * u;
  }
  return Pi;
}

Eigen::VectorXcd assemble_D(const BlockSpectrum& s) {
  Eigen::VectorXcd D(2 * s.blocks.size());
  for (size_t i = 0; i < s.blocks.size(); ++i) {
    D(2 * i) = s.blocks[i].z;
    D(2 * i + 1) = std::conj(s.blocks[i].z);
  }
  return D;
}

CMat reconstruct(const BlockSpectrum& s) {
  return assemble_P(s) * assemble_D(s).asDiagonal() * assemble_P_inv(s);
}

double transfer_block_norm_const_beta(const BlockSpectrum& prev, const BlockSpectrum& cur, int i) {
  require_pair(prev, cur);
  require_index(cur, i);
  if (prev.beta != cur.beta) throw PreconditionError("constant-beta form needs beta_t == beta_t-1");
  const double lt = cur.blocks[i].lambda;
  const double lp = prev.blocks[i].lambda;
  const double sb = std::sqrt(cur.beta);
  if (lt >= lp) return std::sqrt(1.0 + (lt - lp) / ((1.0 + sb) * (1.0 + sb) - lt));
  return std::sqrt(1.0 + (lp - lt) / (lt - (1.0 - sb) * (1.0 - sb)));
}

double transfer_block_norm_general(const BlockSpectrum& prev, const BlockSpectrum& cur, int i) {
  require_pair(prev, cur);
  require_index(cur, i);
  const double lt = cur.blocks[i].lambda;
  const double lp = prev.blocks[i].lambda;
  const double bt = cur.beta;
  const double bp = prev.beta;
  const double den = den4(lt, bt);
  if (den == 0.0) throw DegenerateSpectrum("4 beta_t - (1 + beta_t - lambda_t)^2 vanishes");

  const double st = 1.0 + bt - lt;
  const double sp = 1.0 + bp - lp;
  const double a_prime = (2.0 * bt + 2.0 * bp - st * sp) / den;

  // |b'| = sqrt(c1 + c2) / (2 Im(z_t)^2); c1 is the constant-beta part and
  // every term of c2 carries a factor beta_{t-1} - beta_t.
  const double dl = 0.5 * (lt - lp);
  const double db = 0.5 * (bp - bt);
  const double rt = 0.5 * (1.0 + bt - lt);
  const double rpt = 0.5 * (1.0 + bt - lp);  // (1 + beta_t - lambda_{t-1}) / 2
  const double c1 = dl * dl * 4.0 * bt;
  const double s_im = 2.0 * bt - rt * rt - rpt * rpt;
  const double s_db = (bp - bt) - 2.0 * rpt * db - db * db;
  const double g = 1.0 - (2.0 + bp + bt - 2.0 * lp) / 4.0;
  const double c2 = 4.0 * db * db * db * dl + 6.0 * db * db * dl * dl + 4.0 * db * dl * dl * dl +
                    db * db * db * db + 2.0 * (db * db + 2.0 * db * dl) * s_db +
                    2.0 * (db * db + 2.0 * db * dl) * s_im + 2.0 * dl * dl * s_db +
                    2.0 * (bt - bp) * g * (rpt + rt) * dl + (bt - bp) * (bt - bp) * g * g;
  const double im_t2 = 0.25 * den;
  const double b_prime = std::sqrt(std::max(0.0, c1 + c2)) / (2.0 * im_t2);
  return std::sqrt(a_prime + b_prime);
}

double transfer_block_norm_direct(const BlockSpectrum& prev, const BlockSpectrum& cur, int i) {
  require_pair(prev, cur);
  require_index(cur, i);
  const Complex zt = cur.blocks[i].z;
  const Complex zp = prev.blocks[i].z;
  const Complex det = 2.0 * kI * zt.imag();
  const double a = std::abs((zp - std::conj(zt)) / det);
  const double b = std::abs((zp - zt) / det);
  return std::sqrt(a * a + b * b + 2.0 * a * b);
}

double transfer_block_norm(const BlockSpectrum& prev, const BlockSpectrum& cur, int i) {
  if (prev.beta == cur.beta) return transfer_block_norm_const_beta(prev, cur, i);
  return transfer_block_norm_general(prev, cur, i);
}

double psi_exact(const BlockSpectrum& prev, const BlockSpectrum& cur) {
  require_pair(prev, cur);
  const CMat M = assemble_D(cur).asDiagonal() * (assemble_P_inv(cur) * assemble_P(prev));
  return spectral_norm(M);
}

double psi_block(const BlockSpectrum& prev, const BlockSpectrum& cur) {
  require_pair(prev, cur);
  double m = 0.0;
  for (int i = 0; i < static_cast<int>(cur.blocks.size()); ++i)
    m = std::max(m, transfer_block_norm(prev, cur, i));
  return std::sqrt(cur.beta) * m;
}

SharedBasisBound shared_basis_bound(const BlockSpectrum& prev, const BlockSpectrum& cur) {
  require_pair(prev, cur);
  const double bt = cur.beta;
  const double bp = prev.beta;
  const double sb = std::sqrt(bt);
  const double dbeta = std::abs(bp - bt);
  const bool beta_moved = bt != bp;
  SharedBasisBound out;
  for (size_t i = 0; i < cur.blocks.size(); ++i) {
    const double lt = cur.blocks[i].lambda;
    const double lp = prev.blocks[i].lambda;
    double extra;
    if (lt >= lp) {
      extra = std::sqrt(1.0 + (lt - lp) / ((1.0 + sb) * (1.0 + sb) - lt));
    } else {
      const double den = lt - (1.0 - sb) * (1.0 - sb);
      if (!(den > 0)) throw PreconditionError("shared_basis_bound: lambda_t below (1 - sqrt(beta_t))^2");
      extra = std::sqrt(1.0 + (lp - lt) / den);
    }
    const double d4 = std::abs(den4(lt, bt));
    const double phi =
        3.0 * std::sqrt(dbeta / d4) + 3.0 * std::sqrt(std::sqrt(dbeta * std::abs(lt - lp)) / d4);
    out.phi.push_back(phi);
    out.extra_factor = std::max(out.extra_factor, extra + (beta_moved ? phi : 0.0));
  }
  out.bound = sb * out.extra_factor;
  return out;
}

double basis_drift(const BlockSpectrum& prev, const BlockSpectrum& cur) {
  if (prev.U.rows() != cur.U.rows()) throw DimensionMismatch("basis_drift: dimension mismatch");
  const Mat C = (cur.U.transpose() * prev.U).cwiseAbs();
  return (C - Mat::Identity(C.rows(), C.cols())).norm();
}

RateReport rate_report(const BlockSpectrum& prev, const BlockSpectrum& cur) {
  RateReport r;
  r.psi_exact = psi_exact(prev, cur);
  r.basis_drift = basis_drift(prev, cur);
  if (r.basis_drift <= kSharedBasisTol) {
    r.psi_block = psi_block(prev, cur);
    const SharedBasisBound b = shared_basis_bound(prev, cur);
    r.bound_shared_basis = b.bound;
    r.extra_factor = b.extra_factor;
    r.phi_terms = b.phi;
  } else {
    r.psi_block = kNaN;
    r.bound_shared_basis = kNaN;
    r.extra_factor = kNaN;
  }
  return r;
}

double lambda_drift_bound(const Problem& p, const Vec& w_t, const Vec& w_prev) {
  if (w_t.size() != p.dim() || w_prev.size() != p.dim())
    throw InvalidInput("lambda_drift_bound: vector length does not match the problem");
  return p.L_H() * (w_t - w_prev).norm();
}

DriftAudit audit_lambda_drift(const Trajectory& traj) {
  const Problem& p = traj.config.problem;
  const double eta = traj.config.eta;
  DriftAudit a;
  for (int t = 1; t < traj.size(); ++t) {
    const StepRecord& cur = traj.steps[t];
    const StepRecord& prev = traj.steps[t - 1];
    if (!cur.avg || !prev.avg) throw InvalidInput("audit_lambda_drift: average Hessians not recorded");
    const double drift = (cur.avg->eigenvalues - prev.avg->eigenvalues).cwiseAbs().maxCoeff();
    const double bound = lambda_drift_bound(p, cur.w, prev.w);
    ++a.steps;
    // A few ulps of eigen-solver noise when the step is zero.
    const double slack = 1e-12 * std::max(1.0, cur.avg->eigenvalues.cwiseAbs().maxCoeff());
    if (drift > bound + slack) a.ok = false;
    if (bound > 0) {
      const double r = drift / bound;
      if (r > a.worst_ratio) {
        a.worst_ratio = r;
        a.worst_t = t;
      }
      a.worst_eta_ratio = std::max(a.worst_eta_ratio, drift / (eta * bound));
    }
  }
  return a;
}

namespace {

Eigen::VectorXd stacked_error(const Trajectory& traj, int t) {
  const Vec& opt = traj.config.problem.optimum();
  const Vec& wt = traj.steps[t].w;
  const Vec& wp = t > 0 ? traj.steps[t - 1].w : traj.steps[t].w;
  Eigen::VectorXd x(2 * opt.size());
  x << wt - opt, wp - opt;
  return x;
}

const BlockSpectrum& spectrum_at(const Trajectory& traj, int t) {
  const StepRecord& s = traj.steps[t];
  if (!s.spectrum || !s.spectrum->valid) {
    std::ostringstream os;
    os << "no valid decomposition at t = " << t;
    throw InvalidInput(os.str());
  }
  return *s.spectrum;
}

double psi_at(const Trajectory& traj, int t) {
  const StepRecord& s = traj.steps[t];
  if (s.rate) return s.rate->psi_exact;
  return psi_exact(spectrum_at(traj, t - 1), spectrum_at(traj, t));
}

} // namespace

DistanceBound distance_product_bound(const Trajectory& traj, int t0, int T) {
  if (t0 < 0 || T < t0 || T + 1 >= traj.size())
    throw InvalidInput("distance_product_bound: window outside the trajectory");
  const BlockSpectrum& s0 = spectrum_at(traj, t0);
  const BlockSpectrum& sT = spectrum_at(traj, T);
  // Summed in logs: long windows push the product below the double range.
  double log_prod = 0.0;
  for (int t = t0 + 1; t <= T; ++t) log_prod += std::log(psi_at(traj, t));
  const CMat DPinv = assemble_D(s0).asDiagonal() * assemble_P_inv(s0);
  DistanceBound b;
  b.predicted = std::exp(std::log(spectral_norm(assemble_P(sT))) + log_prod +
                         std::log(spectral_norm(DPinv)) + std::log(stacked_error(traj, t0).norm()));
  b.actual = stacked_error(traj, T + 1).norm();
  return b;
}

DistanceBound distance_product_bound(const Trajectory& traj, int t0) {
  return distance_product_bound(traj, t0, traj.size() - 2);
}

DistanceAudit audit_distance_product(const Trajectory& traj, int t0) {
  DistanceAudit a;
  if (t0 < 0 || t0 + 1 >= traj.size()) return a;
  const BlockSpectrum& s0 = spectrum_at(traj, t0);
  const CMat DPinv = assemble_D(s0).asDiagonal() * assemble_P_inv(s0);
  const double log_head = std::log(spectral_norm(DPinv)) + std::log(stacked_error(traj, t0).norm());
  double log_prod = 0.0;
  for (int T = t0; T + 1 < traj.size(); ++T) {
    if (T > t0) log_prod += std::log(psi_at(traj, T));
    const double log_pred = std::log(spectral_norm(assemble_P(spectrum_at(traj, T)))) + log_prod + log_head;
    const double actual = stacked_error(traj, T + 1).norm();
    ++a.windows;
    if (actual == 0.0) continue;
    const double log_ratio = std::log(actual) - log_pred;
    if (log_ratio > std::log1p(1e-8)) a.ok = false;
    a.worst_ratio = std::max(a.worst_ratio, std::exp(log_ratio));
  }
  return a;
}

} // namespace hbm
