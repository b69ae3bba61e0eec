#pragma once

#include <vector>

#include "hbm/linalg.hpp"
#include "hbm/problems.hpp"

namespace hbm {

struct Trajectory;

// One 2x2 block of the transition matrix in its eigenbasis.
struct Block {
  double lambda = 0.0;  // eigenvalue of eta*H
  Complex z;            // upper-half-plane root of x^2 - (1+beta-lambda)x + beta
  Mat2c Q;              // [[z, conj z], [1, 1]]
};

struct BlockSpectrum {
  std::vector<Block> blocks;  // lambda descending
  double beta = 0.0;
  Mat U;  // eigenbasis of H, columns match blocks
  bool valid = false;
  double min_imag = 0.0;
};

struct RateReport {
  double psi_exact = 0.0;
  double psi_block = 0.0;     // NaN when the eigenbases differ
  double bound_shared_basis = 0.0;  // NaN when the eigenbases differ
  double extra_factor = 0.0;  // NaN when the eigenbases differ
  std::vector<double> phi_terms;
  double basis_drift = 0.0;
};

// [[(1+beta)I - eta H, -beta I], [I, 0]]
Mat build_A(const SymMat& H_eta, double beta);

// valid iff every eigenvalue lambda of H_eta satisfies
// (1 - sqrt(lambda))^2 < beta <= 1 with Im z >= 1e-14.
BlockSpectrum decompose(const SymMat& H_eta, double beta);
BlockSpectrum decompose(const SymEigen& eig_of_H_eta, double beta);

CMat assemble_P(const BlockSpectrum& s);
// Closed form Q^-1 Ptilde' U', each Q_i inverted through its adjugate.
CMat assemble_P_inv(const BlockSpectrum& s);
Eigen::VectorXcd assemble_D(const BlockSpectrum& s);
CMat reconstruct(const BlockSpectrum& s);

// ||Q_t^-1 Q_{t-1}|| for block i. Dispatches on beta_t == beta_{t-1}.
double transfer_block_norm(const BlockSpectrum& prev, const BlockSpectrum& cur, int i);
// The two closed forms behind the dispatch, exposed so they can be compared.
double transfer_block_norm_general(const BlockSpectrum& prev, const BlockSpectrum& cur, int i);
double transfer_block_norm_const_beta(const BlockSpectrum& prev, const BlockSpectrum& cur, int i);
// Same quantity straight from the entries a, b of G = [[a, b], [conj b, conj a]].
double transfer_block_norm_direct(const BlockSpectrum& prev, const BlockSpectrum& cur, int i);

double psi_exact(const BlockSpectrum& prev, const BlockSpectrum& cur);
// sqrt(beta_t) max_i transfer_block_norm; exact only for a shared eigenbasis.
double psi_block(const BlockSpectrum& prev, const BlockSpectrum& cur);

struct SharedBasisBound {
  double bound = 0.0;
  double extra_factor = 0.0;
  std::vector<double> phi;
};
SharedBasisBound shared_basis_bound(const BlockSpectrum& prev, const BlockSpectrum& cur);

// || |U_t' U_{t-1}| - I ||_F with the absolute value taken entrywise, so a
// flipped eigenvector sign does not count as drift.
double basis_drift(const BlockSpectrum& prev, const BlockSpectrum& cur);

// psi_block and the bound are filled only when basis_drift <= 1e-8.
RateReport rate_report(const BlockSpectrum& prev, const BlockSpectrum& cur);

// L_H ||w_t - w_prev||
double lambda_drift_bound(const Problem& p, const Vec& w_t, const Vec& w_prev);

struct DriftAudit {
  bool ok = true;
  double worst_ratio = 0.0;      // max |dlambda| / (L_H ||dw||)
  double worst_eta_ratio = 0.0;  // same with eta L_H in the denominator
  int worst_t = -1;
  int steps = 0;
};
// Compares eigenvalues of consecutive average Hessians with L_H ||dw||.
DriftAudit audit_lambda_drift(const Trajectory& traj);

struct DistanceBound {
  double predicted = 0.0;
  double actual = 0.0;
};
// ||P_T|| prod_{t0<t<=T} psi_t ||D_t0 P_t0^-1|| ||(xi_t0; xi_t0-1)|| against
// ||(xi_T+1; xi_T)||. Needs recorded spectra on [t0, T] and row T+1.
DistanceBound distance_product_bound(const Trajectory& traj, int t0, int T);
DistanceBound distance_product_bound(const Trajectory& traj, int t0);

struct DistanceAudit {
  bool ok = true;
  double worst_ratio = 0.0;  // max actual / predicted
  int windows = 0;
};
// Every window end T in [t0, last - 1].
DistanceAudit audit_distance_product(const Trajectory& traj, int t0);

} // namespace hbm
