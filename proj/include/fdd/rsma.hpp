/**
 * @file rsma.hpp
 * @brief Sum-SE precoder optimization for 1-layer rate splitting:
 *        Rayleigh-quotient SINR forms, LogSumExp-smoothed objective, the
 *        first-order-optimality matrices and the generalized power
 *        iteration, plus MRT/RZF/SDMA baselines.
 */
#pragma once

#include "fdd/channel.hpp"

namespace fdd {

// Stacked precoder [f_c; f_1; ...; f_K] of length N(K+1).
struct PrecoderStack {
  CVec f;
  int n_antennas = 0;

  int n_users() const {
    return static_cast<int>(f.size()) / n_antennas - 1;
  }
  auto common() { return f.segment(0, n_antennas); }
  auto common() const { return f.segment(0, n_antennas); }
  auto user(int k) { return f.segment((k + 1) * n_antennas, n_antennas); }
  auto user(int k) const {
    return f.segment((k + 1) * n_antennas, n_antennas);
  }
};

// Block-diagonal Hermitian matrix with K+1 blocks of size N; the only
// matrix shape the solver ever factors.
struct BlockDiag {
  std::vector<CMat> blocks;

  CVec apply(const CVec& x) const;
  CVec solve(const CVec& x) const;  // Hermitian-PD solve per block
  CMat dense() const;               // for tests and gradient oracles
};

// The SINR quadratics of all users, stored structurally (h_k, Phi_k) and
// evaluated blockwise; dense forms are materialized on demand for tests.
class QuadraticSet {
 public:
  QuadraticSet(std::vector<CVec> h_hat, std::vector<CMat> phi_hat,
               double snr_inv);

  int n_users() const { return static_cast<int>(h_.size()); }
  int n_antennas() const { return static_cast<int>(h_[0].size()); }
  int stack_dim() const { return n_antennas() * (n_users() + 1); }
  double snr_inv() const { return snr_inv_; }
  const CVec& h_hat(int k) const { return h_[k]; }
  const CMat& phi_hat(int k) const { return phi_[k]; }

  // Rayleigh-quotient numerators/denominators (1 + SINR forms).
  double quad_a_common(int k, const PrecoderStack& f) const;
  double quad_b_common(int k, const PrecoderStack& f) const;
  double quad_a_private(int k, const PrecoderStack& f) const;
  double quad_b_private(int k, const PrecoderStack& f) const;

  // Dense N(K+1) x N(K+1) materializations (test surface).
  CMat dense_a_common(int k) const;
  CMat dense_b_common(int k) const;
  CMat dense_a_private(int k) const;
  CMat dense_b_private(int k) const;

 private:
  std::vector<CVec> h_;
  std::vector<CMat> phi_;
  double snr_inv_;
};

// Smoothed minimum: -alpha log((1/n) sum exp(-x_i/alpha)), computed in the
// log domain. Satisfies min(x) <= result <= min(x) + alpha log(n).
double lse_min(const RVec& values, double alpha);

// Objective of the smoothed problem: g over the common log-quotients plus
// the sum of private log-quotients (bits/s/Hz). Exactly scale invariant.
// With common_enabled=false the g term is dropped (SDMA restriction).
double objective(const PrecoderStack& f, const QuadraticSet& q, double alpha,
                 bool common_enabled = true);

struct KktMatrices {
  BlockDiag a_kkt;  // lambda * (sum A_k/qA_k + sum w_k A_c(k)/qA_c(k))
  BlockDiag b_kkt;  // sum B_k/qB_k + sum w_k B_c(k)/qB_c(k)
  double lambda = 0.0;  // 2^objective
  RVec softmax_weights;
};
KktMatrices kkt_matrices(const PrecoderStack& f, const QuadraticSet& q,
                         double alpha, bool common_enabled = true);

struct GpiResult {
  PrecoderStack precoder;
  int iterations = 0;
  bool converged = false;
  double objective_bits = 0.0;  // with the exact min, not the LSE surrogate
  double alpha_final = 0.0;     // smoothing level after annealing
};

struct GpiOptions {
  double alpha = 0.1;
  double epsilon = 0.1;
  int max_iter = 500;
  bool common_enabled = true;  // false => SDMA restriction, f_c pinned to 0
};

GpiResult gpi_solve(const QuadraticSet& q, const GpiOptions& opt,
                    const PrecoderStack* init = nullptr);

// MRT: f_k = h_k scaled to per-user power 1/K; f_c = 0.
PrecoderStack baseline_mrt(const std::vector<CVec>& h_hat);
// RZF: f_k = (H H^H + snr_inv I)^-1 h_k, jointly normalized; f_c = 0.
PrecoderStack baseline_rzf(const std::vector<CVec>& h_hat, double snr_inv);
// SDMA: GPI on the private-only objective with the common stream disabled.
GpiResult baseline_sdma_gpi(const QuadraticSet& q, const GpiOptions& opt);

}  // namespace fdd
