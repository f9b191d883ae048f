/**
 * @file ecm.hpp
 * @brief Error-covariance estimation for the reconstructed DL channel:
 *        channel Jacobian, (observed) Fisher information, CRLB transform
 *        and the correlation-calibrated diagonal estimate.
 */
#pragma once

#include "fdd/channel.hpp"
#include "fdd/nomp.hpp"

namespace fdd {

// Flat real parameter vector, 4 entries per path ordered
// (theta, tau, Re alpha, Im alpha).
struct ParamVector {
  RVec psi;
  int n_paths = 0;

  static ParamVector from_paths(const PathSet& p);
  static ParamVector from_estimate(const EstimatedPaths& e);

  double theta(int l) const { return psi[4 * l + 0]; }
  double tau(int l) const { return psi[4 * l + 1]; }
  cplx alpha(int l) const { return {psi[4 * l + 2], psi[4 * l + 3]}; }
  int dim() const { return 4 * n_paths; }
};

struct EcmEstimate {
  CMat phi_hat;    // N x N, diagonal by construction
  CMat crlb_full;  // the unmasked sandwich J^H I^-1 J
  double trace_mse = 0.0;
};

// Jacobian of the DL channel w.r.t. psi at extrapolation range f, taken at
// the UL-gain parameterization (eta scaling enters via ecm_calibrate).
// Row 4l+p holds the partial of h^T w.r.t. the p-th parameter of path l.
CMat dl_jacobian(const ParamVector& psi, double f, const SystemConfig& cfg);

// Mean UL observation ybar(psi) = sum_l alpha_l u(tau_l, theta_l).
CVec reconstruct_ul_mean(const ParamVector& psi, const SystemConfig& cfg);

// Observed Fisher information: negative log-likelihood Hessian at psi,
// with all first/second partials analytic (cross-path second partials
// vanish since ybar is a sum over paths).
RMat ofim(const ParamVector& psi, const UlObservation& obs,
          const SystemConfig& cfg);

// Expected Fisher information: the Gram (first) term alone.
RMat fim(const ParamVector& psi, double noise_var, const SystemConfig& cfg);

// CRLB pushed through the channel Jacobian: C(f) = J^H I(psi)^-1 J.
// Throws when the FIM condition number exceeds 1e12, naming the worst
// path block (coincident paths are unidentifiable).
CMat crlb(const ParamVector& psi, double noise_var, double f,
          const SystemConfig& cfg);

// Diagonal ECM estimate from the O-FIM sandwich (Hadamard mask with I_N).
EcmEstimate ecm_estimate(const ParamVector& psi_hat, const UlObservation& obs,
                         double f, const SystemConfig& cfg);

// Gain-correlation calibration:
// phi = (sum eta^2 / L) Ctilde(f) + (sum (1 - eta^2) / L) I_N.
EcmEstimate ecm_calibrate(const EcmEstimate& base,
                          const std::vector<double>& eta);

}  // namespace fdd
