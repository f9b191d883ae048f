/**
 * @file channel.hpp
 * @brief Multipath channel model: UL/DL channel synthesis, sounding
 *        signatures and noisy UL observations.
 */
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <random>
#include <vector>

#include "fdd/config.hpp"

namespace fdd {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

using Rng = std::mt19937_64;

// Per-user multipath parameters. Gains are the UL gains; DL gains are
// produced on demand through the Gauss-Markov model.
struct PathSet {
  std::vector<cplx> gain;     // alpha^ul per path
  std::vector<double> delay;  // tau in (0, 1/df)
  std::vector<double> angle;  // theta in (-pi/2, pi/2)
  std::vector<double> corr;   // eta in [0,1]
  double path_power = 0.0;    // sigma^2_path = 1/(N L)

  int count() const { return static_cast<int>(gain.size()); }
};

// Stacked MN-dimensional UL sounding measurement. Layout is sub-carrier
// major, antenna minor: (m,n) -> (m-1)*N + n with m in 1..M, n in 0..N-1.
struct UlObservation {
  CVec y;
  double noise_var = 0.0;
};

// Sounding signature u(tau, theta): entry (m,n) is
// exp(-j2pi n d sin(theta)/lambda_m) * exp(-j2pi m' df tau), m' = m_lo+m-1.
CVec signature(double tau, double theta, const SystemConfig& cfg);

// First and second partials of u with respect to (tau, theta). Everything
// downstream of the detector (Newton refinement, O-FIM) lives on these.
struct SignatureDerivs {
  CVec u;
  CVec du_dtau, du_dtheta;
  CVec d2_tautau, d2_thetatheta, d2_tautheta;
};
SignatureDerivs signature_derivs(double tau, double theta,
                                 const SystemConfig& cfg);

// Draws L_k Rician path gains, uniform delays on (0, 1/df) and angles on
// (-pi/2, pi/2); paths come back sorted by descending |gain|. Correlations
// are filled with 1 (callers overwrite for non-reciprocal studies).
PathSet sample_paths(const SystemConfig& cfg, int n_paths, double kappa,
                     Rng& rng);

// Gauss-Markov DL gains: alpha^dl = eta alpha^ul + sqrt(1-eta^2) beta.
std::vector<cplx> dl_gains(const PathSet& paths, Rng& rng);

// DL channel h(f) at extrapolation range f, given per-path DL gains.
CVec dl_channel(const std::vector<cplx>& gains_dl, const PathSet& paths,
                double f, const SystemConfig& cfg);

// UL channel on absolute sub-carrier index m' (for self-tests).
CVec ul_channel(const PathSet& paths, int m_abs, const SystemConfig& cfg);

// y = sum_l alpha_l u(tau_l, theta_l) + w. Noise variance is set from the
// realized signal power: 10 log10(||s||^2 / (MN sigma^2)) = ul_snr_db.
UlObservation simulate_ul_observation(const PathSet& paths,
                                      const SystemConfig& cfg,
                                      double ul_snr_db, Rng& rng);

}  // namespace fdd
