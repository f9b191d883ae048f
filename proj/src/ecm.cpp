#include "fdd/ecm.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fdd {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
const cplx kJ{0.0, 1.0};

// First-derivative matrix of ybar: column 4l+p is d ybar / d psi_{4l+p}.
CMat ul_first_derivs(const ParamVector& psi, const SystemConfig& cfg) {
  const int mn = cfg.n_subcarriers * cfg.n_antennas;
  CMat d(mn, psi.dim());
  for (int l = 0; l < psi.n_paths; ++l) {
    const SignatureDerivs sd = signature_derivs(psi.tau(l), psi.theta(l), cfg);
    const cplx a = psi.alpha(l);
    d.col(4 * l + 0) = a * sd.du_dtheta;
    d.col(4 * l + 1) = a * sd.du_dtau;
    d.col(4 * l + 2) = sd.u;
    d.col(4 * l + 3) = kJ * sd.u;
  }
  return d;
}

// Hermitian PSD solve; small 4L x 4L systems. The delay coordinates carry
// Hz-scale units, so the raw matrix is badly scaled even when the problem
// is perfectly identifiable: equilibrate by the diagonal before judging
// the condition number and throw only on genuine unidentifiability.
CMat psd_inverse(const RMat& info, const char* what) {
  const int n = static_cast<int>(info.rows());
  RVec d = info.diagonal();
  const double dmax = d.maxCoeff();
  for (int i = 0; i < n; ++i)
    d[i] = d[i] > 1e-300 * dmax ? 1.0 / std::sqrt(d[i]) : 0.0;
  const RMat scaled = d.asDiagonal() * info * d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<RMat> es(scaled);
  const RVec ev = es.eigenvalues();
  double emin = ev.minCoeff();
  double jitter = 0.0;
  if (emin <= 0.0 || 1.0 / emin > 1e12) {
    jitter = 1e-12;
    emin += jitter;
    if (emin <= 0.0 || 1.0 / emin > 1e12) {
      // name the path block with the weakest local information
      int worst = 0;
      double worst_min = std::numeric_limits<double>::max();
      for (int l = 0; l * 4 < n; ++l) {
        Eigen::SelfAdjointEigenSolver<RMat> bs(scaled.block(4 * l, 4 * l, 4, 4));
        if (bs.eigenvalues().minCoeff() < worst_min) {
          worst_min = bs.eigenvalues().minCoeff();
          worst = l;
        }
      }
      throw std::runtime_error(std::string(what) +
                               ": ill-conditioned information matrix, "
                               "unidentifiable parameters near path block " +
                               std::to_string(worst));
    }
  }
  const RMat reg = scaled + jitter * RMat::Identity(n, n);
  const RMat inv_scaled = reg.ldlt().solve(RMat::Identity(n, n));
  return (d.asDiagonal() * inv_scaled * d.asDiagonal()).cast<cplx>();
}

}  // namespace

ParamVector ParamVector::from_paths(const PathSet& p) {
  ParamVector v;
  v.n_paths = p.count();
  v.psi.resize(4 * v.n_paths);
  for (int l = 0; l < v.n_paths; ++l) {
    v.psi[4 * l + 0] = p.angle[l];
    v.psi[4 * l + 1] = p.delay[l];
    v.psi[4 * l + 2] = p.gain[l].real();
    v.psi[4 * l + 3] = p.gain[l].imag();
  }
  return v;
}

ParamVector ParamVector::from_estimate(const EstimatedPaths& e) {
  ParamVector v;
  v.n_paths = e.count();
  v.psi.resize(4 * v.n_paths);
  for (int l = 0; l < v.n_paths; ++l) {
    v.psi[4 * l + 0] = e.angle[l];
    v.psi[4 * l + 1] = e.delay[l];
    v.psi[4 * l + 2] = e.gain[l].real();
    v.psi[4 * l + 3] = e.gain[l].imag();
  }
  return v;
}

CMat dl_jacobian(const ParamVector& psi, double f, const SystemConfig& cfg) {
  const int n = cfg.n_antennas;
  const double d = cfg.spacing(), lam = cfg.dl_wavelength();
  CMat jac(psi.dim(), n);
  for (int l = 0; l < psi.n_paths; ++l) {
    const double th = psi.theta(l), tau = psi.tau(l);
    const cplx a = psi.alpha(l);
    const cplx delay_phase = std::exp(-kJ * (kTwoPi * f * tau));
    for (int c = 0; c < n; ++c) {
      const double w = kTwoPi * c * d / lam;
      const cplx base = std::exp(-kJ * (w * std::sin(th))) * delay_phase;
      jac(4 * l + 0, c) = a * (-kJ * (w * std::cos(th))) * base;
      jac(4 * l + 1, c) = a * (-kJ * (kTwoPi * f)) * base;
      jac(4 * l + 2, c) = base;
      jac(4 * l + 3, c) = kJ * base;
    }
  }
  return jac;
}

CVec reconstruct_ul_mean(const ParamVector& psi, const SystemConfig& cfg) {
  const int mn = cfg.n_subcarriers * cfg.n_antennas;
  CVec ybar = CVec::Zero(mn);
  for (int l = 0; l < psi.n_paths; ++l)
    ybar += psi.alpha(l) * signature(psi.tau(l), psi.theta(l), cfg);
  return ybar;
}

RMat fim(const ParamVector& psi, double noise_var, const SystemConfig& cfg) {
  const CMat d = ul_first_derivs(psi, cfg);
  return (2.0 / noise_var) * (d.adjoint() * d).real();
}

RMat ofim(const ParamVector& psi, const UlObservation& obs,
          const SystemConfig& cfg) {
  const CMat d = ul_first_derivs(psi, cfg);
  RMat info = (2.0 / obs.noise_var) * (d.adjoint() * d).real();

  const CVec r = obs.y - reconstruct_ul_mean(psi, cfg);
  // residual term: -(2/s2) Re{ r^H d2 ybar }; second partials live only
  // inside a path block
  for (int l = 0; l < psi.n_paths; ++l) {
    const SignatureDerivs sd = signature_derivs(psi.tau(l), psi.theta(l), cfg);
    const cplx a = psi.alpha(l);
    const int t = 4 * l + 0, u = 4 * l + 1, re = 4 * l + 2, im = 4 * l + 3;
    auto resid = [&](const CVec& d2) {
      return -(2.0 / obs.noise_var) * std::real(r.dot(d2));
    };
    const double s_tt = resid(a * sd.d2_thetatheta);
    const double s_uu = resid(a * sd.d2_tautau);
    const double s_tu = resid(a * sd.d2_tautheta);
    const double s_tre = resid(sd.du_dtheta);
    const double s_tim = resid(kJ * sd.du_dtheta);
    const double s_ure = resid(sd.du_dtau);
    const double s_uim = resid(kJ * sd.du_dtau);
    info(t, t) += s_tt;
    info(u, u) += s_uu;
    info(t, u) += s_tu;
    info(u, t) += s_tu;
    info(t, re) += s_tre;
    info(re, t) += s_tre;
    info(t, im) += s_tim;
    info(im, t) += s_tim;
    info(u, re) += s_ure;
    info(re, u) += s_ure;
    info(u, im) += s_uim;
    info(im, u) += s_uim;
  }
  if (!info.allFinite()) throw std::runtime_error("ofim: non-finite entries");
  return info;
}

CMat crlb(const ParamVector& psi, double noise_var, double f,
          const SystemConfig& cfg) {
  const RMat info = fim(psi, noise_var, cfg);
  const CMat inv = psd_inverse(info, "crlb");
  const CMat jac = dl_jacobian(psi, f, cfg);
  CMat c = jac.adjoint() * inv * jac;
  return (c + c.adjoint()) / 2.0;  // enforce exact Hermitian symmetry
}

EcmEstimate ecm_estimate(const ParamVector& psi_hat, const UlObservation& obs,
                         double f, const SystemConfig& cfg) {
  const RMat info = ofim(psi_hat, obs, cfg);
  const CMat inv = psd_inverse(info, "ecm_estimate");
  const CMat jac = dl_jacobian(psi_hat, f, cfg);
  const CMat full = jac.adjoint() * inv * jac;
  EcmEstimate out;
  out.crlb_full = (full + full.adjoint()) / 2.0;
  out.phi_hat = CMat::Zero(full.rows(), full.cols());
  for (int i = 0; i < full.rows(); ++i)
    out.phi_hat(i, i) = std::max(out.crlb_full(i, i).real(), 0.0);
  out.trace_mse = out.phi_hat.real().trace();
  return out;
}

EcmEstimate ecm_calibrate(const EcmEstimate& base,
                          const std::vector<double>& eta) {
  const auto l = static_cast<double>(eta.size());
  double corr2 = 0.0;
  for (double e : eta) {
    if (e < 0.0 || e > 1.0) throw std::invalid_argument("eta outside [0,1]");
    corr2 += e * e;
  }
  const double w_crlb = corr2 / l;
  const double w_prior = (l - corr2) / l;
  EcmEstimate out;
  const auto n = base.phi_hat.rows();
  out.phi_hat = w_crlb * base.phi_hat + w_prior * CMat::Identity(n, n);
  out.crlb_full = w_crlb * base.crlb_full + w_prior * CMat::Identity(n, n);
  out.trace_mse = out.phi_hat.real().trace();
  return out;
}

}  // namespace fdd
