#include "fdd/channel.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>

namespace fdd {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
const cplx kJ{0.0, 1.0};
}  // namespace

CVec signature(double tau, double theta, const SystemConfig& cfg) {
  const int N = cfg.n_antennas, M = cfg.n_subcarriers;
  const double d = cfg.spacing(), df = cfg.subcarrier_spacing;
  const double s = std::sin(theta);
  CVec u(M * N);
  for (int m = 0; m < M; ++m) {
    const int m_abs = cfg.m_lo() + m;
    const double lam = cfg.ul_wavelength(m_abs);
    const cplx delay_phase = std::exp(-kJ * (kTwoPi * m_abs * df * tau));
    const double ang = kTwoPi * d / lam * s;
    for (int n = 0; n < N; ++n)
      u[m * N + n] = std::exp(-kJ * (ang * n)) * delay_phase;
  }
  return u;
}

SignatureDerivs signature_derivs(double tau, double theta,
                                 const SystemConfig& cfg) {
  const int N = cfg.n_antennas, M = cfg.n_subcarriers;
  const double d = cfg.spacing(), df = cfg.subcarrier_spacing;
  const double s = std::sin(theta), c = std::cos(theta);
  SignatureDerivs out;
  out.u.resize(M * N);
  out.du_dtau.resize(M * N);
  out.du_dtheta.resize(M * N);
  out.d2_tautau.resize(M * N);
  out.d2_thetatheta.resize(M * N);
  out.d2_tautheta.resize(M * N);
  for (int m = 0; m < M; ++m) {
    const int m_abs = cfg.m_lo() + m;
    const double lam = cfg.ul_wavelength(m_abs);
    const cplx dtau = -kJ * (kTwoPi * m_abs * df);  // d/dtau log-factor
    const cplx delay_phase = std::exp(dtau * tau);
    const double w = kTwoPi * d / lam;  // spatial frequency scale
    for (int n = 0; n < N; ++n) {
      const int i = m * N + n;
      const cplx ue = std::exp(-kJ * (w * n * s)) * delay_phase;
      const cplx dth = -kJ * (w * n * c);          // d/dtheta log-factor
      const cplx dth2 = dth * dth + kJ * (w * n * s);
      out.u[i] = ue;
      out.du_dtau[i] = dtau * ue;
      out.du_dtheta[i] = dth * ue;
      out.d2_tautau[i] = dtau * dtau * ue;
      out.d2_thetatheta[i] = dth2 * ue;
      out.d2_tautheta[i] = dtau * dth * ue;
    }
  }
  return out;
}

PathSet sample_paths(const SystemConfig& cfg, int n_paths, double kappa,
                     Rng& rng) {
  if (n_paths < 1) throw std::invalid_argument("n_paths must be >= 1");
  PathSet p;
  p.path_power = 1.0 / (cfg.n_antennas * n_paths);
  const double mean = std::sqrt(kappa * p.path_power / (kappa + 1.0));
  const double var = p.path_power / (kappa + 1.0);
  std::normal_distribution<double> gauss(0.0, std::sqrt(var / 2.0));
  std::uniform_real_distribution<double> udel(0.0, 1.0 / cfg.subcarrier_spacing);
  std::uniform_real_distribution<double> uang(-std::numbers::pi / 2,
                                              std::numbers::pi / 2);
  p.gain.resize(n_paths);
  p.delay.resize(n_paths);
  p.angle.resize(n_paths);
  p.corr.assign(n_paths, 1.0);
  for (int l = 0; l < n_paths; ++l) {
    p.gain[l] = cplx(mean + gauss(rng), gauss(rng));
    double tau;
    do {
      tau = udel(rng);
    } while (tau <= 0.0);  // open interval
    p.delay[l] = tau;
    p.angle[l] = uang(rng);
  }
  // sort triplets by descending |alpha|
  std::vector<int> idx(n_paths);
  for (int i = 0; i < n_paths; ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return std::abs(p.gain[a]) > std::abs(p.gain[b]);
  });
  PathSet out = p;
  for (int i = 0; i < n_paths; ++i) {
    out.gain[i] = p.gain[idx[i]];
    out.delay[i] = p.delay[idx[i]];
    out.angle[i] = p.angle[idx[i]];
    out.corr[i] = p.corr[idx[i]];
  }
  return out;
}

std::vector<cplx> dl_gains(const PathSet& paths, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, std::sqrt(paths.path_power / 2));
  std::vector<cplx> out(paths.count());
  for (int l = 0; l < paths.count(); ++l) {
    const double eta = paths.corr[l];
    if (eta < 0.0 || eta > 1.0)
      throw std::invalid_argument("eta outside [0,1]");
    if (eta == 1.0) {
      out[l] = paths.gain[l];  // bit-for-bit identity, no innovation drawn
      continue;
    }
    const cplx beta(gauss(rng), gauss(rng));
    out[l] = eta * paths.gain[l] + std::sqrt(1.0 - eta * eta) * beta;
  }
  return out;
}

CVec dl_channel(const std::vector<cplx>& gains_dl, const PathSet& paths,
                double f, const SystemConfig& cfg) {
  const int N = cfg.n_antennas;
  const double d = cfg.spacing(), lam = cfg.dl_wavelength();
  CVec h = CVec::Zero(N);
  for (int l = 0; l < paths.count(); ++l) {
    const cplx phase = std::exp(-kJ * (kTwoPi * f * paths.delay[l]));
    const double w = kTwoPi * d / lam * std::sin(paths.angle[l]);
    for (int n = 0; n < N; ++n)
      h[n] += gains_dl[l] * std::exp(-kJ * (w * n)) * phase;
  }
  return h;
}

CVec ul_channel(const PathSet& paths, int m_abs, const SystemConfig& cfg) {
  const int N = cfg.n_antennas;
  const double d = cfg.spacing(), df = cfg.subcarrier_spacing;
  const double lam = cfg.ul_wavelength(m_abs);
  CVec h = CVec::Zero(N);
  for (int l = 0; l < paths.count(); ++l) {
    const cplx phase = std::exp(-kJ * (kTwoPi * m_abs * df * paths.delay[l]));
    const double w = kTwoPi * d / lam * std::sin(paths.angle[l]);
    for (int n = 0; n < N; ++n)
      h[n] += paths.gain[l] * std::exp(-kJ * (w * n)) * phase;
  }
  return h;
}

UlObservation simulate_ul_observation(const PathSet& paths,
                                      const SystemConfig& cfg,
                                      double ul_snr_db, Rng& rng) {
  const int MN = cfg.n_subcarriers * cfg.n_antennas;
  CVec s = CVec::Zero(MN);
  for (int l = 0; l < paths.count(); ++l)
    s += paths.gain[l] * signature(paths.delay[l], paths.angle[l], cfg);
  const double sig_power = s.squaredNorm() / MN;
  const double sigma2 = sig_power * std::pow(10.0, -ul_snr_db / 10.0);
  UlObservation obs;
  obs.noise_var = sigma2;
  obs.y = s;
  if (sigma2 > 0.0) {
    std::normal_distribution<double> gauss(0.0, std::sqrt(sigma2 / 2.0));
    for (int i = 0; i < MN; ++i) obs.y[i] += cplx(gauss(rng), gauss(rng));
  }
  return obs;
}

}  // namespace fdd
