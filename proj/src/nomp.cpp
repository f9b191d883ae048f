#include "fdd/nomp.hpp"

#include <cmath>
#include <iostream>
#include <numbers>

namespace fdd {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
const cplx kJ{0.0, 1.0};

double grid_tau(int i, int r_d, double df) { return i / (df * r_d); }
double grid_theta(int j, int r_a) {
  return -std::numbers::pi / 2 + std::numbers::pi * (j + 0.5) / r_a;
}

double gradient_rate(const NompConfig& ncfg, const SystemConfig& cfg) {
  if (ncfg.gradient_rate > 0.0) return ncfg.gradient_rate;
  const double mn = double(cfg.n_subcarriers) * cfg.n_antennas;
  return 1.0 / (mn * std::max(cfg.subcarrier_spacing * cfg.subcarrier_spacing,
                              1.0));
}

}  // namespace

double residual_objective(const CVec& y_r, cplx alpha, double tau,
                          double theta, const SystemConfig& cfg) {
  const CVec u = signature(tau, theta, cfg);
  const double mn = double(u.size());
  return 2.0 * std::real(y_r.dot(alpha * u)) - std::norm(alpha) * mn;
}

GridPoint detect_on_grid(const CVec& y_r, const SystemConfig& cfg,
                         const NompConfig& ncfg) {
  const int N = cfg.n_antennas, M = cfg.n_subcarriers;
  const int r_d = ncfg.grid_oversampling_delay * M;
  const int r_a = ncfg.grid_oversampling_angle * N;
  const double d = cfg.spacing(), df = cfg.subcarrier_spacing;
  const double mn = double(M) * N;

  // Per-angle winner, reduced across angles afterwards so the parallel
  // result is identical to the serial one.
  struct Best {
    double stat = -1.0;
    int di = 0;
  };
  std::vector<Best> best(r_a);

  // The delay-scan phase 2*pi*m_abs*df*tau_i with tau_i = i/(df*r_d)
  // reduces to 2*pi*(m_abs*i mod r_d)/r_d, so a single table of r_d unit
  // roots covers every (m, i) pair of the scan.
  std::vector<cplx> wheel(r_d);
  for (int p = 0; p < r_d; ++p)
    wheel[p] = std::exp(kJ * (kTwoPi * p / r_d));

#pragma omp parallel for schedule(static)
  for (int j = 0; j < r_a; ++j) {
    const double s = std::sin(grid_theta(j, r_a));
    // collapse the antenna axis: A_m = sum_n conj(angle factor) y[m,n]
    CVec a(M);
    for (int m = 0; m < M; ++m) {
      const int m_abs = cfg.m_lo() + m;
      const double w = kTwoPi * d / cfg.ul_wavelength(m_abs) * s;
      cplx acc = 0.0;
      for (int n = 0; n < N; ++n) acc += std::exp(kJ * (w * n)) * y_r[m * N + n];
      a[m] = acc;
    }
    Best b;
    for (int i = 0; i < r_d; ++i) {
      cplx acc = 0.0;
      for (int m = 0; m < M; ++m) {
        const int m_abs = cfg.m_lo() + m;
        int p = static_cast<int>(static_cast<long long>(m_abs) * i % r_d);
        if (p < 0) p += r_d;
        acc += wheel[p] * a[m];
      }
      const double stat = std::norm(acc) / mn;
      if (stat > b.stat) {
        b.stat = stat;
        b.di = i;
      }
    }
    best[j] = b;
  }

  int bj = 0;
  for (int j = 1; j < r_a; ++j) {
    const bool better = best[j].stat > best[bj].stat ||
                        (best[j].stat == best[bj].stat &&
                         best[j].di < best[bj].di);
    if (better) bj = j;
  }
  GridPoint out;
  out.tau = grid_tau(best[bj].di, r_d, df);
  out.theta = grid_theta(bj, r_a);
  out.statistic = best[bj].stat;
  return out;
}

namespace reference {
GridPoint detect_on_grid(const CVec& y_r, const SystemConfig& cfg,
                         const NompConfig& ncfg) {
  const int M = cfg.n_subcarriers, N = cfg.n_antennas;
  const int r_d = ncfg.grid_oversampling_delay * M;
  const int r_a = ncfg.grid_oversampling_angle * N;
  const double mn = double(M) * N;
  GridPoint out;
  out.statistic = -1.0;
  for (int i = 0; i < r_d; ++i) {
    for (int j = 0; j < r_a; ++j) {
      const double tau = grid_tau(i, r_d, cfg.subcarrier_spacing);
      const double theta = grid_theta(j, r_a);
      const CVec u = signature(tau, theta, cfg);
      const double stat = std::norm(u.dot(y_r)) / mn;
      if (stat > out.statistic) {
        out.statistic = stat;
        out.tau = tau;
        out.theta = theta;
      }
    }
  }
  return out;
}
}  // namespace reference

cplx gain_estimate(const CVec& y_r, double tau, double theta,
                   const SystemConfig& cfg) {
  const CVec u = signature(tau, theta, cfg);
  return u.dot(y_r) / double(u.size());
}

RefineResult newton_refine(const CVec& y_r, cplx alpha, double tau,
                           double theta, const SystemConfig& cfg,
                           const NompConfig& ncfg) {
  const SignatureDerivs sd = signature_derivs(tau, theta, cfg);
  const double mn = double(sd.u.size());

  // f = 2 Re{y_r^H alpha u} - |alpha|^2 MN; ||u||^2 is parameter free.
  const double g_tau = 2.0 * std::real(y_r.dot(alpha * sd.du_dtau));
  const double g_theta = 2.0 * std::real(y_r.dot(alpha * sd.du_dtheta));
  const double h_tt = 2.0 * std::real(y_r.dot(alpha * sd.d2_tautau));
  const double h_aa = 2.0 * std::real(y_r.dot(alpha * sd.d2_thetatheta));
  const double h_ta = 2.0 * std::real(y_r.dot(alpha * sd.d2_tautheta));

  if (!std::isfinite(g_tau) || !std::isfinite(g_theta) ||
      !std::isfinite(h_tt) || !std::isfinite(h_aa) || !std::isfinite(h_ta)) {
    std::cerr << "nomp: non-finite derivatives at (tau=" << tau
              << ", theta=" << theta << "); step skipped\n";
    return {tau, theta, false};
  }

  const double eps_h = 1e-12 * mn;
  const double tr = h_tt + h_aa, det = h_tt * h_aa - h_ta * h_ta;
  const double disc = std::sqrt(std::max(tr * tr - 4.0 * det, 0.0));
  const bool neg_def = (tr + disc) / 2.0 < -eps_h;  // largest eigenvalue

  double dtau, dtheta;
  if (neg_def) {
    dtau = -(h_aa * g_tau - h_ta * g_theta) / det;
    dtheta = -(h_tt * g_theta - h_ta * g_tau) / det;
  } else {
    const double mu = gradient_rate(ncfg, cfg);
    dtau = mu * g_tau;
    dtheta = mu * g_theta;
  }

  const int r_d = ncfg.grid_oversampling_delay * cfg.n_subcarriers;
  const int r_a = ncfg.grid_oversampling_angle * cfg.n_antennas;
  const double df = cfg.subcarrier_spacing;
  const double cap_tau = ncfg.newton_step_cap / (df * r_d);
  const double cap_theta = ncfg.newton_step_cap * std::numbers::pi / r_a;
  dtau = std::clamp(dtau, -cap_tau, cap_tau);
  dtheta = std::clamp(dtheta, -cap_theta, cap_theta);

  double tau2 = tau + dtau, theta2 = theta + dtheta;
  const double period = 1.0 / df;
  tau2 -= period * std::floor(tau2 / period);  // wrap into [0, 1/df)
  const double edge = std::numbers::pi / 2 - 1e-9;
  theta2 = std::clamp(theta2, -edge, edge);

  if (residual_objective(y_r, alpha, tau2, theta2, cfg) <
      residual_objective(y_r, alpha, tau, theta, cfg))
    return {tau, theta, false};
  return {tau2, theta2, tau2 != tau || theta2 != theta};
}

std::vector<cplx> ls_update(const CVec& y, std::vector<cplx>& gains,
                            std::vector<double>& delays,
                            std::vector<double>& angles,
                            const SystemConfig& cfg) {
  const double df = cfg.subcarrier_spacing;
  // merge near-identical (tau, theta) pairs up front; duplicates make the
  // signature matrix rank deficient
  for (size_t a = 0; a < delays.size(); ++a) {
    for (size_t b = a + 1; b < delays.size();) {
      const bool dup = std::abs(delays[a] - delays[b]) * df < 1e-7 &&
                       std::abs(angles[a] - angles[b]) < 1e-7;
      if (dup) {
        if (std::abs(gains[b]) > std::abs(gains[a])) {
          gains[a] = gains[b];
          delays[a] = delays[b];
          angles[a] = angles[b];
        }
        std::cerr << "nomp: merged duplicate path " << b << " into " << a
                  << "\n";
        gains.erase(gains.begin() + b);
        delays.erase(delays.begin() + b);
        angles.erase(angles.begin() + b);
      } else {
        ++b;
      }
    }
  }
  const int p = static_cast<int>(delays.size());
  CMat basis(y.size(), p);
  for (int c = 0; c < p; ++c)
    basis.col(c) = signature(delays[c], angles[c], cfg);
  const CVec sol = basis.colPivHouseholderQr().solve(y);
  for (int c = 0; c < p; ++c) gains[c] = sol[c];
  return gains;
}

EstimatedPaths run_nomp(const UlObservation& obs, const SystemConfig& cfg,
                        const NompConfig& ncfg) {
  const int M = cfg.n_subcarriers, N = cfg.n_antennas;
  const int r_d = ncfg.grid_oversampling_delay * M;
  const int r_a = ncfg.grid_oversampling_angle * N;
  const double cfar_threshold =
      obs.noise_var *
      std::log(double(r_d) * r_a / ncfg.false_alarm_rate);

  std::vector<cplx> gains;
  std::vector<double> delays, angles;
  CVec y_r = obs.y;
  EstimatedPaths out;

  auto rebuild_residual = [&]() {
    y_r = obs.y;
    for (size_t l = 0; l < gains.size(); ++l)
      y_r -= gains[l] * signature(delays[l], angles[l], cfg);
  };

  const int target = ncfg.stop_mode == StopMode::kKnownL
                         ? std::min(ncfg.known_paths, ncfg.max_paths)
                         : ncfg.max_paths;
  while (static_cast<int>(gains.size()) < target) {
    const GridPoint det = detect_on_grid(y_r, cfg, ncfg);
    if (ncfg.stop_mode == StopMode::kCfar && det.statistic < cfar_threshold)
      break;
    double tau = det.tau, theta = det.theta;
    cplx alpha = gain_estimate(y_r, tau, theta, cfg);
    gains.push_back(alpha);
    delays.push_back(tau);
    angles.push_back(theta);

    // cyclic refinement of everything found so far, gain refreshed per path
    for (int cycle = 0; cycle < ncfg.refine_cycles; ++cycle) {
      for (size_t l = 0; l < gains.size(); ++l) {
        CVec y_l = obs.y;
        for (size_t p = 0; p < gains.size(); ++p)
          if (p != l) y_l -= gains[p] * signature(delays[p], angles[p], cfg);
        const RefineResult r =
            newton_refine(y_l, gains[l], delays[l], angles[l], cfg, ncfg);
        delays[l] = r.tau;
        angles[l] = r.theta;
        gains[l] = gain_estimate(y_l, delays[l], angles[l], cfg);
      }
    }

    ls_update(obs.y, gains, delays, angles, cfg);
    rebuild_residual();
  }

  if (ncfg.stop_mode == StopMode::kCfar &&
      static_cast<int>(gains.size()) == ncfg.max_paths) {
    const GridPoint det = detect_on_grid(y_r, cfg, ncfg);
    out.truncated = det.statistic >= cfar_threshold;
  }

  // strongest path first
  std::vector<int> idx(gains.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return std::abs(gains[a]) > std::abs(gains[b]);
  });
  for (int i : idx) {
    out.gain.push_back(gains[i]);
    out.delay.push_back(delays[i]);
    out.angle.push_back(angles[i]);
  }
  out.residual_energy = y_r.squaredNorm();
  return out;
}

CVec reconstruct_dl_channel(const EstimatedPaths& est,
                            const std::vector<double>& eta, double f,
                            const SystemConfig& cfg) {
  const int N = cfg.n_antennas;
  const double d = cfg.spacing(), lam = cfg.dl_wavelength();
  CVec h = CVec::Zero(N);
  for (int l = 0; l < est.count(); ++l) {
    const double e = l < static_cast<int>(eta.size()) ? eta[l] : 1.0;
    const cplx phase = std::exp(-kJ * (kTwoPi * f * est.delay[l]));
    const double w = kTwoPi * d / lam * std::sin(est.angle[l]);
    for (int n = 0; n < N; ++n)
      h[n] += e * est.gain[l] * std::exp(-kJ * (w * n)) * phase;
  }
  return h;
}

}  // namespace fdd
