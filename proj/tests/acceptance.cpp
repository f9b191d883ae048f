// End-to-end acceptance gate. Each numbered check prints a single
// pass/fail line with its measured statistic; the process exits nonzero
// if any check fails.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <vector>

#include "fdd/eval.hpp"
#include "fdd/selftest.hpp"

using namespace fdd;
using std::numbers::pi;

namespace {

int g_failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] %d %-34s %s\n", pass ? "PASS" : "FAIL", id, name,
              detail.c_str());
  if (!pass) ++g_failures;
}

double db(double x) { return 10.0 * std::log10(x); }

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / double(v.size());
}

double median(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

ParamVector random_params(int n_paths, const SystemConfig& cfg, Rng& rng) {
  std::uniform_real_distribution<double> uth(-1.3, 1.3);
  std::uniform_real_distribution<double> ut(0.05 / cfg.subcarrier_spacing,
                                            0.95 / cfg.subcarrier_spacing);
  std::uniform_real_distribution<double> umag(0.5, 1.5);
  std::uniform_real_distribution<double> uph(0.0, 2.0 * pi);
  ParamVector p;
  p.n_paths = n_paths;
  p.psi = RVec(4 * n_paths);
  for (int l = 0; l < n_paths; ++l) {
    const cplx a = std::polar(umag(rng), uph(rng));
    p.psi[4 * l + 0] = uth(rng);
    p.psi[4 * l + 1] = ut(rng);
    p.psi[4 * l + 2] = a.real();
    p.psi[4 * l + 3] = a.imag();
  }
  return p;
}

// ---------------------------------------------------------------------
// 1. Monte Carlo MSE tracks the reconstruction bound across the
//    extrapolation sweep: mean MSE within [tr C, tr C + 3 dB] per point
//    and the per-trial |MSE - tr Ctilde| gap within 3 dB in median.
void check_crlb_tracking() {
  const double kSpacing = 5.76e6;  // keeps the sounding aperture / range
                                   // ratio comparable to the full scale
  Scenario sc;
  sc.system.n_antennas = 16;
  sc.system.n_subcarriers = 32;
  sc.system.n_users = 4;  // more user draws per trial for tighter means
  sc.system.subcarrier_spacing = kSpacing;
  sc.system.ul_carrier = 7.15e9;
  sc.n_paths = 3;
  sc.ul_snr_db = 10.0;
  sc.nomp.refine_cycles = 12;  // near-efficient refinement regime
  const int trials = 300;
  bool pass = true;
  std::string detail;
  for (double f : {0.0, 100e6, 300e6, 600e6}) {
    sc.system.dl_carrier = sc.system.ul_carrier + f;
    std::vector<double> mse, trc, gap;
    for (int t = 0; t < trials; ++t) {
      const TrialResult r = run_trial(sc, {}, derive_seed(1001, 0, t));
      mse.push_back(r.mse);
      trc.push_back(r.crlb_trace);
      gap.push_back(r.mse / r.ecm_trace);
    }
    const double ratio_db = db(mean(mse) / mean(trc));
    const double med_gap_db = std::abs(db(median(gap)));
    if (!(ratio_db >= 0.0 && ratio_db <= 3.0)) pass = false;
    if (!(med_gap_db <= 3.0)) pass = false;
    char buf[96];
    std::snprintf(buf, sizeof buf, " f=%gMHz:%.2f/%.2fdB", f / 1e6, ratio_db,
                  med_gap_db);
    detail += buf;
  }
  report(1, "crlb tracking over extrapolation", pass, detail);
}

// ---------------------------------------------------------------------
// 2. Observed information matches the finite-difference Hessian of the
//    Gaussian log-likelihood, element-wise, on random instances.
void check_ofim_fd() {
  SystemConfig cfg;
  cfg.n_antennas = 8;
  cfg.n_subcarriers = 16;
  Rng rng(2002);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int inst = 0; inst < 50; ++inst) {
    const ParamVector p = random_params(2, cfg, rng);
    UlObservation obs;
    obs.noise_var = 0.05;
    obs.y = reconstruct_ul_mean(p, cfg);
    for (int i = 0; i < obs.y.size(); ++i) {
      obs.y[i] += std::sqrt(obs.noise_var / 2) * cplx(g(rng), g(rng));
    }
    const RMat i_obs = ofim(p, obs, cfg);
    auto loglik = [&](const ParamVector& q) {
      return -(obs.y - reconstruct_ul_mean(q, cfg)).squaredNorm() /
             obs.noise_var;
    };
    auto range = [&](int w) {
      return (w % 4 == 0)   ? pi
             : (w % 4 == 1) ? 1.0 / cfg.subcarrier_spacing
                            : 1.0;
    };
    for (int u = 0; u < p.dim(); ++u) {
      for (int v = u; v < p.dim(); ++v) {
        const double hu = 1e-5 * range(u), hv = 1e-5 * range(v);
        auto at = [&](double du, double dv) {
          ParamVector q = p;
          q.psi[u] += du;
          q.psi[v] += dv;
          return loglik(q);
        };
        const double hess =
            (at(hu, hv) - at(hu, -hv) - at(-hu, hv) + at(-hu, -hv)) /
            (4 * hu * hv);
        const double denom = std::max(std::abs(hess), 1e-6 * i_obs.norm());
        worst = std::max(worst, std::abs(i_obs(u, v) + hess) / denom);
      }
    }
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "max rel err %.2e", worst);
  report(2, "observed information vs FD Hessian", worst < 1e-4, buf);
}

// ---------------------------------------------------------------------
// 3. The noise expectation of the observed information at the true
//    parameters recovers the expected information.
void check_fim_expectation() {
  SystemConfig cfg;
  cfg.n_antennas = 8;
  cfg.n_subcarriers = 16;
  Rng rng(3003);
  std::normal_distribution<double> g;
  const ParamVector p = random_params(2, cfg, rng);
  const double sigma2 = 0.2;
  const RMat i_exp = fim(p, sigma2, cfg);
  const CVec mean_y = reconstruct_ul_mean(p, cfg);
  RMat acc = RMat::Zero(p.dim(), p.dim());
  const int draws = 2000;
  for (int t = 0; t < draws; ++t) {
    UlObservation obs;
    obs.noise_var = sigma2;
    obs.y = mean_y;
    for (int i = 0; i < obs.y.size(); ++i) {
      obs.y[i] += std::sqrt(sigma2 / 2) * cplx(g(rng), g(rng));
    }
    acc += ofim(p, obs, cfg);
  }
  acc /= draws;
  const double rel = (acc - i_exp).norm() / i_exp.norm();
  char buf[64];
  std::snprintf(buf, sizeof buf, "Frobenius rel err %.4f", rel);
  report(3, "mean observed info equals the FIM", rel < 0.03, buf);
}

// ---------------------------------------------------------------------
// 4. Correlation-calibration degenerate reductions are exact.
void check_calibration_reductions() {
  SystemConfig cfg;
  cfg.n_antennas = 8;
  cfg.n_subcarriers = 16;
  Rng rng(4004);
  std::normal_distribution<double> g;
  const ParamVector p = random_params(2, cfg, rng);
  UlObservation obs;
  obs.noise_var = 0.1;
  obs.y = reconstruct_ul_mean(p, cfg);
  for (int i = 0; i < obs.y.size(); ++i) {
    obs.y[i] += std::sqrt(obs.noise_var / 2) * cplx(g(rng), g(rng));
  }
  const EcmEstimate base = ecm_estimate(p, obs, 300e6, cfg);
  const EcmEstimate e1 = ecm_calibrate(base, {1.0, 1.0});
  const EcmEstimate e0 = ecm_calibrate(base, {0.0, 0.0});
  const double d1 = (e1.phi_hat - base.phi_hat).norm();
  const double d0 = (e0.phi_hat - CMat::Identity(8, 8)).norm();
  char buf[64];
  std::snprintf(buf, sizeof buf, "|d1|=%.1e |d0|=%.1e", d1, d0);
  report(4, "calibration degenerate reductions", d1 == 0.0 && d0 < 1e-14,
         buf);
}

// ---------------------------------------------------------------------
// 5. First-order stationarity at converged solver outputs, and the
//    eigenvalue/objective identity.
void check_stationarity() {
  const int n = 8, k = 4;
  Rng rng(5005);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> uphi(0.01, 0.3);
  double worst_grad = 0.0, worst_lambda = 0.0;
  int converged = 0;
  for (int t = 0; t < 20; ++t) {
    std::vector<CVec> h;
    std::vector<CMat> phi;
    for (int u = 0; u < k; ++u) {
      CVec v(n);
      for (int i = 0; i < n; ++i) v[i] = cplx(g(rng), g(rng));
      h.push_back(v / std::sqrt(double(n)));
      CMat p = CMat::Zero(n, n);
      for (int i = 0; i < n; ++i) p(i, i) = uphi(rng);
      phi.push_back(p);
    }
    QuadraticSet q(h, phi, 0.01);
    GpiOptions opt;
    opt.epsilon = 1e-5;
    const GpiResult r = gpi_solve(q, opt);
    if (!r.converged) continue;
    ++converged;
    const double alpha = r.alpha_final;  // stationarity holds at the
                                         // annealed smoothing level

    const KktMatrices kkt = kkt_matrices(r.precoder, q, alpha);
    const double lam_err =
        std::abs(kkt.lambda - std::pow(2.0, objective(r.precoder, q, alpha))) /
        kkt.lambda;
    worst_lambda = std::max(worst_lambda, lam_err);

    // projected finite-difference gradient of the smoothed objective
    const int dim = q.stack_dim();
    const double f0 = objective(r.precoder, q, alpha);
    CVec grad(dim);
    const double h_fd = 1e-6;
    for (int i = 0; i < dim; ++i) {
      for (int part = 0; part < 2; ++part) {
        PrecoderStack fp = r.precoder, fm = r.precoder;
        const cplx delta = part == 0 ? cplx(h_fd, 0) : cplx(0, h_fd);
        fp.f[i] += delta;
        fm.f[i] -= delta;
        const double d =
            (objective(fp, q, alpha) - objective(fm, q, alpha)) /
            (2 * h_fd);
        if (part == 0) {
          grad[i] = d;
        } else {
          grad[i] += cplx(0, 1) * d;
        }
      }
    }
    // remove the radial component (the objective is scale invariant)
    const CVec& f = r.precoder.f;
    grad -= f * (f.dot(grad) / f.squaredNorm());
    worst_grad = std::max(worst_grad, grad.norm() / std::max(1.0, f0));
  }
  char buf[96];
  std::snprintf(buf, sizeof buf,
                "%d/20 converged, grad %.2e, lambda err %.2e", converged,
                worst_grad, worst_lambda);
  report(5, "solver stationarity and identity",
         converged >= 15 && worst_grad < 1e-3 && worst_lambda < 1e-9, buf);
}

// ---------------------------------------------------------------------
// 6 + 7. Rate splitting with the estimated error covariance beats both
//    the SDMA restriction and the zero-covariance variant at 40 dB under
//    imperfect gain correlation.
void check_rsma_gains() {
  Scenario sc;
  sc.system.n_antennas = 16;
  sc.system.n_users = 8;
  sc.system.n_subcarriers = 64;
  sc.system.ul_carrier = 7.25e9;
  sc.system.dl_carrier = 7.75e9;
  sc.n_paths = 3;
  sc.ul_snr_db = 10.0;
  sc.dl_snr_db = 40.0;
  sc.eta_sq_min = 0.9;
  sc.eta_sq_max = 1.0;
  const std::vector<Method> methods = {Method::kProposed,
                                       Method::kProposedNoEcm,
                                       Method::kSdmaGpi};
  const int trials = 300;
  std::vector<double> se_p, se_ne, se_sdma;
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < trials; ++t) {
    const TrialResult r = run_trial(sc, methods, derive_seed(6006, 0, t));
#pragma omp critical
    {
      se_p.push_back(r.se_genie.at(Method::kProposed));
      se_ne.push_back(r.se_genie.at(Method::kProposedNoEcm));
      se_sdma.push_back(r.se_genie.at(Method::kSdmaGpi));
    }
  }
  const double mp = mean(se_p), mn = mean(se_ne), ms = mean(se_sdma);
  char buf[96];
  std::snprintf(buf, sizeof buf, "proposed %.3f vs sdma %.3f (x%.3f)", mp, ms,
                mp / ms);
  report(6, "rate-splitting gain over SDMA", mp >= 1.05 * ms, buf);
  std::snprintf(buf, sizeof buf, "proposed %.3f vs no-ecm %.3f (x%.3f)", mp,
                mn, mp / mn);
  report(7, "error-covariance value", mp >= 1.05 * mn, buf);
}

// ---------------------------------------------------------------------
// 8. Ratio-to-perfect-CSIT degrades monotonically with the path count and
//    the proposed method retains more of the reference than SDMA.
void check_path_count_pattern() {
  Scenario sc;
  sc.system.n_antennas = 16;
  sc.system.n_users = 8;
  sc.system.n_subcarriers = 64;
  sc.system.subcarrier_spacing = 5.76e6;
  sc.system.ul_carrier = 7.25e9;
  sc.system.dl_carrier = 7.55e9;
  // A sub-half-wavelength array keeps the users spatially correlated, so
  // imperfect reconstruction produces interference a private-only precoder
  // cannot null; this is the regime where the common stream pays off.
  sc.system.antenna_spacing = (3.0e8 / 7.25e9) / 12.0;
  sc.ul_snr_db = 10.0;
  sc.dl_snr_db = 20.0;
  sc.eta_sq_min = 0.9;
  sc.eta_sq_max = 1.0;
  sc.nomp.grid_oversampling_delay = 12;
  sc.nomp.grid_oversampling_angle = 4;
  sc.nomp.refine_cycles = 12;
  const std::vector<Method> methods = {Method::kProposed, Method::kSdmaGpi,
                                       Method::kPerfectCsitRef};
  const int trials = 200;
  std::vector<double> ratio_p, ratio_s;
  for (int lcount : {1, 4, 7}) {
    sc.n_paths = lcount;
    std::vector<double> p, s, ref;
#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < trials; ++t) {
      const TrialResult r =
          run_trial(sc, methods, derive_seed(8008, lcount, t));
#pragma omp critical
      {
        p.push_back(r.se_genie.at(Method::kProposed));
        s.push_back(r.se_genie.at(Method::kSdmaGpi));
        ref.push_back(r.se_genie.at(Method::kPerfectCsitRef));
      }
    }
    ratio_p.push_back(100.0 * mean(p) / mean(ref));
    ratio_s.push_back(100.0 * mean(s) / mean(ref));
  }
  const bool monotone = ratio_p[0] >= ratio_p[1] - 1e-9 &&
                        ratio_p[1] >= ratio_p[2] - 1e-9;
  const bool gap_mid = ratio_p[1] >= ratio_s[1] + 5.0;
  const bool gap_high = ratio_p[2] >= ratio_s[2] + 5.0;
  const bool close_l1 = std::abs(ratio_p[0] - ratio_s[0]) <= 5.0;
  char buf[128];
  std::snprintf(buf, sizeof buf,
                "proposed %.1f/%.1f/%.1f%% sdma %.1f/%.1f/%.1f%%", ratio_p[0],
                ratio_p[1], ratio_p[2], ratio_s[0], ratio_s[1], ratio_s[2]);
  report(8, "path-count degradation pattern",
         monotone && gap_mid && gap_high && close_l1, buf);
}

// ---------------------------------------------------------------------
// 9. The built-in invariant suite is green.
void check_selftest() {
  const auto results = run_selftest();
  int failed = 0;
  for (const auto& r : results) {
    if (!r.passed) ++failed;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%zu checks, %d failed", results.size(),
                failed);
  report(9, "invariant suite", failed == 0 && results.size() >= 10, buf);
}

}  // namespace

int main(int argc, char** argv) {
  // optional arguments select individual checks by number (6 and 7 share
  // a Monte Carlo run and are selected together via either id)
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));
  auto enabled = [&](int id) {
    return wanted.empty() ||
           std::find(wanted.begin(), wanted.end(), id) != wanted.end();
  };
  if (enabled(1)) check_crlb_tracking();
  if (enabled(2)) check_ofim_fd();
  if (enabled(3)) check_fim_expectation();
  if (enabled(4)) check_calibration_reductions();
  if (enabled(5)) check_stationarity();
  if (enabled(6) || enabled(7)) check_rsma_gains();
  if (enabled(8)) check_path_count_pattern();
  if (enabled(9)) check_selftest();
  if (g_failures > 0) {
    std::printf("%d acceptance check(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all acceptance checks passed\n");
  return 0;
}
