#include "fdd/eval.hpp"

#include <cmath>
#include <stdexcept>

namespace fdd {

std::string method_name(Method m) {
  switch (m) {
    case Method::kProposed: return "proposed";
    case Method::kProposedNoEcm: return "proposed_no_ecm";
    case Method::kSdmaGpi: return "sdma_gpi";
    case Method::kMrt: return "mrt";
    case Method::kRzf: return "rzf";
    case Method::kPerfectCsitRef: return "perfect_csit_ref";
  }
  return "?";
}

std::optional<Method> method_from_name(const std::string& name) {
  for (Method m : {Method::kProposed, Method::kProposedNoEcm, Method::kSdmaGpi,
                   Method::kMrt, Method::kRzf, Method::kPerfectCsitRef}) {
    if (method_name(m) == name) return m;
  }
  return std::nullopt;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t counter) {
  // splitmix64 over a mixed word; collision-free in (stream, counter)
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1) +
                    0xbf58476d1ce4e5b9ULL * (counter + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SeLowerBound se_lower_bound(const PrecoderStack& f,
                            const std::vector<CVec>& h_hat,
                            const std::vector<CMat>& phi_hat, double snr_inv) {
  const int nk = static_cast<int>(h_hat.size());
  SeLowerBound out;
  out.common_per_user.resize(nk);
  out.private_per_user.resize(nk);
  for (int k = 0; k < nk; ++k) {
    const auto& h = h_hat[k];
    const auto& phi = phi_hat[k];
    double interference = std::real(f.common().dot(phi * f.common()));
    double private_signal = 0.0, private_interference = 0.0;
    for (int p = 0; p < nk; ++p) {
      const auto fp = f.user(p);
      const double cross = std::norm(h.dot(fp));
      const double err = std::real(fp.dot(phi * fp));
      interference += cross + err;
      private_interference += err + (p == k ? 0.0 : cross);
      if (p == k) private_signal = cross;
    }
    out.common_per_user[k] = std::log2(
        1.0 + std::norm(h.dot(f.common())) / (interference + snr_inv));
    out.private_per_user[k] =
        std::log2(1.0 + private_signal / (private_interference + snr_inv));
  }
  return out;
}

double se_genie(const PrecoderStack& f, const std::vector<CVec>& h_true,
                double snr_inv) {
  const int nk = static_cast<int>(h_true.size());
  double sum = 0.0;
  double common_min = std::numeric_limits<double>::infinity();
  const bool has_common = f.common().squaredNorm() > 0.0;
  for (int k = 0; k < nk; ++k) {
    const auto& h = h_true[k];
    double total_private = 0.0;
    for (int p = 0; p < nk; ++p) total_private += std::norm(h.dot(f.user(p)));
    const double own = std::norm(h.dot(f.user(k)));
    sum += std::log2(1.0 + own / (total_private - own + snr_inv));
    if (has_common) {
      const double sc = std::norm(h.dot(f.common()));
      common_min = std::min(common_min,
                            std::log2(1.0 + sc / (total_private + snr_inv)));
    }
  }
  if (has_common) sum += common_min;
  return sum;
}

TrialResult run_trial(const Scenario& sc, const std::vector<Method>& methods,
                      std::uint64_t seed) {
  const SystemConfig& cfg = sc.system;
  const int nk = cfg.n_users;
  const double f_ext = sc.extrapolation();
  Rng rng(seed);
  TrialResult out;
  out.seed = seed;

  std::vector<CVec> h_true(nk), h_hat(nk);
  std::vector<CMat> phi(nk), phi_zero(nk);
  std::uniform_real_distribution<double> eta_sq(sc.eta_sq_min, sc.eta_sq_max);

  for (int k = 0; k < nk; ++k) {
    try {
      PathSet paths =
          sample_paths(cfg, sc.n_paths, cfg.rician_factor, rng);
      for (double& e : paths.corr)
        e = std::sqrt(sc.eta_sq_min == sc.eta_sq_max ? sc.eta_sq_min
                                                     : eta_sq(rng));
      const UlObservation obs =
          simulate_ul_observation(paths, cfg, sc.ul_snr_db, rng);

      NompConfig ncfg = sc.nomp;
      ncfg.known_paths = sc.n_paths;
      const EstimatedPaths est = run_nomp(obs, cfg, ncfg);

      const std::vector<cplx> a_dl = dl_gains(paths, rng);
      h_true[k] = dl_channel(a_dl, paths, f_ext, cfg);
      h_hat[k] = reconstruct_dl_channel(est, paths.corr, f_ext, cfg);
      out.mse += (h_true[k] - h_hat[k]).squaredNorm() / nk;

      const ParamVector psi_true = ParamVector::from_paths(paths);
      out.crlb_trace +=
          crlb(psi_true, obs.noise_var, f_ext, cfg).real().trace() / nk;

      const ParamVector psi_hat = ParamVector::from_estimate(est);
      EcmEstimate base;
      try {
        base = ecm_estimate(psi_hat, obs, f_ext, cfg);
      } catch (const std::runtime_error&) {
        // near-coincident estimated paths leave the O-FIM unidentifiable;
        // fall back to the total-uncertainty prior (the eta=0 limit)
        base.phi_hat = CMat::Identity(cfg.n_antennas, cfg.n_antennas);
        base.crlb_full = base.phi_hat;
        base.trace_mse = cfg.n_antennas;
      }
      const EcmEstimate cal = ecm_calibrate(base, paths.corr);
      phi[k] = cal.phi_hat;
      out.ecm_trace += cal.trace_mse / nk;
      phi_zero[k] = CMat::Zero(cfg.n_antennas, cfg.n_antennas);
    } catch (const std::exception& e) {
      throw std::runtime_error("run_trial[reconstruction, user " +
                               std::to_string(k) + "]: " + e.what());
    }
  }

  const double snr_inv = std::pow(10.0, -sc.dl_snr_db / 10.0);
  try {
    for (Method m : methods) {
      PrecoderStack f;
      int iters = 0;
      switch (m) {
        case Method::kProposed: {
          QuadraticSet q(h_hat, phi, snr_inv);
          GpiResult r = gpi_solve(q, sc.gpi);
          f = r.precoder;
          iters = r.iterations;
          const SeLowerBound lb = se_lower_bound(f, h_hat, phi, snr_inv);
          out.se_lb_common = lb.common_per_user.minCoeff();
          out.se_lb_private_sum = lb.private_per_user.sum();
          break;
        }
        case Method::kProposedNoEcm: {
          QuadraticSet q(h_hat, phi_zero, snr_inv);
          GpiResult r = gpi_solve(q, sc.gpi);
          f = r.precoder;
          iters = r.iterations;
          break;
        }
        case Method::kSdmaGpi: {
          QuadraticSet q(h_hat, phi, snr_inv);
          GpiResult r = baseline_sdma_gpi(q, sc.gpi);
          f = r.precoder;
          iters = r.iterations;
          break;
        }
        case Method::kMrt:
          f = baseline_mrt(h_hat);
          break;
        case Method::kRzf:
          f = baseline_rzf(h_hat, snr_inv);
          break;
        case Method::kPerfectCsitRef: {
          QuadraticSet q(h_true, phi_zero, snr_inv);
          GpiResult r = gpi_solve(q, sc.gpi);
          f = r.precoder;
          iters = r.iterations;
          break;
        }
      }
      out.se_genie[m] = se_genie(f, h_true, snr_inv);
      out.iterations[m] = iters;
    }
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("run_trial[precoding]: ") + e.what());
  }
  return out;
}

namespace {

Scenario apply_axis(const Scenario& base, SweepAxis axis, double value) {
  Scenario sc = base;
  switch (axis) {
    case SweepAxis::kSnrDb:
      sc.dl_snr_db = value;
      break;
    case SweepAxis::kExtrapolationHz:
      sc.extrapolation_override = value;
      break;
    case SweepAxis::kPathCount:
      sc.n_paths = static_cast<int>(value);
      break;
  }
  return sc;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  if (spec.trials < 1)
    throw std::invalid_argument("run_experiment: trials must be >= 1");
  if (spec.sweep_values.empty())
    throw std::invalid_argument("run_experiment: empty sweep");

  ExperimentResult out;
  for (size_t p = 0; p < spec.sweep_values.size(); ++p) {
    const Scenario sc =
        apply_axis(spec.scenario, spec.axis, spec.sweep_values[p]);
    std::vector<TrialResult> trials(spec.trials);

    if (spec.parallel) {
#pragma omp parallel for schedule(dynamic)
      for (int t = 0; t < spec.trials; ++t)
        trials[t] =
            run_trial(sc, spec.methods, derive_seed(spec.master_seed, p, t));
    } else {
      for (int t = 0; t < spec.trials; ++t)
        trials[t] =
            run_trial(sc, spec.methods, derive_seed(spec.master_seed, p, t));
    }

    SweepPoint point;
    point.sweep_value = spec.sweep_values[p];
    auto add_metric = [&](const std::string& name, auto getter) {
      double mean = 0.0;
      for (const auto& tr : trials) mean += getter(tr);
      mean /= spec.trials;
      double var = 0.0;
      for (const auto& tr : trials) {
        const double d = getter(tr) - mean;
        var += d * d;
      }
      const double stderr_ =
          spec.trials > 1 ? std::sqrt(var / (spec.trials - 1.0) / spec.trials)
                          : 0.0;
      point.metrics[name] = {mean, stderr_};
    };
    add_metric("mse", [](const TrialResult& t) { return t.mse; });
    add_metric("crlb_trace",
               [](const TrialResult& t) { return t.crlb_trace; });
    add_metric("ecm_trace", [](const TrialResult& t) { return t.ecm_trace; });
    add_metric("se_lb", [](const TrialResult& t) {
      return t.se_lb_common + t.se_lb_private_sum;
    });
    for (Method m : spec.methods)
      add_metric("se_genie_" + method_name(m),
                 [m](const TrialResult& t) { return t.se_genie.at(m); });
    out.points.push_back(std::move(point));
  }
  return out;
}

}  // namespace fdd
