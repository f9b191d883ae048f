/**
 * @file eval.hpp
 * @brief Spectral-efficiency / MSE metrics, the per-trial pipeline, and
 *        seeded Monte Carlo experiment runners (OpenMP across trials, with
 *        a serial path kept for equivalence checks).
 */
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "fdd/ecm.hpp"
#include "fdd/nomp.hpp"
#include "fdd/rsma.hpp"

namespace fdd {

enum class Method {
  kProposed,
  kProposedNoEcm,
  kSdmaGpi,
  kMrt,
  kRzf,
  kPerfectCsitRef,
};
std::string method_name(Method m);
std::optional<Method> method_from_name(const std::string& name);

struct Scenario {
  SystemConfig system;
  NompConfig nomp;
  GpiOptions gpi;
  int n_paths = 3;          // L per user
  double ul_snr_db = 10.0;  // UL sounding SNR
  double dl_snr_db = 20.0;  // transmit SNR P/sigma^2
  double eta_sq_min = 1.0;  // eta^2 ~ Unif(eta_sq_min, eta_sq_max)
  double eta_sq_max = 1.0;
  // 0 => use the configured extrapolation range f_dl - f_ul
  double extrapolation_override = -1.0;

  double extrapolation() const {
    return extrapolation_override >= 0.0 ? extrapolation_override
                                         : system.extrapolation_range();
  }
};

struct TrialResult {
  double mse = 0.0;         // ||h - h_hat||^2 averaged over users
  double crlb_trace = 0.0;  // tr C(f) at the true parameters, user average
  double ecm_trace = 0.0;   // tr Ctilde(f) from the O-FIM, user average
  double se_lb_common = 0.0;
  double se_lb_private_sum = 0.0;
  std::map<Method, double> se_genie;
  std::map<Method, int> iterations;
  std::uint64_t seed = 0;
};

// Closed-form SE lower bounds (common per-user minimum and private sum).
struct SeLowerBound {
  RVec common_per_user;
  RVec private_per_user;
};
SeLowerBound se_lower_bound(const PrecoderStack& f,
                            const std::vector<CVec>& h_hat,
                            const std::vector<CMat>& phi_hat, double snr_inv);

// Instantaneous sum SE with the true channels (the quantity the ergodic
// figures average): min-common rate plus private rates.
double se_genie(const PrecoderStack& f, const std::vector<CVec>& h_true,
                double snr_inv);

// End-to-end pipeline for one seeded trial; runs the requested methods.
TrialResult run_trial(const Scenario& sc, const std::vector<Method>& methods,
                      std::uint64_t seed);

enum class SweepAxis { kSnrDb, kExtrapolationHz, kPathCount };

struct ExperimentSpec {
  std::string name;
  Scenario scenario;
  SweepAxis axis = SweepAxis::kSnrDb;
  std::vector<double> sweep_values;
  int trials = 100;
  std::uint64_t master_seed = 1;
  std::vector<Method> methods;
  bool parallel = true;
};

struct SweepPoint {
  double sweep_value = 0.0;
  // metric name -> (mean, standard error)
  std::map<std::string, std::pair<double, double>> metrics;
};

struct ExperimentResult {
  std::vector<SweepPoint> points;
};

// Per-trial seeds are derived from the master seed with a splittable
// counter, so parallel and serial execution aggregate identically.
ExperimentResult run_experiment(const ExperimentSpec& spec);

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t counter);

}  // namespace fdd
