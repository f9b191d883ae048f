/**
 * @file bench_detect.cpp
 * @brief Timing comparison of the factorized (OpenMP) grid-detection
 *        kernel against the direct serial reference, and of the parallel
 *        vs serial trial runner.
 */
#include <chrono>
#include <cstdio>

#include "fdd/eval.hpp"
#include "fdd/nomp.hpp"

using Clock = std::chrono::steady_clock;

static double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

int main() {
  fdd::SystemConfig cfg;
  cfg.n_antennas = 32;
  cfg.n_subcarriers = 128;
  fdd::NompConfig ncfg;

  fdd::Rng rng(7);
  const fdd::PathSet paths = fdd::sample_paths(cfg, 3, 0.0, rng);
  const fdd::UlObservation obs =
      fdd::simulate_ul_observation(paths, cfg, 10.0, rng);

  const int reps = 20;
  fdd::GridPoint a, b;
  auto t0 = Clock::now();
  for (int i = 0; i < reps; ++i) a = fdd::detect_on_grid(obs.y, cfg, ncfg);
  const double fast = ms_since(t0) / reps;
  t0 = Clock::now();
  for (int i = 0; i < reps; ++i)
    b = fdd::reference::detect_on_grid(obs.y, cfg, ncfg);
  const double slow = ms_since(t0) / reps;
  std::printf("grid detection  N=%d M=%d R=%dx%d\n", cfg.n_antennas,
              cfg.n_subcarriers, ncfg.grid_oversampling_delay * cfg.n_subcarriers,
              ncfg.grid_oversampling_angle * cfg.n_antennas);
  std::printf("  factorized+omp : %8.3f ms/call  (tau=%g theta=%g)\n", fast,
              a.tau, a.theta);
  std::printf("  direct serial  : %8.3f ms/call  (tau=%g theta=%g)\n", slow,
              b.tau, b.theta);
  std::printf("  speedup        : %8.2fx   winners %s\n", slow / fast,
              (a.tau == b.tau && a.theta == b.theta) ? "match" : "DIFFER");

  fdd::ExperimentSpec spec;
  spec.name = "bench";
  spec.scenario.system.n_antennas = 16;
  spec.scenario.system.n_users = 4;
  spec.scenario.system.n_subcarriers = 32;
  spec.axis = fdd::SweepAxis::kSnrDb;
  spec.sweep_values = {20.0};
  spec.trials = 24;
  spec.methods = {fdd::Method::kProposed};
  spec.parallel = true;
  t0 = Clock::now();
  fdd::run_experiment(spec);
  const double par = ms_since(t0);
  spec.parallel = false;
  t0 = Clock::now();
  fdd::run_experiment(spec);
  const double ser = ms_since(t0);
  std::printf("trial runner    24 trials N=16 K=4 M=32\n");
  std::printf("  parallel       : %8.1f ms\n", par);
  std::printf("  serial         : %8.1f ms\n", ser);
  std::printf("  speedup        : %8.2fx\n", ser / par);
  return 0;
}
