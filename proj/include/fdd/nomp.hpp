/**
 * @file nomp.hpp
 * @brief 2D Newtonized orthogonal matching pursuit over the joint
 *        delay-angle continuum.
 */
#pragma once

#include <optional>

#include "fdd/channel.hpp"

namespace fdd {

enum class StopMode { kKnownL, kCfar };

struct NompConfig {
  int grid_oversampling_delay = 4;  // R_d = gamma_d * M
  int grid_oversampling_angle = 4;  // R_a = gamma_a * N
  int refine_cycles = 6;            // R_c
  // Max per-step movement, in grid cells (|dtau|*df <= cap/R_d,
  // |dtheta| <= cap*pi/R_a). Half a cell guards against Newton overshoot.
  double newton_step_cap = 0.5;
  double gradient_rate = 0.0;  // 0 => 1/(MN*max(df^2,1))
  StopMode stop_mode = StopMode::kKnownL;
  double false_alarm_rate = 1e-2;
  int max_paths = 16;
  int known_paths = 1;  // L for StopMode::kKnownL
};

struct EstimatedPaths {
  std::vector<cplx> gain;
  std::vector<double> delay;
  std::vector<double> angle;
  double residual_energy = 0.0;
  bool truncated = false;  // max_paths hit before the CFAR threshold

  int count() const { return static_cast<int>(gain.size()); }
};

// Single-path residual objective f = 2 Re{y_r^H alpha u} - |alpha|^2 MN.
double residual_objective(const CVec& y_r, cplx alpha, double tau,
                          double theta, const SystemConfig& cfg);

struct GridPoint {
  double tau = 0.0;
  double theta = 0.0;
  double statistic = 0.0;  // |u^H y_r|^2 / MN at the winner
};

// Matched-filter peak over the R_d x R_a grid. Factorized over the angle
// and delay axes (O(R_a M (N + R_d)) instead of the direct
// O(R_a R_d M N)); OpenMP across angle bins. Ties break toward the
// smallest (delay index, angle index).
GridPoint detect_on_grid(const CVec& y_r, const SystemConfig& cfg,
                         const NompConfig& ncfg);

namespace reference {
// Direct per-grid-point evaluation; kept as the serial oracle for the
// factorized kernel and for the kernel benchmark.
GridPoint detect_on_grid(const CVec& y_r, const SystemConfig& cfg,
                         const NompConfig& ncfg);
}  // namespace reference

// Least-squares scalar gain: alpha = u^H y_r / ||u||^2.
cplx gain_estimate(const CVec& y_r, double tau, double theta,
                   const SystemConfig& cfg);

// One Newton (or safeguarded gradient) refinement step of (tau, theta) at
// fixed gain. The step is rejected if it would decrease the objective.
struct RefineResult {
  double tau, theta;
  bool stepped;  // false when the step was rejected or the gradient vanished
};
RefineResult newton_refine(const CVec& y_r, cplx alpha, double tau,
                           double theta, const SystemConfig& cfg,
                           const NompConfig& ncfg);

// LS gain calibration over all detected signatures; merges distinct entries
// with near-identical (tau, theta) before solving when the signature matrix
// is rank deficient. Returns the gains in path order.
std::vector<cplx> ls_update(const CVec& y, std::vector<cplx>& gains,
                            std::vector<double>& delays,
                            std::vector<double>& angles,
                            const SystemConfig& cfg);

EstimatedPaths run_nomp(const UlObservation& obs, const SystemConfig& cfg,
                        const NompConfig& ncfg);

// DL channel rebuilt from estimated UL parameters with gain correlation
// folded in: alpha^dl = eta * alpha^ul.
CVec reconstruct_dl_channel(const EstimatedPaths& est,
                            const std::vector<double>& eta, double f,
                            const SystemConfig& cfg);

}  // namespace fdd
