/**
 * @file fddsim.cpp
 * @brief Experiment front end: MSE / sum-SE / path-count sweeps plus the
 *        built-in verification suite. CSV and SVG outputs.
 */
#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "fdd/eval.hpp"
#include "fdd/report.hpp"
#include "fdd/selftest.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::uint64_t seed = 1;
  int trials = 0;  // 0 => per-command default
  std::string out_dir = ".";
  std::string methods = "";
  bool svg = true;
  bool serial = false;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config_path, "key=value config file");
  cmd->add_option("--seed", a.seed, "master seed");
  cmd->add_option("--trials", a.trials, "Monte Carlo trials per point");
  cmd->add_option("--out-dir", a.out_dir, "output directory");
  cmd->add_option("--methods", a.methods, "comma list of methods");
  cmd->add_flag("--svg,!--no-svg", a.svg, "render SVG plots");
  cmd->add_flag("--serial", a.serial, "disable the parallel trial pool");
}

std::vector<fdd::Method> parse_methods(const std::string& csv,
                                       std::vector<fdd::Method> fallback) {
  if (csv.empty()) return fallback;
  std::vector<fdd::Method> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    auto m = fdd::method_from_name(tok);
    if (!m) throw CLI::ValidationError("--methods", "unknown method: " + tok);
    out.push_back(*m);
  }
  if (out.empty()) throw CLI::ValidationError("--methods", "empty list");
  return out;
}

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

// Builds the scenario from the config file (paper-like defaults otherwise)
// and echoes the effective settings into the CSV header.
fdd::Scenario load_scenario(const CommonArgs& a,
                            std::vector<std::string>& header) {
  fdd::Scenario sc;
  fdd::KeyValueConfig kv;
  if (!a.config_path.empty()) {
    kv = fdd::KeyValueConfig::from_file(a.config_path);
    header.push_back("config: " + a.config_path);
  }
  sc.system = kv.system_config();
  sc.system.validate();
  if (!sc.system.narrowband_ok())
    std::cerr << "warning: bandwidth exceeds 5% of the UL carrier;"
                 " the narrowband array model is strained\n";
  sc.nomp.grid_oversampling_delay =
      kv.get_int("nomp.grid_oversampling_delay", 4);
  sc.nomp.grid_oversampling_angle =
      kv.get_int("nomp.grid_oversampling_angle", 4);
  sc.nomp.refine_cycles = kv.get_int("nomp.refine_cycles", 3);
  sc.nomp.false_alarm_rate = kv.get_double("nomp.false_alarm_rate", 1e-2);
  sc.nomp.max_paths = kv.get_int("nomp.max_paths", 16);
  sc.gpi.alpha = kv.get_double("rsma.alpha", 0.1);
  sc.gpi.epsilon = kv.get_double("rsma.epsilon", 0.1);
  sc.gpi.max_iter = kv.get_int("rsma.max_iter", 500);
  sc.n_paths = kv.get_int("channel.n_paths", 3);
  sc.ul_snr_db = kv.get_double("experiment.ul_snr_db", 10.0);
  sc.dl_snr_db = kv.get_double("experiment.dl_snr_db", 20.0);
  sc.eta_sq_min = kv.get_double("channel.eta_sq_min", 1.0);
  sc.eta_sq_max = kv.get_double("channel.eta_sq_max", 1.0);
  return sc;
}

std::string out_path(const CommonArgs& a, const std::string& name) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  return (fs::path(a.out_dir) / name).string();
}

fdd::ExperimentResult run_and_write(const fdd::ExperimentSpec& spec,
                                    const CommonArgs& a,
                                    std::vector<std::string> header) {
  const fdd::ExperimentResult res = fdd::run_experiment(spec);
  fdd::write_csv(out_path(a, spec.name + ".csv"), spec, res, header);
  std::cerr << "wrote " << out_path(a, spec.name + ".csv") << "\n";
  return res;
}

void plot_methods(const fdd::ExperimentSpec& spec,
                  const fdd::ExperimentResult& res, const CommonArgs& a,
                  const std::string& x_label, bool log_y,
                  const std::string& y_label) {
  if (!a.svg) return;
  fdd::SvgPlot plot;
  plot.title = spec.name;
  plot.x_label = x_label;
  plot.y_label = y_label;
  plot.log_y = log_y;
  for (fdd::Method m : spec.methods) {
    fdd::SvgSeries s;
    s.label = fdd::method_name(m);
    for (const auto& pt : res.points) {
      auto it = pt.metrics.find("se_genie_" + fdd::method_name(m));
      if (it == pt.metrics.end()) continue;
      s.x.push_back(pt.sweep_value);
      s.y.push_back(it->second.first);
    }
    plot.series.push_back(std::move(s));
  }
  fdd::write_svg(out_path(a, spec.name + ".svg"), plot);
  std::cerr << "wrote " << out_path(a, spec.name + ".svg") << "\n";
}

int cmd_mse_sweep(const CommonArgs& a, const std::string& freqs_csv) {
  std::vector<std::string> header;
  fdd::Scenario sc = load_scenario(a, header);
  fdd::ExperimentSpec spec;
  spec.name = "mse_sweep";
  spec.scenario = sc;
  spec.axis = fdd::SweepAxis::kExtrapolationHz;
  spec.sweep_values =
      freqs_csv.empty()
          ? std::vector<double>{0, 100e6, 200e6, 300e6, 400e6, 500e6, 600e6}
          : parse_values(freqs_csv);
  if (spec.sweep_values.empty()) {
    std::cerr << "usage: mse-sweep needs a nonempty --freqs list\n";
    return 2;
  }
  spec.trials = a.trials > 0 ? a.trials : 100;
  spec.master_seed = a.seed;
  spec.methods = {};  // channel metrics only; no precoding stage
  spec.parallel = !a.serial;
  const fdd::ExperimentResult res = run_and_write(spec, a, header);
  if (a.svg) {
    fdd::SvgPlot plot;
    plot.title = "reconstruction MSE vs extrapolation range";
    plot.x_label = "extrapolation range f (Hz)";
    plot.y_label = "MSE (dB)";
    plot.log_y = true;
    for (const char* metric : {"mse", "crlb_trace", "ecm_trace"}) {
      fdd::SvgSeries s;
      s.label = metric;
      for (const auto& pt : res.points) {
        s.x.push_back(pt.sweep_value);
        s.y.push_back(pt.metrics.at(metric).first);
      }
      plot.series.push_back(std::move(s));
    }
    fdd::write_svg(out_path(a, "mse_sweep.svg"), plot);
    std::cerr << "wrote " << out_path(a, "mse_sweep.svg") << "\n";
  }
  return 0;
}

int cmd_sumse_sweep(const CommonArgs& a, const std::string& snrs_csv) {
  std::vector<std::string> header;
  fdd::Scenario sc = load_scenario(a, header);
  fdd::ExperimentSpec spec;
  spec.name = "sumse_sweep";
  spec.scenario = sc;
  spec.axis = fdd::SweepAxis::kSnrDb;
  spec.sweep_values = snrs_csv.empty()
                          ? std::vector<double>{0, 10, 20, 30, 40}
                          : parse_values(snrs_csv);
  if (spec.sweep_values.empty()) {
    std::cerr << "usage: sumse-sweep needs a nonempty --snrs list\n";
    return 2;
  }
  spec.trials = a.trials > 0 ? a.trials : 100;
  spec.master_seed = a.seed;
  spec.methods = parse_methods(
      a.methods, {fdd::Method::kProposed, fdd::Method::kProposedNoEcm,
                  fdd::Method::kSdmaGpi, fdd::Method::kMrt,
                  fdd::Method::kRzf});
  spec.parallel = !a.serial;
  const fdd::ExperimentResult res = run_and_write(spec, a, header);
  plot_methods(spec, res, a, "transmit SNR (dB)", false,
               "ergodic sum SE (bits/s/Hz)");
  return 0;
}

int cmd_paths_sweep(const CommonArgs& a, const std::string& paths_csv) {
  std::vector<std::string> header;
  fdd::Scenario sc = load_scenario(a, header);
  fdd::ExperimentSpec spec;
  spec.name = "paths_sweep";
  spec.scenario = sc;
  spec.axis = fdd::SweepAxis::kPathCount;
  spec.sweep_values = paths_csv.empty() ? std::vector<double>{1, 4, 7}
                                        : parse_values(paths_csv);
  if (spec.sweep_values.empty()) {
    std::cerr << "usage: paths-sweep needs a nonempty --paths list\n";
    return 2;
  }
  spec.trials = a.trials > 0 ? a.trials : 200;
  spec.master_seed = a.seed;
  spec.methods = parse_methods(
      a.methods,
      {fdd::Method::kProposed, fdd::Method::kSdmaGpi, fdd::Method::kMrt,
       fdd::Method::kRzf, fdd::Method::kPerfectCsitRef});
  // the ratio denominator is mandatory
  if (std::find(spec.methods.begin(), spec.methods.end(),
                fdd::Method::kPerfectCsitRef) == spec.methods.end())
    spec.methods.push_back(fdd::Method::kPerfectCsitRef);
  spec.parallel = !a.serial;
  fdd::ExperimentResult res = fdd::run_experiment(spec);
  // fold in percent-of-reference columns before writing
  for (auto& pt : res.points) {
    const double ref =
        pt.metrics.at("se_genie_perfect_csit_ref").first;
    for (fdd::Method m : spec.methods) {
      if (m == fdd::Method::kPerfectCsitRef) continue;
      const auto& mm = pt.metrics.at("se_genie_" + fdd::method_name(m));
      pt.metrics["pct_of_ref_" + fdd::method_name(m)] = {
          100.0 * mm.first / ref, 100.0 * mm.second / ref};
    }
  }
  fdd::write_csv(out_path(a, spec.name + ".csv"), spec, res, header);
  std::cerr << "wrote " << out_path(a, spec.name + ".csv") << "\n";
  if (a.svg) {
    fdd::SvgPlot plot;
    plot.title = "percent of perfect-CSIT sum SE vs path count";
    plot.x_label = "paths per user L";
    plot.y_label = "% of reference";
    for (fdd::Method m : spec.methods) {
      if (m == fdd::Method::kPerfectCsitRef) continue;
      fdd::SvgSeries s;
      s.label = fdd::method_name(m);
      for (const auto& pt : res.points) {
        s.x.push_back(pt.sweep_value);
        s.y.push_back(pt.metrics.at("pct_of_ref_" + fdd::method_name(m)).first);
      }
      plot.series.push_back(std::move(s));
    }
    fdd::write_svg(out_path(a, spec.name + ".svg"), plot);
    std::cerr << "wrote " << out_path(a, spec.name + ".svg") << "\n";
  }
  return 0;
}

int cmd_selftest(std::uint64_t seed, bool inject) {
  fdd::SelfTestOptions opt;
  opt.seed = seed;
  opt.inject_jacobian_sign_error = inject;
  const auto results = fdd::run_selftest(opt);
  std::size_t width = 0;
  for (const auto& r : results) width = std::max(width, r.name.size());
  int failures = 0;
  for (const auto& r : results) {
    std::printf("%-*s  %s  max_error=%.3e\n", int(width), r.name.c_str(),
                r.passed ? "PASS" : "FAIL", r.max_error);
    failures += r.passed ? 0 : 1;
  }
  std::printf("%d/%zu checks passed\n", int(results.size()) - failures,
              results.size());
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"feedback-free FDD downlink simulation"};
  app.require_subcommand(1);

  CommonArgs mse_a, sumse_a, paths_a;
  std::string freqs, snrs, path_counts;

  CLI::App* mse = app.add_subcommand(
      "mse-sweep", "channel reconstruction MSE vs extrapolation range");
  add_common(mse, mse_a);
  mse->add_option("--freqs", freqs, "comma list of extrapolation ranges, Hz");

  CLI::App* sumse =
      app.add_subcommand("sumse-sweep", "ergodic sum SE vs transmit SNR");
  add_common(sumse, sumse_a);
  sumse->add_option("--snrs", snrs, "comma list of transmit SNRs, dB");

  CLI::App* paths = app.add_subcommand(
      "paths-sweep", "percent of perfect-CSIT sum SE vs path count");
  add_common(paths, paths_a);
  paths->add_option("--paths", path_counts, "comma list of path counts");

  std::uint64_t st_seed = 42;
  bool inject = false;
  CLI::App* st =
      app.add_subcommand("selftest", "run the built-in verification suite");
  st->add_option("--seed", st_seed, "suite seed");
  st->add_flag("--inject-jacobian-sign-error", inject,
               "test fixture: corrupt the Jacobian check")
      ->group("");  // hidden

  CLI11_PARSE(app, argc, argv);

  try {
    if (mse->parsed()) return cmd_mse_sweep(mse_a, freqs);
    if (sumse->parsed()) return cmd_sumse_sweep(sumse_a, snrs);
    if (paths->parsed()) return cmd_paths_sweep(paths_a, path_counts);
    if (st->parsed()) return cmd_selftest(st_seed, inject);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
