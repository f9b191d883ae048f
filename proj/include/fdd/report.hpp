/**
 * @file report.hpp
 * @brief CSV and SVG emission for experiment sweeps. Files are written
 *        atomically (temp + rename).
 */
#pragma once

#include <string>
#include <vector>

#include "fdd/eval.hpp"

namespace fdd {

// One row per (sweep value, method/metric column layout); '#'-prefixed
// header comments carry the config echo and the master seed.
void write_csv(const std::string& path, const ExperimentSpec& spec,
               const ExperimentResult& result,
               const std::vector<std::string>& header_comments);

struct SvgSeries {
  std::string label;
  std::vector<double> x, y;
};

struct SvgPlot {
  std::string title, x_label, y_label;
  bool log_y = false;  // rendered as 10*log10 (dB) when set
  std::vector<SvgSeries> series;
};

void write_svg(const std::string& path, const SvgPlot& plot);

void atomic_write(const std::string& path, const std::string& content);

}  // namespace fdd
