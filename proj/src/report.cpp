#include "fdd/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fdd {

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write to path: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed for path: " + path);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("rename failed for path: " + path);
}

void write_csv(const std::string& path, const ExperimentSpec& spec,
               const ExperimentResult& result,
               const std::vector<std::string>& header_comments) {
  std::ostringstream out;
  out.precision(12);
  out << "# experiment=" << spec.name << " seed=" << spec.master_seed
      << " trials=" << spec.trials << "\n";
  for (const auto& c : header_comments) out << "# " << c << "\n";

  // stable column order: sweep value, then metrics sorted by name
  out << "sweep_value";
  if (!result.points.empty()) {
    for (const auto& [name, mv] : result.points.front().metrics)
      out << "," << name << "_mean," << name << "_stderr";
  }
  out << "\n";
  for (const auto& p : result.points) {
    out << p.sweep_value;
    for (const auto& [name, mv] : p.metrics)
      out << "," << mv.first << "," << mv.second;
    out << "\n";
  }
  atomic_write(path, out.str());
}

namespace {

double to_plot(double v, bool log_y) {
  return log_y ? 10.0 * std::log10(std::max(v, 1e-300)) : v;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

void write_svg(const std::string& path, const SvgPlot& plot) {
  const double width = 720, height = 480;
  const double ml = 70, mr = 160, mt = 40, mb = 55;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : plot.series) {
    for (double v : s.x) {
      xmin = std::min(xmin, v);
      xmax = std::max(xmax, v);
    }
    for (double v : s.y) {
      const double p = to_plot(v, plot.log_y);
      ymin = std::min(ymin, p);
      ymax = std::max(ymax, p);
    }
  }
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) {
    return mt + ph - (y - ymin) / (ymax - ymin) * ph;
  };

  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << width
    << " " << height << "\" width=\"" << width << "\" height=\"" << height
    << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
    << "font-size=\"16\" font-family=\"sans-serif\">" << plot.title
    << "</text>\n";

  // frame + ticks
  s << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw
    << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
  const int nticks = 5;
  for (int i = 0; i <= nticks; ++i) {
    const double xv = xmin + (xmax - xmin) * i / nticks;
    const double yv = ymin + (ymax - ymin) * i / nticks;
    s << "<line x1=\"" << px(xv) << "\" y1=\"" << mt + ph << "\" x2=\""
      << px(xv) << "\" y2=\"" << mt + ph + 5 << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << px(xv) << "\" y=\"" << mt + ph + 20
      << "\" text-anchor=\"middle\" font-size=\"11\" "
      << "font-family=\"sans-serif\">" << fmt(xv) << "</text>\n"
      << "<line x1=\"" << ml - 5 << "\" y1=\"" << py(yv) << "\" x2=\"" << ml
      << "\" y2=\"" << py(yv) << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << ml - 8 << "\" y=\"" << py(yv) + 4
      << "\" text-anchor=\"end\" font-size=\"11\" "
      << "font-family=\"sans-serif\">" << fmt(yv) << "</text>\n";
  }
  s << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12
    << "\" text-anchor=\"middle\" font-size=\"13\" "
    << "font-family=\"sans-serif\">" << plot.x_label << "</text>\n"
    << "<text x=\"18\" y=\"" << mt + ph / 2
    << "\" text-anchor=\"middle\" font-size=\"13\" "
    << "font-family=\"sans-serif\" transform=\"rotate(-90 18 " << mt + ph / 2
    << ")\">" << plot.y_label << (plot.log_y ? " (dB)" : "") << "</text>\n";

  for (size_t i = 0; i < plot.series.size(); ++i) {
    const auto& ser = plot.series[i];
    const char* color = kPalette[i % 8];
    s << "<polyline fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"1.8\" points=\"";
    for (size_t j = 0; j < ser.x.size(); ++j)
      s << px(ser.x[j]) << "," << py(to_plot(ser.y[j], plot.log_y)) << " ";
    s << "\"/>\n";
    const double ly = mt + 16 + 18.0 * i;
    s << "<line x1=\"" << ml + pw + 10 << "\" y1=\"" << ly << "\" x2=\""
      << ml + pw + 32 << "\" y2=\"" << ly << "\" stroke=\"" << color
      << "\" stroke-width=\"1.8\"/>\n"
      << "<text x=\"" << ml + pw + 38 << "\" y=\"" << ly + 4
      << "\" font-size=\"12\" font-family=\"sans-serif\">" << ser.label
      << "</text>\n";
  }
  s << "</svg>\n";
  atomic_write(path, s.str());
}

}  // namespace fdd
