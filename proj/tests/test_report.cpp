#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fdd/report.hpp"

using namespace fdd;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentSpec tiny_spec() {
  ExperimentSpec spec;
  spec.name = "tiny";
  spec.scenario.system.n_antennas = 8;
  spec.scenario.system.n_users = 2;
  spec.scenario.system.n_subcarriers = 16;
  spec.scenario.n_paths = 2;
  spec.scenario.nomp.stop_mode = StopMode::kKnownL;
  spec.axis = SweepAxis::kSnrDb;
  spec.sweep_values = {10.0, 20.0};
  spec.trials = 3;
  spec.master_seed = 42;
  spec.methods = {Method::kMrt};
  return spec;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("fdd_report_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("csv output is deterministic and carries the seed header") {
  TempDir tmp;
  const ExperimentSpec spec = tiny_spec();
  const ExperimentResult res = run_experiment(spec);

  const auto p1 = tmp.path / "a.csv";
  const auto p2 = tmp.path / "b.csv";
  write_csv(p1.string(), spec, res, {"experiment=tiny", "seed=42"});
  write_csv(p2.string(), spec, res, {"experiment=tiny", "seed=42"});
  const std::string a = slurp(p1), b = slurp(p2);
  CHECK(a == b);
  CHECK(a.find("# seed=42") != std::string::npos);
  CHECK(a.find("sweep_value") != std::string::npos);
  CHECK(a.find("mse_mean") != std::string::npos);
  CHECK(a.find("mse_stderr") != std::string::npos);

  // one data row per sweep point plus the header line
  int rows = 0;
  std::istringstream lines(a);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line[0] != '#') ++rows;
  }
  CHECK(rows == 3);
}

TEST_CASE("csv is byte-identical across full re-runs of the experiment") {
  TempDir tmp;
  const ExperimentSpec spec = tiny_spec();
  const auto p1 = tmp.path / "r1.csv";
  const auto p2 = tmp.path / "r2.csv";
  write_csv(p1.string(), spec, run_experiment(spec), {"seed=42"});
  write_csv(p2.string(), spec, run_experiment(spec), {"seed=42"});
  CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("svg output is structurally well formed") {
  TempDir tmp;
  SvgPlot plot;
  plot.title = "test plot";
  plot.x_label = "x";
  plot.y_label = "y";
  plot.log_y = true;
  SvgSeries s1;
  s1.label = "first";
  s1.x = {0.0, 1.0, 2.0};
  s1.y = {1.0, 0.1, 0.01};
  SvgSeries s2;
  s2.label = "second";
  s2.x = {0.0, 1.0, 2.0};
  s2.y = {0.5, 0.25, 0.125};
  plot.series = {s1, s2};

  const auto p = tmp.path / "plot.svg";
  write_svg(p.string(), plot);
  const std::string svg = slurp(p);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("viewBox") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("test plot") != std::string::npos);
  CHECK(svg.find("first") != std::string::npos);
  CHECK(svg.find("second") != std::string::npos);

  // every opened tag is closed: count < and > match and nest sanely
  int depth = 0;
  bool balanced = true;
  for (size_t i = 0; i < svg.size(); ++i) {
    if (svg[i] == '<') {
      ++depth;
      if (depth != 1) balanced = false;
    } else if (svg[i] == '>') {
      --depth;
      if (depth != 0) balanced = false;
    }
  }
  CHECK(balanced);
  CHECK(depth == 0);
}

TEST_CASE("atomic_write leaves no temp files and replaces content") {
  TempDir tmp;
  const auto p = tmp.path / "out.txt";
  atomic_write(p.string(), "first");
  CHECK(slurp(p) == "first");
  atomic_write(p.string(), "second");
  CHECK(slurp(p) == "second");
  int entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(tmp.path)) {
    ++entries;
  }
  CHECK(entries == 1);
}

TEST_CASE("write_csv reports unwritable destinations") {
  const ExperimentSpec spec = tiny_spec();
  ExperimentResult res;
  res.points.push_back({10.0, {{"mse", {1.0, 0.1}}}});
  CHECK_THROWS(write_csv("/nonexistent_dir_xyz/out.csv", spec, res, {}));
}
