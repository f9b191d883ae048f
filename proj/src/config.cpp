#include "fdd/config.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace fdd {

void SystemConfig::validate() const {
  if (n_antennas < 1 || n_users < 1 || n_subcarriers < 1)
    throw std::invalid_argument("N, K, M must be positive");
  if (subcarrier_spacing <= 0.0 || ul_carrier <= 0.0 || dl_carrier <= 0.0)
    throw std::invalid_argument("frequencies must be positive");
  if (dl_carrier < ul_carrier)
    throw std::invalid_argument("extrapolation range f = f_dl - f_ul < 0");
  if (noise_var < 0.0 || tx_power <= 0.0)
    throw std::invalid_argument("bad power/noise configuration");
  if (rician_factor < 0.0)
    throw std::invalid_argument("rician factor must be nonnegative");
  if (!narrowband_ok())
    std::cerr << "warning: M*df = " << n_subcarriers * subcarrier_spacing
              << " Hz is not << f_ul; narrowband premise is strained\n";
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::from_string(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key");
    cfg.values_[key] = val;
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

double KeyValueConfig::get_double(const std::string& key,
                                  double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  return std::stod(it->second);
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  return std::stoi(it->second);
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key,
                                      std::uint64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  return std::stoull(it->second);
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

SystemConfig KeyValueConfig::system_config() const {
  SystemConfig sc;  // defaults match the reference setup: N=32 K=16 M=128
  sc.n_antennas = get_int("channel.n_antennas", sc.n_antennas);
  sc.n_users = get_int("channel.n_users", sc.n_users);
  sc.n_subcarriers = get_int("channel.n_subcarriers", sc.n_subcarriers);
  sc.subcarrier_spacing =
      get_double("channel.subcarrier_spacing", sc.subcarrier_spacing);
  sc.ul_carrier = get_double("channel.ul_carrier", sc.ul_carrier);
  sc.dl_carrier = get_double("channel.dl_carrier", sc.dl_carrier);
  sc.tx_power = get_double("channel.tx_power", sc.tx_power);
  sc.noise_var = get_double("channel.noise_var", sc.noise_var);
  sc.antenna_spacing = get_double("channel.antenna_spacing", sc.antenna_spacing);
  sc.rician_factor = get_double("channel.rician_factor", sc.rician_factor);
  sc.validate();
  return sc;
}

}  // namespace fdd
