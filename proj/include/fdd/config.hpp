/**
 * @file config.hpp
 * @brief System configuration: array geometry, sub-carrier grid, carriers,
 *        power/noise levels. Loadable from key=value text files.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>

namespace fdd {

inline constexpr double kSpeedOfLight = 299792458.0;

struct SystemConfig {
  int n_antennas = 32;       // N
  int n_users = 16;          // K
  int n_subcarriers = 128;   // M
  double subcarrier_spacing = 180e3;  // Hz
  double ul_carrier = 7.25e9;         // Hz
  double dl_carrier = 7.75e9;         // Hz
  double tx_power = 1.0;              // linear watts, normalized
  double noise_var = 1.0;             // linear
  double antenna_spacing = 0.0;       // meters; 0 => default c/(2 f_ul)
  double rician_factor = 0.0;         // kappa, shared default per user

  // d = lambda_c^ul / 2 when left at the default.
  double spacing() const {
    return antenna_spacing > 0.0 ? antenna_spacing
                                 : kSpeedOfLight / (2.0 * ul_carrier);
  }
  // Lowest sub-carrier index m' = floor(-M/2); m' runs m'..m'+M-1.
  int m_lo() const {
    return static_cast<int>(std::floor(-n_subcarriers / 2.0));
  }
  // UL wavelength of sub-carrier index m' (absolute index, not 1..M).
  double ul_wavelength(int m_abs) const {
    return kSpeedOfLight / (ul_carrier + m_abs * subcarrier_spacing);
  }
  double dl_wavelength() const { return kSpeedOfLight / dl_carrier; }
  // Extrapolation range f = f_dl - f_ul >= 0.
  double extrapolation_range() const { return dl_carrier - ul_carrier; }

  bool narrowband_ok() const {
    return n_subcarriers * subcarrier_spacing < 0.05 * ul_carrier;
  }
  // Throws std::invalid_argument on structural violations; narrowband
  // violations only warn (returned via narrowband_ok()).
  void validate() const;
};

// Flat key=value parser with section prefixes (channel., nomp., rsma.,
// experiment.). '#' starts a comment. Unknown keys are kept and retrievable,
// so downstream modules can pull their own sections from the same file.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;
  static KeyValueConfig from_file(const std::string& path);
  static KeyValueConfig from_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;

  SystemConfig system_config() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace fdd
