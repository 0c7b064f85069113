#pragma once

/// @file config.hpp
/// @brief Experiment configuration: key = value files, command-line
/// overrides, validation and derived resolutions.
///
/// Every key can appear in a file passed with --config or as a --key flag;
/// flags win. Unknown keys are fatal.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace whitham::cli {

inline constexpr double default_slow_length = 50.26548245743669;  // 16 pi

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProfileSpec {
  /// gaussian-bump, gaussian-dipole, sech-bump, sine, zero, custom-csv
  std::string family;
  double amplitude = 0.1;
  double width = 1;
  std::string file;

  friend bool operator==(const ProfileSpec&, const ProfileSpec&) = default;
};

struct Config {
  std::string subcommand;

  ProfileSpec r0{"gaussian-bump", 0.1, 1, ""};
  ProfileSpec u0{"gaussian-dipole", 0.1, 1, ""};

  double gamma = -1;
  double k = 1;
  unsigned n = 1;
  std::vector<double> eps{0.2, 0.1, 0.05, 0.025};
  double t0 = 0.5;
  double l_slow = default_slow_length;
  unsigned n_slow = 1024;
  unsigned n_fast = 0;  ///< 0 picks the resolution per eps
  double cfl = 0.25;
  double slow_dt_max = 0.0025;
  double nls_dt_factor = 0.1;
  unsigned snapshots = 50;
  double slope_tolerance = 0.2;

  double stab_length = 100;
  unsigned stab_points = 256;
  double stab_time = 100;
  double stab_dt = 0.5;
  double stab_mean = 0.01;
  double stab_noise = 1e-3;
  std::uint64_t seed = 1;

  std::string out = "run";
  unsigned threads = 0;  ///< 0 means one per hardware thread

  friend bool operator==(const Config&, const Config&) = default;
};

struct ParseOutcome {
  Config config;
  bool help = false;     ///< usage was requested or no subcommand given
  std::string usage;
};

/// Parses argv (subcommand, --config file, flags) and validates the result.
/// Throws ConfigError with a message naming the violated invariant.
ParseOutcome parse_command_line(int argc, const char* const* argv);

/// Parses key = value text with no subcommand and validates it.
Config parse_config_text(const std::string& text);

/// Reads a config file; equivalent to parse_config_text on its contents.
Config parse_config_file(const std::string& path);

/// Every key with its value; parse_config_text(serialize(c)) == c.
std::string serialize(const Config& c);

/// Throws ConfigError unless every invariant holds.
void validate(const Config& c);

/// Fast-grid points for one eps: the configured value, or the smallest power
/// of two giving 16 points per carrier wavelength and twice the slow points.
std::size_t fast_points(const Config& c, double eps);

/// Worker threads: --threads, then WHITHAM_LAB_THREADS, then hardware concurrency.
unsigned resolve_threads(const Config& c);

std::string usage_text();

}  // namespace whitham::cli
