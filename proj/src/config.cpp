#include "whitham/config.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>

namespace whitham::cli {
namespace {

constexpr const char* kSubcommands[] = {"wme", "hierarchy", "nls", "converge", "stability", "classify"};
constexpr const char* kAbout[] = {
    "integrate the modulation equations and report energy drift",
    "build the correction levels and report residual orders",
    "run the NLS from modulated data and report W",
    "full eps ladder with fitted orders",
    "linearised wavetrain demonstration",
    "hyperbolicity of the configured data",
};
constexpr const char* kFamilies[] = {"gaussian-bump", "gaussian-dipole", "sech-bump", "sine", "zero", "custom-csv"};

std::string fmt(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

bool power_of_two(unsigned v) { return v >= 8 && (v & (v - 1)) == 0; }

void add_profile(CLI::App& app, const std::string& prefix, ProfileSpec& p) {
  app.add_option("--" + prefix + "_family", p.family, "profile family")->capture_default_str();
  app.add_option("--" + prefix + "_amplitude", p.amplitude, "profile amplitude")->capture_default_str();
  app.add_option("--" + prefix + "_width", p.width, "profile width")->capture_default_str();
  app.add_option("--" + prefix + "_file", p.file, "CSV for custom-csv profiles");
}

std::unique_ptr<CLI::App> make_app(Config& c) {
  auto app = std::make_unique<CLI::App>("Whitham modulation laboratory for the defocusing cubic NLS", "whitham_lab");
  app->allow_config_extras(CLI::config_extras_mode::error);
  app->option_defaults()->always_capture_default();
  add_profile(*app, "r0", c.r0);
  add_profile(*app, "u0", c.u0);
  app->add_option("--gamma", c.gamma, "nonlinearity sign; only -1 is supported");
  app->add_option("--k", c.k, "carrier wavenumber");
  app->add_option("--n", c.n, "hierarchy order");
  app->add_option("--eps", c.eps, "eps ladder, comma separated")->delimiter(',');
  app->add_option("--t0", c.t0, "final slow time");
  app->add_option("--l_slow", c.l_slow, "slow domain length");
  app->add_option("--n_slow", c.n_slow, "slow grid points");
  app->add_option("--n_fast", c.n_fast, "fast grid points (0 = automatic)");
  app->add_option("--cfl", c.cfl, "CFL factor, at most 0.5");
  app->add_option("--slow_dt_max", c.slow_dt_max, "largest slow time step");
  app->add_option("--nls_dt_factor", c.nls_dt_factor, "NLS step as a multiple of eps");
  app->add_option("--snapshots", c.snapshots, "number of uniform output intervals on [0, t0]");
  app->add_option("--slope_tolerance", c.slope_tolerance, "allowance on fitted orders");
  app->add_option("--stab_length", c.stab_length, "stability demo domain length");
  app->add_option("--stab_points", c.stab_points, "stability demo grid points");
  app->add_option("--stab_time", c.stab_time, "stability demo horizon");
  app->add_option("--stab_dt", c.stab_dt, "stability demo output interval");
  app->add_option("--stab_mean", c.stab_mean, "mean of W1(0) in the Jordan case");
  app->add_option("--stab_noise", c.stab_noise, "amplitude of the mean-free part of W(0)");
  app->add_option("--seed", c.seed, "random seed");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--threads", c.threads, "worker threads (0 = automatic)")->envname("WHITHAM_LAB_THREADS");
  return app;
}

void apply_stream(Config& c, std::istream& in) {
  auto app = make_app(c);
  try {
    app->parse_from_stream(in);
  } catch (const CLI::ConfigError& e) {
    throw ConfigError(std::string("configuration: unknown or malformed key (strict mode): ") + e.what());
  } catch (const CLI::ParseError& e) {
    throw ConfigError(std::string("configuration: ") + e.what());
  }
}

}  // namespace

std::string usage_text() {
  Config c;
  auto app = make_app(c);
  app->set_config("--config", "", "configuration file");
  for (std::size_t i = 0; i < std::size(kSubcommands); ++i) app->add_subcommand(kSubcommands[i], kAbout[i]);
  return app->help();
}

ParseOutcome parse_command_line(int argc, const char* const* argv) {
  ParseOutcome out;
  out.usage = usage_text();
  Config& c = out.config;
  auto app = make_app(c);
  app->set_config("--config", "", "configuration file");
  app->require_subcommand(0, 1);
  std::vector<CLI::App*> subs;
  for (const char* name : kSubcommands) {
    auto* s = app->add_subcommand(name, "");
    s->fallthrough();
    subs.push_back(s);
  }
  if (argc <= 1) {
    out.help = true;
    return out;
  }
  try {
    app->parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out.help = true;
    return out;
  } catch (const CLI::ConfigError& e) {
    throw ConfigError(std::string("configuration: unknown or malformed key (strict mode): ") + e.what());
  } catch (const CLI::ParseError& e) {
    throw ConfigError(std::string("configuration: ") + e.what());
  }
  for (auto* s : subs) {
    if (s->parsed()) c.subcommand = s->get_name();
  }
  if (c.subcommand.empty()) {
    out.help = true;
    return out;
  }
  validate(c);
  return out;
}

Config parse_config_text(const std::string& text) {
  Config c;
  std::istringstream in(text);
  apply_stream(c, in);
  validate(c);
  return c;
}

Config parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("configuration: cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize(const Config& c) {
  std::ostringstream o;
  auto profile = [&o](const std::string& p, const ProfileSpec& s) {
    o << p << "_family = \"" << s.family << "\"\n";
    o << p << "_amplitude = " << fmt(s.amplitude) << "\n";
    o << p << "_width = " << fmt(s.width) << "\n";
    if (!s.file.empty()) o << p << "_file = \"" << s.file << "\"\n";
  };
  profile("r0", c.r0);
  profile("u0", c.u0);
  o << "gamma = " << fmt(c.gamma) << "\n";
  o << "k = " << fmt(c.k) << "\n";
  o << "n = " << c.n << "\n";
  o << "eps = [";
  for (std::size_t i = 0; i < c.eps.size(); ++i) o << (i ? ", " : "") << fmt(c.eps[i]);
  o << "]\n";
  o << "t0 = " << fmt(c.t0) << "\n";
  o << "l_slow = " << fmt(c.l_slow) << "\n";
  o << "n_slow = " << c.n_slow << "\n";
  o << "n_fast = " << c.n_fast << "\n";
  o << "cfl = " << fmt(c.cfl) << "\n";
  o << "slow_dt_max = " << fmt(c.slow_dt_max) << "\n";
  o << "nls_dt_factor = " << fmt(c.nls_dt_factor) << "\n";
  o << "snapshots = " << c.snapshots << "\n";
  o << "slope_tolerance = " << fmt(c.slope_tolerance) << "\n";
  o << "stab_length = " << fmt(c.stab_length) << "\n";
  o << "stab_points = " << c.stab_points << "\n";
  o << "stab_time = " << fmt(c.stab_time) << "\n";
  o << "stab_dt = " << fmt(c.stab_dt) << "\n";
  o << "stab_mean = " << fmt(c.stab_mean) << "\n";
  o << "stab_noise = " << fmt(c.stab_noise) << "\n";
  o << "seed = " << c.seed << "\n";
  o << "out = \"" << c.out << "\"\n";
  o << "threads = " << c.threads << "\n";
  return o.str();
}

void validate(const Config& c) {
  auto fail = [](const std::string& m) { throw ConfigError("configuration: " + m); };
  if (c.gamma != -1) {
    fail("gamma = " + fmt(c.gamma) +
         " requested; only the defocusing case gamma = -1 is supported, where the modulation equations are hyperbolic");
  }
  for (const ProfileSpec* p : {&c.r0, &c.u0}) {
    if (std::find(std::begin(kFamilies), std::end(kFamilies), p->family) == std::end(kFamilies)) {
      fail("unknown profile family '" + p->family + "'");
    }
    if (!(p->width > 0)) fail("profile width must be positive");
    if (!std::isfinite(p->amplitude)) fail("profile amplitude must be finite");
    if (p->family == "custom-csv" && p->file.empty()) fail("custom-csv profile needs a file");
  }
  if (!(c.t0 > 0)) fail("t0 must be positive (got " + fmt(c.t0) + ")");
  if (c.n > 3) fail("hierarchy order n must be at most 3");
  if (c.eps.empty()) fail("eps ladder is empty");
  for (std::size_t i = 0; i < c.eps.size(); ++i) {
    if (!(c.eps[i] > 0) || !(c.eps[i] < 1)) fail("eps values must lie in (0, 1)");
    if (i > 0 && !(c.eps[i] < c.eps[i - 1])) fail("eps values must be strictly decreasing");
  }
  for (std::size_t i = 2; i < c.eps.size(); ++i) {
    const double q0 = c.eps[0] / c.eps[1];
    const double q = c.eps[i - 1] / c.eps[i];
    if (std::abs(q - q0) > 1e-9 * q0) fail("eps values must form a geometric sequence");
  }
  if (!(c.l_slow > 0)) fail("l_slow must be positive");
  if (!power_of_two(c.n_slow)) fail("n_slow must be a power of two >= 8");
  if (c.n_fast != 0 && (!power_of_two(c.n_fast) || c.n_fast < c.n_slow)) {
    fail("n_fast must be 0 or a power of two >= n_slow");
  }
  if (!(c.cfl > 0) || c.cfl > 0.5) fail("cfl must lie in (0, 0.5]");
  if (!(c.slow_dt_max > 0)) fail("slow_dt_max must be positive");
  if (!(c.nls_dt_factor > 0)) fail("nls_dt_factor must be positive");
  if (c.snapshots < 1) fail("snapshots must be at least 1");
  if (!(c.slope_tolerance >= 0)) fail("slope_tolerance must be nonnegative");
  if (!(c.k >= 0)) fail("k must be nonnegative");
  for (double e : c.eps) {
    const double unit = 2 * 3.141592653589793 * e / c.l_slow;  // 2 pi / L_fast
    const double q = c.k / unit;
    if (std::abs(q - std::round(q)) > 1e-9 * std::max(1.0, q)) {
      std::ostringstream m;
      m.precision(17);
      m << "k = " << c.k << " is not on the lattice 2 pi Z / L_fast for eps = " << e << "; nearest valid k = "
        << unit * std::round(q);
      fail(m.str());
    }
  }
  if (!(c.stab_length > 0)) fail("stab_length must be positive");
  if (!power_of_two(c.stab_points)) fail("stab_points must be a power of two >= 8");
  if (!(c.stab_time > 0) || !(c.stab_dt > 0)) fail("stab_time and stab_dt must be positive");
  if (c.out.empty()) fail("out must name a directory");
}

std::size_t fast_points(const Config& c, double eps) {
  if (c.n_fast != 0) return c.n_fast;
  const double wavelengths = c.k * c.l_slow / eps / (2 * 3.141592653589793);
  const double need = std::max(2.0 * c.n_slow, 16 * wavelengths);
  std::size_t n = 8;
  while (static_cast<double>(n) < need - 1e-9) n *= 2;
  return n;
}

unsigned resolve_threads(const Config& c) {
  if (c.threads > 0) return c.threads;
  if (const char* env = std::getenv("WHITHAM_LAB_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace whitham::cli
