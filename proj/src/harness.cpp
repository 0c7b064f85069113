#include "whitham/harness.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "whitham/io.hpp"

namespace whitham::harness {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// two-sided 95% Student t quantiles, df = 1..10
constexpr double kT95[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228};

double t95(std::size_t df) {
  if (df == 0) return std::numeric_limits<double>::infinity();
  if (df <= 10) return kT95[df - 1];
  return 1.96 + 2.5 / static_cast<double>(df);
}

std::string fmt(double v) { return io::format_real(v); }

std::string eps_tag(double eps) { return "eps" + fmt(eps); }

double h1_pair(const RealField& a, const RealField& b) {
  return static_cast<double>(sobolev_norm(a, 1) + sobolev_norm(b, 1));
}

}  // namespace

// ---- fits ------------------------------------------------------------------

SlopeFit fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("fit_slope: x and y differ in length");
  if (xs.size() < 3) throw std::invalid_argument("fit_slope: at least three points are required");
  const std::size_t n = xs.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0) || !(ys[i] > 0) || !std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
      throw std::invalid_argument("fit_slope: values must be positive and finite");
    }
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0)) throw std::invalid_argument("fit_slope: x values must not all coincide");
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = ly[i] - (f.intercept + f.slope * lx[i]);
    f.max_residual = std::max(f.max_residual, std::abs(e));
    ss += e * e;
  }
  f.ci95 = n > 2 ? t95(n - 2) * std::sqrt(ss / static_cast<double>(n - 2) / sxx) : 0;
  return f;
}

SlopeFit fit_slope_or_degenerate(const std::vector<double>& xs, const std::vector<double>& ys, double floor) {
  SlopeFit f;
  std::size_t below = 0;
  for (double y : ys) {
    if (!(y > floor) || !std::isfinite(y)) ++below;
  }
  if (xs.size() < 3 || below > 0) {
    f.degenerate = true;
    f.note = xs.size() < 3 ? "fewer than three points" : "values at or below " + fmt(floor);
    return f;
  }
  return fit_slope(xs, ys);
}

// ---- initial data ------------------------------------------------------------

RealField make_profile(const cli::ProfileSpec& p, const Grid1D& grid) {
  const Real a = p.amplitude;
  const Real w = p.width;
  if (p.family == "gaussian-bump") {
    return RealField::sample(grid, [=](Real x) { return a * std::exp(-(x / w) * (x / w)); });
  }
  if (p.family == "gaussian-dipole") {
    const Real c = a * std::sqrt(2 * std::exp(Real(1)));
    return RealField::sample(grid, [=](Real x) { return -c * (x / w) * std::exp(-(x / w) * (x / w)); });
  }
  if (p.family == "sech-bump") {
    return RealField::sample(grid, [=](Real x) { return a / std::cosh(x / w); });
  }
  if (p.family == "sine") {
    const Real m = std::max<Real>(1, std::round(w));
    const Real L = grid.length();
    return RealField::sample(grid, [=](Real x) { return a * std::sin(2 * pi * m * x / L); });
  }
  if (p.family == "zero") return RealField(grid);
  if (p.family == "custom-csv") {
    RealField f = io::read_field_csv(p.file);
    if (std::abs(f.grid().length() - grid.length()) > 1e-9L * grid.length()) {
      throw cli::ConfigError("configuration: " + p.file + " has domain length " +
                             fmt(static_cast<double>(f.grid().length())) + ", expected " +
                             fmt(static_cast<double>(grid.length())));
    }
    RealField g = f.grid().points() == grid.points() ? f : resample(f, grid.points());
    return RealField(grid, g.data());
  }
  throw cli::ConfigError("configuration: unknown profile family '" + p.family + "'");
}

InitialData prepare_initial_data(const cli::Config& c) {
  const Grid1D grid(c.l_slow, c.n_slow);
  InitialData d{grid, make_profile(c.r0, grid), make_profile(c.u0, grid), RealField(grid), 0, 0, 0};
  const Real m = mean(d.u0);
  if (std::abs(m) > 1e-14L) {
    spdlog::warn("u0 has mean {:.3e}; subtracting it so the phase stays periodic", static_cast<double>(m));
    d.u0 += -m;
    d.u0_mean_removed = static_cast<double>(m);
  }
  d.phi0 = spectral_antiderivative(d.u0);
  const std::size_t edge = std::max<std::size_t>(1, grid.points() / 50);
  for (std::size_t j = 0; j < edge; ++j) {
    for (std::size_t i : {j, grid.points() - 1 - j}) {
      d.edge_r = std::max(d.edge_r, static_cast<double>(std::abs(d.r0[i])));
      d.edge_u = std::max(d.edge_u, static_cast<double>(std::abs(d.u0[i])));
    }
  }
  if (d.edge_r > 1e-8 || d.edge_u > 1e-8) {
    spdlog::warn("initial data is not small at the domain edge (|r0| {:.2e}, |u0| {:.2e})", d.edge_r, d.edge_u);
  }
  return d;
}

SlowPlan plan_slow_steps(const cli::Config& c, const InitialData& d) {
  const Real cap = wme::cfl_step(wme::ModulationState{0, d.r0, d.u0, c.k}, c.cfl);
  const Real limit = std::min<Real>(c.slow_dt_max, cap);
  const Real interval = static_cast<Real>(c.t0) / c.snapshots;
  const auto m = static_cast<std::size_t>(std::ceil(interval / limit - 1e-12L));
  SlowPlan p;
  p.stride = std::max<std::size_t>(1, m);
  p.steps = p.stride * c.snapshots;
  p.dt = static_cast<Real>(c.t0) / static_cast<Real>(p.steps);
  for (std::size_t j = 0; j <= c.snapshots; ++j) p.snapshot_nodes.push_back(j * p.stride);
  return p;
}

// ---- hyperbolicity ---------------------------------------------------------

Classification classify_hyperbolicity(const RealField& theta_T, const RealField& theta_X) {
  theta_T.require_same_grid(theta_X);
  Classification out;
  out.sign.resize(theta_T.size());
  bool neg = false, nonneg = false;
  for (std::size_t j = 0; j < theta_T.size(); ++j) {
    const Real v = theta_T[j] + theta_X[j] * theta_X[j];
    out.sign[j] = v < 0 ? -1 : (v > 0 ? 1 : 0);
    (v < 0 ? neg : nonneg) = true;
  }
  out.summary = neg && nonneg ? "mixed" : (neg ? "hyperbolic" : "elliptic");
  return out;
}

// ---- base and levels -------------------------------------------------------

BaseSolution solve_base(const cli::Config& c) {
  const auto t_start = Clock::now();
  InitialData d = prepare_initial_data(c);
  SlowPlan plan = plan_slow_steps(c, d);
  const wme::ModulationState s0{0, d.r0, d.u0, c.k};
  wme::WmeOptions opt;
  opt.cfl_factor = c.cfl;
  const Real T = plan.dt * static_cast<Real>(plan.steps);
  wme::WmeTrajectory base = wme_integrate(s0, T, plan.dt, opt);

  BaseSolution b{std::move(d), std::move(plan), hierarchy::build_hierarchy(base, c.n, base.path.dt()), 0, 0, 0, 0, {}, true, 0};
  const auto& path = b.hier.base.path;
  const Real e0 = wme::wme_energy(s0);
  const Real m0 = mean(b.data.u0);
  b.level_sup_h1.assign(b.hier.levels.size(), 0);
  for (std::size_t n = 0; n <= path.steps(); ++n) {
    const auto st = b.hier.base.at(n);
    const Real e = wme::wme_energy(st);
    if (e0 > 0) b.energy_drift = std::max(b.energy_drift, static_cast<double>(std::abs(e - e0) / e0));
    b.mean_u_drift = std::max(b.mean_u_drift, static_cast<double>(std::abs(mean(st.u) - m0)));
    for (std::size_t l = 0; l < b.hier.levels.size(); ++l) {
      const auto& y = b.hier.levels[l].node(n);
      b.level_sup_h1[l] = std::max(b.level_sup_h1[l], h1_pair(y.first, y.second));
    }
  }
  for (double v : b.level_sup_h1) b.level_bound = std::max(b.level_bound, v);

  auto tail = [](const RealField& f) { return static_cast<double>(spectral_tail_ratio(spectral_derivative(f, 3))); };
  const auto& last = path.node(path.steps());
  b.tail_ratio = std::max(tail(last.first), tail(last.second));
  for (const auto& lv : b.hier.levels) {
    const auto& y = lv.node(lv.steps());
    b.tail_ratio = std::max({b.tail_ratio, tail(y.first), tail(y.second)});
  }
  if (b.tail_ratio > 1e-10) {
    spdlog::warn("third derivatives are under-resolved: spectral tail {:.2e} of the peak (n_slow = {})", b.tail_ratio,
                 c.n_slow);
  }

  // At eps = 0 the phase satisfies Theta_T + Theta_X^2 = -e^{2r}.
  const auto omega = nls::WaveParams::for_wavenumber(c.k).omega;
  for (std::size_t node : b.plan.snapshot_nodes) {
    const auto& y = path.node(node);
    const RealField theta_X = y.second + static_cast<Real>(c.k);
    const RealField theta_T = hierarchy::phase_rhs(y, c.k, 0) + omega;
    if (classify_hyperbolicity(theta_T, theta_X).summary != "hyperbolic") b.base_hyperbolic = false;
  }
  b.runtime = seconds_since(t_start);
  return b;
}

// ---- one eps ---------------------------------------------------------------

std::string w_snapshot_name(double eps) { return "W_" + eps_tag(eps) + ".csv"; }
std::string psi_snapshot_name(double eps) { return "psi_" + eps_tag(eps) + ".csv"; }

EpsRun run_eps(const cli::Config& c, const BaseSolution& b, double eps, bool with_nls,
               const std::string& snapshot_dir) {
  const auto t_start = Clock::now();
  EpsRun row;
  row.eps = eps;
  row.n = c.n;
  row.t0 = c.t0;
  const auto& h = b.hier;
  const auto& nodes = b.plan.snapshot_nodes;
  const Real e = eps;
  try {
    const auto phase = hierarchy::lift_phase(h, e, b.data.phi0, h.dt());
    const auto res = hierarchy::residuals(h, phase, e, nodes);
    row.path_gap = static_cast<double>(hierarchy::relative_path_gap(res));
    row.series.resize(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      auto& s = row.series[j];
      const auto& r = res[j];
      s.T = static_cast<double>(r.T);
      s.res_h1 = static_cast<double>(r.norm_h1);
      s.res_h2 = static_cast<double>(r.norm_h2);
      s.path_gap = static_cast<double>(r.path_gap_h1);
      s.forcing_sq = static_cast<double>(std::pow(sobolev_norm(r.res_A, 1), 2) +
                                         std::pow(sobolev_norm(r.res_phi, 1) / e, 2));
      row.res_h1 = std::max(row.res_h1, s.res_h1);
      row.res_h2 = std::max(row.res_h2, s.res_h2);
      row.gradient_identity = std::max(row.gradient_identity, static_cast<double>(r.gradient_identity));

      const auto& ph = phase.nodes[nodes[j]];
      const RealField theta_X = spectral_derivative(ph.phi_hat) + static_cast<Real>(c.k);
      const RealField theta_T = ph.phi_T + nls::WaveParams::for_wavenumber(c.k).omega;
      s.classification = classify_hyperbolicity(theta_T, theta_X).summary;
      if (s.classification != "hyperbolic") row.hyperbolic = false;
    }
    if (!with_nls) {
      row.runtime = seconds_since(t_start);
      return row;
    }

    const auto params = nls::WaveParams::for_wavenumber(c.k);
    row.n_fast = cli::fast_points(c, eps);
    nls::NlsState state = nls::nls_init(b.data.r0, b.data.phi0, params, e, row.n_fast);
    const Real mass0 = nls::mass(state.psi);
    const Real fast_interval = b.plan.dt * static_cast<Real>(b.plan.stride) / e;
    const auto sub = static_cast<std::size_t>(std::ceil(fast_interval / (c.nls_dt_factor * e) - 1e-12L));
    const Real dt = fast_interval / static_cast<Real>(sub);
    row.nls_dt = static_cast<double>(dt);

    std::vector<Real> times, energy, forcing;
    double v_scale = 0;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (j > 0) nls::nls_advance(state, dt, sub);
      auto& s = row.series[j];
      const Real T = h.dt() * static_cast<Real>(nodes[j]);
      const auto& ph = phase.nodes[nodes[j]];
      const auto ru = hierarchy::assembled_state(h, e, wme::StageRef{nodes[j], 0});
      const auto rate = hierarchy::assembled_rate(h, e, wme::StageRef{nodes[j], 0});
      const auto dev = nls::extract_W(state, ph.A_hat, ph.phi_hat, params, e, T);
      s.w_h1 = static_cast<double>(nls::deviation_h1(dev));
      s.w_l2 = static_cast<double>(std::hypot(l2_norm(dev.W1), l2_norm(dev.W2)));
      s.w1_l2 = static_cast<double>(l2_norm(dev.W1));
      s.w2_l2 = static_cast<double>(l2_norm(dev.W2));
      s.w_linf = static_cast<double>(nls::deviation_linf(dev));
      s.d_h1 = static_cast<double>(std::hypot(sobolev_norm(dev.D1, 1), sobolev_norm(dev.D2, 1)));
      s.band_fraction = static_cast<double>(dev.band_fraction);
      s.validity = static_cast<double>(nls::validity_energy(dev, ru.first, e));
      s.mass_drift = static_cast<double>(std::abs(nls::mass(state.psi) - mass0) / mass0);
      const auto v = nls::v_equation_defect(state, ru.first, rate.first, ph.phi_hat, ph.phi_T, res[j].res_A,
                                            res[j].res_phi, params, e, T);
      s.v_defect = static_cast<double>(v.defect);
      v_scale = std::max(v_scale, static_cast<double>(v.scale));

      row.err_h1 = std::max(row.err_h1, s.w_h1);
      row.err_linf = std::max(row.err_linf, s.w_linf);
      row.err_unscaled_h1 = std::max(row.err_unscaled_h1, s.d_h1);
      row.mass_drift = std::max(row.mass_drift, s.mass_drift);
      row.v_defect = std::max(row.v_defect, s.v_defect);
      times.push_back(T);
      energy.push_back(s.validity);
      forcing.push_back(s.forcing_sq);
      if (!snapshot_dir.empty() && j + 1 == nodes.size()) {
        const std::filesystem::path dir = snapshot_dir;
        std::filesystem::create_directories(dir);
        io::write_field_csv(dir / w_snapshot_name(eps), to_complex(dev.W1, dev.W2));
        io::write_field_csv(dir / psi_snapshot_name(eps), state.psi);
      }
    }
    if (v_scale > 0) row.v_defect /= v_scale;
    const auto g = wme::fit_gronwall_single(times, energy, forcing);
    row.gronwall_c = g.finite ? static_cast<double>(g.forcing) : -1;
  } catch (const std::exception& ex) {
    row.status = ex.what();
    spdlog::error("eps = {}: {}", eps, ex.what());
  }
  row.runtime = seconds_since(t_start);
  return row;
}

ConvergenceTable run_convergence(const cli::Config& c, const BaseSolution& b, bool with_nls,
                                 const std::string& snapshot_dir) {
  ConvergenceTable t;
  t.rows.resize(c.eps.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < c.eps.size(); i = next++) t.rows[i] = run_eps(c, b, c.eps[i], with_nls, snapshot_dir);
  };
  const unsigned workers = std::min<unsigned>(cli::resolve_threads(c), static_cast<unsigned>(c.eps.size()));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::vector<double> xs, err, linf, res;
  for (const auto& r : t.rows) {
    if (r.status != "ok") continue;
    xs.push_back(r.eps);
    err.push_back(r.err_h1);
    linf.push_back(r.err_linf);
    res.push_back(r.res_h1);
  }
  // below these the data are roundoff (exact wavetrain), not a power law
  constexpr double residual_floor = 1e-12;
  constexpr double deviation_floor = 1e-10;
  t.res_slope = fit_slope_or_degenerate(xs, res, residual_floor);
  if (with_nls) {
    t.err_slope = fit_slope_or_degenerate(xs, err, deviation_floor);
    t.linf_slope = fit_slope_or_degenerate(xs, linf, deviation_floor);
  } else {
    t.err_slope.degenerate = t.linf_slope.degenerate = true;
    t.err_slope.note = t.linf_slope.note = "NLS not run";
  }
  return t;
}

ConvergenceTable run_convergence(const cli::Config& c) { return run_convergence(c, solve_base(c), true); }

// ---- self-convergence ------------------------------------------------------

SelfConvergence self_convergence(const cli::Config& c) {
  cli::Config s = c;
  s.n_slow = 256;
  const InitialData d = prepare_initial_data(s);
  const Real T = std::min<Real>(c.t0, 0.2L);
  const Real eps = c.eps.front();
  wme::WmeOptions opt;
  opt.cfl_factor = 0.5L;
  const Real cap = wme::cfl_step(wme::ModulationState{0, d.r0, d.u0, c.k}, opt.cfl_factor);
  std::size_t steps = 4;
  while (T / static_cast<Real>(steps) > cap) steps *= 2;

  std::vector<wme::FieldPair> ys;
  std::vector<RealField> phis;
  for (int i = 0; i < 3; ++i, steps *= 2) {
    const Real dt = T / static_cast<Real>(steps);
    const auto base = wme::wme_integrate(wme::ModulationState{0, d.r0, d.u0, c.k}, T, dt, opt);
    const auto h = hierarchy::build_hierarchy(base, 1, dt);
    const auto phase = hierarchy::lift_phase(h, eps, d.phi0, dt);
    const auto& y = base.path.node(base.path.steps());
    ys.push_back({y.first, y.second});
    phis.push_back(phase.nodes.back().phi_hat);
  }
  SelfConvergence out;
  for (int i = 0; i < 2; ++i) {
    out.rk4_diffs.push_back(h1_pair(ys[i].first - ys[i + 1].first, ys[i].second - ys[i + 1].second));
    out.phase_diffs.push_back(static_cast<double>(sobolev_norm(phis[i] - phis[i + 1], 1)));
  }

  const auto params = nls::WaveParams::for_wavenumber(c.k);
  const std::size_t nf = cli::fast_points(s, eps);
  const nls::NlsState init = nls::nls_init(d.r0, d.phi0, params, eps, nf);
  const Real t_final = 1;
  std::vector<ComplexField> psis;
  for (std::size_t m = 20; m <= 80; m *= 2) {
    nls::NlsState st = init;
    nls::nls_advance(st, t_final / static_cast<Real>(m), m);
    psis.push_back(st.psi);
  }
  for (int i = 0; i < 2; ++i) out.strang_diffs.push_back(static_cast<double>(l2_norm(psis[i] - psis[i + 1])));

  auto order = [](const std::vector<double>& v) { return v[1] > 0 ? std::log2(v[0] / v[1]) : 0.0; };
  out.rk4_order = order(out.rk4_diffs);
  out.phase_order = order(out.phase_diffs);
  out.strang_order = order(out.strang_diffs);
  return out;
}

// ---- wavetrain stability ---------------------------------------------------

namespace {

StabilityCase run_case(const std::string& name, const RealField& W1, const RealField& W2, const cli::Config& c) {
  const auto params = nls::WaveParams::for_wavenumber(c.k);
  StabilityCase out;
  out.name = name;
  out.mean_w1 = static_cast<double>(mean(W1));
  const Real L = W1.grid().length();
  out.w2_slope_expected = static_cast<double>(2 * std::abs(nls::gamma) * std::abs(mean(W1)) * std::sqrt(L));

  // |W2-hat(t)| <= |W2-hat(0)| + |M_21| / nu |W1-hat(0)| per mode; infinite when mean W1 != 0.
  const Grid1D& g = W1.grid();
  const auto F1 = forward_spectrum(to_complex(W1, RealField(g)));
  const auto F2 = forward_spectrum(to_complex(W2, RealField(g)));
  Real env = 0;
  for (std::size_t m = 0; m < F1.size(); ++m) {
    const Real xi = g.wavenumber(m);
    Real gain;
    if (xi == 0) {
      gain = std::abs(F1[m]) > 1e-12L * static_cast<Real>(g.points()) ? std::numeric_limits<Real>::infinity() : 0;
    } else {
      gain = std::sqrt(xi * xi - 2 * nls::gamma) / std::abs(xi);
    }
    const Real a = std::abs(F2[m]) + gain * std::abs(F1[m]);
    env += a * a;
  }
  out.w2_envelope = static_cast<double>(std::sqrt(env * g.spacing() / static_cast<Real>(g.points())));

  const auto samples = nls::wavetrain_linearized(to_complex(W1, W2), params, c.stab_time, c.stab_dt);
  const Real q0 = samples.front().conserved;
  const Real wx0 = samples.front().wx_l2;
  for (const auto& s : samples) {
    out.t.push_back(static_cast<double>(s.t));
    out.conserved.push_back(static_cast<double>(s.conserved));
    out.w2_l2.push_back(static_cast<double>(s.w2_l2));
    out.wx_l2.push_back(static_cast<double>(s.wx_l2));
    out.conserved_drift = std::max(out.conserved_drift, static_cast<double>(std::abs(s.conserved - q0) / q0));
    out.w2_max = std::max(out.w2_max, static_cast<double>(s.w2_l2));
    if (wx0 > 0) out.wx_ratio = std::max(out.wx_ratio, static_cast<double>(s.wx_l2 / wx0));
  }
  // least squares line through the second half
  double st = 0, sw = 0, stt = 0, stw = 0, n = 0;
  for (std::size_t i = 0; i < out.t.size(); ++i) {
    if (out.t[i] < 0.5 * c.stab_time) continue;
    st += out.t[i];
    sw += out.w2_l2[i];
    stt += out.t[i] * out.t[i];
    stw += out.t[i] * out.w2_l2[i];
    n += 1;
  }
  if (n >= 2) out.w2_slope = (n * stw - st * sw) / (n * stt - st * st);
  return out;
}

}  // namespace

StabilityReport run_stability_demo(const cli::Config& c) {
  const Grid1D g(c.stab_length, c.stab_points);
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  constexpr int modes = 8;
  std::array<double, 4 * modes> coef{};
  for (auto& v : coef) v = uni(rng);
  auto noise = [&](int offset) {
    return RealField::sample(g, [&](Real x) {
      Real s = 0;
      for (int m = 1; m <= modes; ++m) {
        const Real arg = 2 * pi * m * x / g.length();
        s += coef[offset + 2 * (m - 1)] * std::cos(arg) + coef[offset + 2 * (m - 1) + 1] * std::sin(arg);
      }
      return static_cast<Real>(c.stab_noise) * s / modes;
    });
  };
  const RealField n1 = noise(0);
  const RealField n2 = noise(2 * modes);

  StabilityReport rep;
  rep.mean_free = run_case("mean-free", n1, n2, c);
  rep.jordan = run_case("jordan", n1 + static_cast<Real>(c.stab_mean), n2, c);

  for (int j = 1; j <= 200; ++j) {
    for (Real sign : {Real(-1), Real(1)}) {
      const auto ev = nls::eigenvalues(nls::wavetrain_symbol(sign * Real(0.05) * j, c.k));
      for (const auto& l : ev) rep.max_real_part = std::max(rep.max_real_part, static_cast<double>(std::abs(l.real())));
      ++rep.sampled_xi;
    }
  }
  rep.jordan_rank = nls::rank_shifted(nls::wavetrain_symbol(0, c.k), 0);
  return rep;
}

// ---- reports ---------------------------------------------------------------

bool RunReport::all_pass() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.pass; });
}

bool operator==(const SlopeFit& a, const SlopeFit& b) {
  return a.slope == b.slope && a.intercept == b.intercept && a.max_residual == b.max_residual && a.ci95 == b.ci95 &&
         a.degenerate == b.degenerate && a.note == b.note;
}

bool operator==(const ConvergenceTable& a, const ConvergenceTable& b) {
  return a.rows == b.rows && a.err_slope == b.err_slope && a.linf_slope == b.linf_slope && a.res_slope == b.res_slope;
}

bool operator==(const RunReport& a, const RunReport& b) {
  return a.config == b.config && a.input_hash == b.input_hash && a.scalars == b.scalars && a.notes == b.notes &&
         a.convergence == b.convergence && a.stability == b.stability && a.self == b.self &&
         a.criteria == b.criteria;
}

namespace {

json fit_json(const SlopeFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"max_residual", f.max_residual}, {"ci95", f.ci95},
          {"degenerate", f.degenerate}, {"note", f.note}};
}

SlopeFit fit_from(const json& j) {
  SlopeFit f;
  f.slope = j.at("slope");
  f.intercept = j.at("intercept");
  f.max_residual = j.at("max_residual");
  f.ci95 = j.at("ci95");
  f.degenerate = j.at("degenerate");
  f.note = j.at("note");
  return f;
}

#define ROW_FIELDS(X)                                                                                         \
  X(T) X(w_l2) X(w_h1) X(w1_l2) X(w2_l2) X(w_linf) X(d_h1) X(validity) X(forcing_sq) X(res_h1) X(res_h2) \
  X(path_gap) X(band_fraction) X(v_defect) X(mass_drift) X(classification)

#define RUN_FIELDS(X)                                                                                       \
  X(eps) X(n) X(t0) X(n_fast) X(nls_dt) X(status) X(err_h1) X(err_linf) X(err_unscaled_h1) X(res_h1) \
  X(res_h2) X(path_gap) X(gradient_identity) X(mass_drift) X(v_defect) X(gronwall_c) X(hyperbolic)

#define CASE_FIELDS(X)                                                                                          \
  X(name) X(mean_w1) X(conserved_drift) X(w2_slope) X(w2_slope_expected) X(w2_max) X(w2_envelope) X(wx_ratio) \
  X(t) X(conserved) X(w2_l2) X(wx_l2)

#define TO_JSON(f) j[#f] = v.f;
#define FROM_JSON(f) j.at(#f).get_to(v.f);

json row_json(const SnapshotRow& v) {
  json j;
  ROW_FIELDS(TO_JSON)
  return j;
}

SnapshotRow row_from(const json& j) {
  SnapshotRow v;
  ROW_FIELDS(FROM_JSON)
  return v;
}

json run_json(const EpsRun& v) {
  json j;
  RUN_FIELDS(TO_JSON)
  j["series"] = json::array();
  for (const auto& s : v.series) j["series"].push_back(row_json(s));
  return j;
}

EpsRun run_from(const json& j) {
  EpsRun v;
  RUN_FIELDS(FROM_JSON)
  for (const auto& s : j.at("series")) v.series.push_back(row_from(s));
  return v;
}

json case_json(const StabilityCase& v) {
  json j;
  CASE_FIELDS(TO_JSON)
  return j;
}

StabilityCase case_from(const json& j) {
  StabilityCase v;
  CASE_FIELDS(FROM_JSON)
  return v;
}

#undef TO_JSON
#undef FROM_JSON

// Non-finite numbers have no JSON form; they are written as strings.
json number(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

double number_from(const json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  return s == "inf" ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

}  // namespace

std::string report_to_json(const RunReport& r) {
  json j;
  j["subcommand"] = r.config.subcommand;
  j["config"] = cli::serialize(r.config);
  j["input_hash"] = r.input_hash;
  j["scalars"] = json::object();
  for (const auto& [k, v] : r.scalars) j["scalars"][k] = number(v);
  j["notes"] = r.notes;
  if (r.convergence) {
    json t;
    t["rows"] = json::array();
    for (const auto& row : r.convergence->rows) t["rows"].push_back(run_json(row));
    t["err_slope"] = fit_json(r.convergence->err_slope);
    t["linf_slope"] = fit_json(r.convergence->linf_slope);
    t["res_slope"] = fit_json(r.convergence->res_slope);
    j["convergence"] = t;
  }
  if (r.stability) {
    const auto& s = *r.stability;
    j["stability"] = {{"mean_free", case_json(s.mean_free)},
                      {"jordan", case_json(s.jordan)},
                      {"max_real_part", s.max_real_part},
                      {"sampled_xi", s.sampled_xi},
                      {"jordan_rank", s.jordan_rank}};
    j["stability"]["mean_free"]["w2_envelope"] = number(s.mean_free.w2_envelope);
    j["stability"]["jordan"]["w2_envelope"] = number(s.jordan.w2_envelope);
  }
  if (r.self) {
    j["self_convergence"] = {{"rk4_diffs", r.self->rk4_diffs},     {"phase_diffs", r.self->phase_diffs},
                             {"strang_diffs", r.self->strang_diffs}, {"rk4_order", r.self->rk4_order},
                             {"phase_order", r.self->phase_order},   {"strang_order", r.self->strang_order}};
  }
  j["criteria"] = json::array();
  for (const auto& c : r.criteria) {
    j["criteria"].push_back({{"id", c.id}, {"description", c.description}, {"pass", c.pass}, {"detail", c.detail}});
  }
  j["all_pass"] = r.all_pass();
  return j.dump(2) + "\n";
}

RunReport report_from_json(const std::string& text) {
  const json j = json::parse(text);
  RunReport r;
  r.config = cli::parse_config_text(j.at("config").get<std::string>());
  r.config.subcommand = j.at("subcommand");
  r.input_hash = j.at("input_hash");
  for (const auto& [k, v] : j.at("scalars").items()) r.scalars[k] = number_from(v);
  j.at("notes").get_to(r.notes);
  if (j.contains("convergence")) {
    const auto& t = j["convergence"];
    ConvergenceTable c;
    for (const auto& row : t.at("rows")) c.rows.push_back(run_from(row));
    c.err_slope = fit_from(t.at("err_slope"));
    c.linf_slope = fit_from(t.at("linf_slope"));
    c.res_slope = fit_from(t.at("res_slope"));
    r.convergence = c;
  }
  if (j.contains("stability")) {
    const auto& s = j["stability"];
    StabilityReport rep;
    json mf = s.at("mean_free"), jo = s.at("jordan");
    const double e1 = number_from(mf.at("w2_envelope")), e2 = number_from(jo.at("w2_envelope"));
    mf["w2_envelope"] = 0;
    jo["w2_envelope"] = 0;
    rep.mean_free = case_from(mf);
    rep.jordan = case_from(jo);
    rep.mean_free.w2_envelope = e1;
    rep.jordan.w2_envelope = e2;
    rep.max_real_part = s.at("max_real_part");
    rep.sampled_xi = s.at("sampled_xi");
    rep.jordan_rank = s.at("jordan_rank");
    r.stability = rep;
  }
  if (j.contains("self_convergence")) {
    const auto& s = j["self_convergence"];
    SelfConvergence v;
    s.at("rk4_diffs").get_to(v.rk4_diffs);
    s.at("phase_diffs").get_to(v.phase_diffs);
    s.at("strang_diffs").get_to(v.strang_diffs);
    v.rk4_order = s.at("rk4_order");
    v.phase_order = s.at("phase_order");
    v.strang_order = s.at("strang_order");
    r.self = v;
  }
  for (const auto& c : j.at("criteria")) {
    r.criteria.push_back({c.at("id"), c.at("description"), c.at("pass"), c.at("detail")});
  }
  return r;
}

std::string input_hash(const cli::Config& c) {
  std::string blob = c.subcommand + "\n" + cli::serialize(c);
  for (const auto* p : {&c.r0, &c.u0}) {
    if (p->family == "custom-csv") blob += io::read_text(p->file);
  }
  return io::content_hash(blob);
}

// ---- outputs ---------------------------------------------------------------

namespace {

std::string table_csv(const ConvergenceTable& t) {
  std::ostringstream o;
  o << "eps,n,T0,err_H1,err_Linf,res_H1,res_H2,path_gap,mass_drift,v_defect,status\n";
  for (const auto& r : t.rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    o << fmt(r.eps) << ',' << r.n << ',' << fmt(r.t0) << ',' << fmt(r.err_h1) << ',' << fmt(r.err_linf) << ','
      << fmt(r.res_h1) << ',' << fmt(r.res_h2) << ',' << fmt(r.path_gap) << ',' << fmt(r.mass_drift) << ','
      << fmt(r.v_defect) << ',' << '"' << status << '"' << '\n';
  }
  return o.str();
}

std::string series_dat(const EpsRun& r) {
  std::ostringstream o;
  o << "# eps = " << fmt(r.eps) << ", n = " << r.n << "\n";
  o << "# T w_H1 w_L2 w1_L2 w2_L2 w_Linf d_H1 validity forcing_sq res_H1 res_H2 path_gap v_defect mass_drift\n";
  for (const auto& s : r.series) {
    o << fmt(s.T) << ' ' << fmt(s.w_h1) << ' ' << fmt(s.w_l2) << ' ' << fmt(s.w1_l2) << ' ' << fmt(s.w2_l2) << ' '
      << fmt(s.w_linf) << ' ' << fmt(s.d_h1) << ' ' << fmt(s.validity) << ' ' << fmt(s.forcing_sq) << ' '
      << fmt(s.res_h1) << ' ' << fmt(s.res_h2) << ' ' << fmt(s.path_gap) << ' ' << fmt(s.v_defect) << ' '
      << fmt(s.mass_drift) << '\n';
  }
  return o.str();
}

std::string residual_csv(const EpsRun& r) {
  std::ostringstream o;
  o << "T,res_H1,res_H2,path_gap_H1\n";
  for (const auto& s : r.series) o << fmt(s.T) << ',' << fmt(s.res_h1) << ',' << fmt(s.res_h2) << ',' << fmt(s.path_gap) << '\n';
  return o.str();
}

std::string w_series_csv(const EpsRun& r) {
  std::ostringstream o;
  o << "T,W_L2,W_H1,W1_L2,W2_L2,validity_energy\n";
  for (const auto& s : r.series) {
    o << fmt(s.T) << ',' << fmt(s.w_l2) << ',' << fmt(s.w_h1) << ',' << fmt(s.w1_l2) << ',' << fmt(s.w2_l2) << ','
      << fmt(s.validity) << '\n';
  }
  return o.str();
}

std::string stability_dat(const StabilityReport& s) {
  std::ostringstream o;
  o << "# t conserved_meanfree w2_meanfree wx_meanfree conserved_jordan w2_jordan wx_jordan\n";
  for (std::size_t i = 0; i < s.mean_free.t.size(); ++i) {
    o << fmt(s.mean_free.t[i]) << ' ' << fmt(s.mean_free.conserved[i]) << ' ' << fmt(s.mean_free.w2_l2[i]) << ' '
      << fmt(s.mean_free.wx_l2[i]) << ' ' << fmt(s.jordan.conserved[i]) << ' ' << fmt(s.jordan.w2_l2[i]) << ' '
      << fmt(s.jordan.wx_l2[i]) << '\n';
  }
  return o.str();
}

}  // namespace

void write_outputs(const RunReport& r, const std::vector<std::string>& written) {
  const std::filesystem::path dir = r.config.out;
  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back("config.ini", cli::serialize(r.config));
  files.emplace_back("report.json", report_to_json(r));
  if (r.convergence) {
    files.emplace_back("table.csv", table_csv(*r.convergence));
    std::ostringstream timings;
    timings << "eps,runtime_s\n";
    for (const auto& row : r.convergence->rows) {
      files.emplace_back("series_" + eps_tag(row.eps) + ".dat", series_dat(row));
      files.emplace_back("residuals_" + eps_tag(row.eps) + ".csv", residual_csv(row));
      if (row.n_fast > 0) files.emplace_back("w_" + eps_tag(row.eps) + ".csv", w_series_csv(row));
      timings << fmt(row.eps) << ',' << std::fixed << std::setprecision(3) << row.runtime << '\n';
      timings.unsetf(std::ios::fixed);
    }
    io::write_text(dir / "timings.csv", timings.str());
  }
  if (r.stability) files.emplace_back("stability.dat", stability_dat(*r.stability));
  if (r.notes.count("hierarchy_manifest")) files.emplace_back("hierarchy.json", r.notes.at("hierarchy_manifest"));

  json manifest;
  manifest["input_hash"] = r.input_hash;
  manifest["subcommand"] = r.config.subcommand;
  manifest["files"] = json::object();
  for (const auto& [name, content] : files) {
    io::write_text(dir / name, content);
    manifest["files"][name] = io::content_hash(content);
  }
  for (const auto& name : written) {
    if (std::filesystem::exists(dir / name)) manifest["files"][name] = io::content_hash(io::read_text(dir / name));
  }
  io::write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

// ---- subcommands -----------------------------------------------------------

namespace {

std::string sci(double v) {
  std::ostringstream o;
  o << std::scientific << std::setprecision(3) << v;
  return o.str();
}

std::string fixed2(double v) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(3) << v;
  return o.str();
}

void base_scalars(RunReport& rep, const BaseSolution& b) {
  rep.scalars["slow_dt"] = static_cast<double>(b.plan.dt);
  rep.scalars["slow_steps"] = static_cast<double>(b.plan.steps);
  rep.scalars["energy_drift"] = b.energy_drift;
  rep.scalars["mean_u_drift"] = b.mean_u_drift;
  rep.scalars["level_bound_h1"] = b.level_bound;
  rep.scalars["spectral_tail"] = b.tail_ratio;
  rep.scalars["edge_r0"] = b.data.edge_r;
  rep.scalars["edge_u0"] = b.data.edge_u;
  rep.scalars["u0_mean_removed"] = b.data.u0_mean_removed;
  json m;
  m["order"] = b.hier.n;
  m["steps"] = b.plan.steps;
  m["dt"] = static_cast<double>(b.plan.dt);
  m["levels"] = json::array();
  for (std::size_t l = 0; l < b.level_sup_h1.size(); ++l) {
    const auto& y = b.hier.levels[l].node(0);
    m["levels"].push_back({{"level", l + 1},
                           {"sup_h1", b.level_sup_h1[l]},
                           {"initial_linf", static_cast<double>(std::max(linf_norm(y.first), linf_norm(y.second)))}});
  }
  m["spectral_tail"] = b.tail_ratio;
  rep.notes["hierarchy_manifest"] = m.dump(2) + "\n";
}

// r and u at every snapshot plus a manifest of times, grid, parameters and energies.
std::vector<std::string> export_wme(const cli::Config& c, const BaseSolution& b) {
  const std::filesystem::path dir = std::filesystem::path(c.out) / "wme";
  std::vector<std::string> names;
  json m;
  m["grid"] = {{"length", static_cast<double>(b.data.grid.length())}, {"points", b.data.grid.points()}};
  m["k"] = c.k;
  m["dt"] = static_cast<double>(b.plan.dt);
  m["times"] = json::array();
  m["energy"] = json::array();
  for (std::size_t j = 0; j < b.plan.snapshot_nodes.size(); ++j) {
    const auto st = b.hier.base.at(b.plan.snapshot_nodes[j]);
    std::ostringstream tag;
    tag << std::setw(3) << std::setfill('0') << j;
    for (const auto& [name, f] : {std::pair{"r", &st.r}, std::pair{"u", &st.u}}) {
      const std::string file = std::string("wme/") + name + "_" + tag.str() + ".csv";
      io::write_field_csv(std::filesystem::path(c.out) / file, *f);
      names.push_back(file);
    }
    m["times"].push_back(static_cast<double>(st.T));
    m["energy"].push_back(static_cast<double>(wme::wme_energy(st)));
  }
  io::write_text(dir / "manifest.json", m.dump(2) + "\n");
  names.push_back("wme/manifest.json");
  return names;
}

void energy_criterion(RunReport& rep, const BaseSolution& b) {
  rep.criteria.push_back({"energy", "relative energy drift of the modulation equations below 1e-8",
                          b.energy_drift < 1e-8, "drift " + sci(b.energy_drift)});
}

void residual_criteria(RunReport& rep, const cli::Config& c, const ConvergenceTable& t) {
  const double need = 2.0 * (c.n + 1) - c.slope_tolerance;
  bool ok = true;
  double gap = 0, grad = 0;
  for (const auto& r : t.rows) {
    if (r.status != "ok") ok = false;
    gap = std::max(gap, r.path_gap);
    grad = std::max(grad, r.gradient_identity);
  }
  Criterion order{"residual_order", "fitted order of sup residual at least 2(n+1) - tolerance", false, ""};
  if (t.res_slope.degenerate) {
    double worst = 0;
    for (const auto& r : t.rows) worst = std::max(worst, r.res_h1);
    order.pass = ok && worst < 1e-10;
    order.detail = "degenerate fit (" + t.res_slope.note + "); largest residual " + sci(worst);
  } else {
    order.pass = ok && t.res_slope.slope >= need;
    order.detail = "slope " + fixed2(t.res_slope.slope) + " +/- " + fixed2(t.res_slope.ci95) + ", need " + fixed2(need);
  }
  rep.criteria.push_back(order);
  rep.criteria.push_back({"residual_paths", "formula and defect residuals agree to 1e-8 relative in H1",
                          ok && gap <= 1e-8, "largest relative gap " + sci(gap)});
  rep.criteria.push_back({"gradient_identity", "phi_X - u-hat + drift vanishes to 1e-9", ok && grad <= 1e-9,
                          "largest defect " + sci(grad)});
}

void validity_criteria(RunReport& rep, const cli::Config& c, const ConvergenceTable& t) {
  const double need = 2.0 * c.n - c.slope_tolerance;
  bool ok = true;
  double worst = 0, mass = 0;
  for (const auto& r : t.rows) {
    if (r.status != "ok") ok = false;
    worst = std::max(worst, r.err_h1);
    mass = std::max(mass, r.mass_drift);
  }
  Criterion order{"validity_order", "fitted order of sup ||W||_H1 at least 2n - tolerance", false, ""};
  if (t.err_slope.degenerate) {
    order.pass = ok && worst < 1e-8;
    order.detail = "degenerate fit (" + t.err_slope.note + "); largest ||W||_H1 " + sci(worst);
  } else {
    order.pass = ok && t.err_slope.slope >= need;
    order.detail = "slope " + fixed2(t.err_slope.slope) + " +/- " + fixed2(t.err_slope.ci95) + ", need " + fixed2(need);
  }
  rep.criteria.push_back(order);
  rep.criteria.push_back({"nls_mass", "relative NLS mass drift below 1e-9", ok && mass < 1e-9, "drift " + sci(mass)});
}

void hyperbolic_criterion(RunReport& rep, const ConvergenceTable& t) {
  bool all = true;
  for (const auto& r : t.rows) all = all && r.status == "ok" && r.hyperbolic;
  rep.criteria.push_back({"hyperbolic", "every snapshot classifies hyperbolic", all, all ? "hyperbolic" : "not hyperbolic"});
}

void self_convergence_criteria(RunReport& rep, const SelfConvergence& s) {
  const bool rk4 = s.rk4_order >= 3.9 && s.phase_order >= 3.9;
  rep.criteria.push_back({"rk4_order", "RK4 step-halving order at least 3.9 (base and phase)", rk4,
                          "base " + fixed2(s.rk4_order) + ", phase " + fixed2(s.phase_order)});
  rep.criteria.push_back({"strang_order", "Strang step-halving order at least 1.9", s.strang_order >= 1.9,
                          "order " + fixed2(s.strang_order)});
}

void stability_criteria(RunReport& rep, const StabilityReport& s) {
  const double drift = std::max(s.mean_free.conserved_drift, s.jordan.conserved_drift);
  rep.criteria.push_back({"conserved", "conserved quantity of the linearised wavetrain drifts below 1e-11",
                          drift < 1e-11, "drift " + sci(drift)});
  const double rel = std::abs(s.jordan.w2_slope - s.jordan.w2_slope_expected) / s.jordan.w2_slope_expected;
  rep.criteria.push_back({"jordan_slope", "growth of ||W2|| matches 2|gamma||mean W1|sqrt(L) within 2%", rel < 0.02,
                          "slope " + sci(s.jordan.w2_slope) + " vs " + sci(s.jordan.w2_slope_expected)});
  rep.criteria.push_back({"imaginary_spectrum", "eigenvalues purely imaginary for xi != 0", s.max_real_part < 1e-12,
                          "max |Re| " + sci(s.max_real_part) + " over " + std::to_string(s.sampled_xi) + " xi"});
  rep.criteria.push_back({"jordan_cell", "M(0) is a nontrivial Jordan block", s.jordan_rank == 1,
                          "rank " + std::to_string(s.jordan_rank)});
  const bool bounded = s.mean_free.w2_max <= 3 * s.mean_free.w2_envelope;
  rep.criteria.push_back({"mean_free_bounded", "mean-free data: ||W2|| stays within 3x the modal envelope", bounded,
                          "max " + sci(s.mean_free.w2_max) + ", envelope " + sci(s.mean_free.w2_envelope)});
}

}  // namespace

RunReport execute(const cli::Config& c) {
  cli::validate(c);
  RunReport rep;
  rep.config = c;
  rep.input_hash = input_hash(c);
  const std::string& cmd = c.subcommand;
  std::vector<std::string> written;

  if (cmd == "stability") {
    rep.stability = run_stability_demo(c);
    stability_criteria(rep, *rep.stability);
  } else if (cmd == "wme" || cmd == "classify") {
    cli::Config c0 = c;
    c0.n = 0;
    const BaseSolution b = solve_base(c0);
    base_scalars(rep, b);
    rep.notes.erase("hierarchy_manifest");
    if (cmd == "wme") {
      energy_criterion(rep, b);
      written = export_wme(c, b);
    } else {
      rep.notes["classification"] = b.base_hyperbolic ? "hyperbolic" : "not hyperbolic";
      rep.criteria.push_back({"hyperbolic", "Theta_T + Theta_X^2 < 0 at every snapshot", b.base_hyperbolic,
                              rep.notes["classification"]});
    }
  } else if (cmd == "hierarchy" || cmd == "nls" || cmd == "converge") {
    const BaseSolution b = solve_base(c);
    base_scalars(rep, b);
    const bool nls = cmd != "hierarchy";
    rep.convergence = run_convergence(c, b, nls, nls ? c.out : std::string());
    for (double e : c.eps) {
      for (const auto& f : {w_snapshot_name(e), psi_snapshot_name(e)}) {
        if (std::filesystem::exists(std::filesystem::path(c.out) / f)) written.push_back(f);
      }
    }
    const auto& t = *rep.convergence;
    if (cmd != "nls") residual_criteria(rep, c, t);
    if (nls) validity_criteria(rep, c, t);
    if (cmd == "converge") {
      energy_criterion(rep, b);
      hyperbolic_criterion(rep, t);
      rep.self = self_convergence(c);
      self_convergence_criteria(rep, *rep.self);
    }
  } else {
    throw cli::ConfigError("configuration: unknown subcommand '" + cmd + "'");
  }
  write_outputs(rep, written);
  return rep;
}

}  // namespace whitham::harness
