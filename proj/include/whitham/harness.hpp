#pragma once

/// @file harness.hpp
/// @brief Experiments built from the solvers: eps ladders, residual orders,
/// wavetrain stability, hyperbolicity, slope fits and run reports.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "whitham/config.hpp"
#include "whitham/field.hpp"
#include "whitham/hierarchy.hpp"
#include "whitham/nls.hpp"
#include "whitham/wme.hpp"

namespace whitham::harness {

// ---- fits ------------------------------------------------------------------

struct SlopeFit {
  double slope = 0;
  double intercept = 0;
  double max_residual = 0;  ///< largest |log y - fit| over the points
  double ci95 = 0;          ///< half-width of the 95% interval on the slope
  bool degenerate = false;  ///< too few usable points; slope not meaningful
  std::string note;
};

/// Least squares on (log x, log y). Throws std::invalid_argument for fewer
/// than three points or nonpositive input.
SlopeFit fit_slope(const std::vector<double>& xs, const std::vector<double>& ys);

/// fit_slope unless some y is below `floor` or fewer than three points remain,
/// in which case the result is flagged degenerate.
SlopeFit fit_slope_or_degenerate(const std::vector<double>& xs, const std::vector<double>& ys, double floor);

// ---- initial data and planning ---------------------------------------------

RealField make_profile(const cli::ProfileSpec& spec, const Grid1D& grid);

struct InitialData {
  Grid1D grid;
  RealField r0;
  RealField u0;
  RealField phi0;
  double u0_mean_removed = 0;
  double edge_r = 0;  ///< max |r0| over the outer 2% of the domain
  double edge_u = 0;
};

/// Builds (r0, u0, phi0); a nonzero mean of u0 is subtracted with a warning.
InitialData prepare_initial_data(const cli::Config& c);

struct SlowPlan {
  Real dt = 0;
  std::size_t steps = 0;
  std::size_t stride = 0;  ///< steps between snapshots
  std::vector<std::size_t> snapshot_nodes;
};

/// dt = t0 / (snapshots m) with the smallest m meeting slow_dt_max and the CFL cap.
SlowPlan plan_slow_steps(const cli::Config& c, const InitialData& d);

// ---- hyperbolicity ---------------------------------------------------------

struct Classification {
  std::vector<int> sign;  ///< sign of Theta_T + Theta_X^2 per point
  std::string summary;    ///< hyperbolic, elliptic or mixed
};

Classification classify_hyperbolicity(const RealField& theta_T, const RealField& theta_X);

// ---- eps ladder --------------------------------------------------------------

struct SnapshotRow {
  double T = 0;
  double w_l2 = 0;
  double w_h1 = 0;
  double w1_l2 = 0;
  double w2_l2 = 0;
  double w_linf = 0;
  double d_h1 = 0;         ///< ||(psi - psi-hat) e^{-i Theta/eps}||_{H^1}
  double validity = 0;     ///< weighted validity energy
  double forcing_sq = 0;   ///< ||Res_A||_{H^1}^2 + eps^{-2} ||Res_phi||_{H^1}^2
  double res_h1 = 0;
  double res_h2 = 0;
  double path_gap = 0;
  double band_fraction = 0;
  double v_defect = 0;     ///< L2 defect of the V-equation
  double mass_drift = 0;
  std::string classification;

  friend bool operator==(const SnapshotRow&, const SnapshotRow&) = default;
};

struct EpsRun {
  double eps = 0;
  unsigned n = 0;
  double t0 = 0;
  std::size_t n_fast = 0;
  double nls_dt = 0;
  std::string status = "ok";
  double err_h1 = 0;
  double err_linf = 0;
  double err_unscaled_h1 = 0;
  double res_h1 = 0;
  double res_h2 = 0;
  double path_gap = 0;           ///< relative, against the largest residual norm
  double gradient_identity = 0;  ///< max ||phi_X - u-hat + drift||_inf
  double mass_drift = 0;
  double v_defect = 0;           ///< max V-equation defect over max term size
  double gronwall_c = 0;         ///< C in dE/dT <= C (E + F); -1 if none fits
  bool hyperbolic = true;
  double runtime = 0;  ///< seconds; kept out of deterministic outputs
  std::vector<SnapshotRow> series;

  friend bool operator==(const EpsRun&, const EpsRun&) = default;
};

struct ConvergenceTable {
  std::vector<EpsRun> rows;
  SlopeFit err_slope;
  SlopeFit linf_slope;
  SlopeFit res_slope;
};

struct BaseSolution {
  InitialData data;
  SlowPlan plan;
  hierarchy::Hierarchy hier;
  double energy_drift = 0;  ///< relative |E(T) - E(0)| / E(0), max over nodes
  double mean_u_drift = 0;
  double level_bound = 0;   ///< max over T and l of ||r_l||_{H^1} + ||u_l||_{H^1}
  double tail_ratio = 0;    ///< worst spectral tail of r_XXX over base and levels
  std::vector<double> level_sup_h1;  ///< per level, sup over T of ||r_l||_{H^1} + ||u_l||_{H^1}
  bool base_hyperbolic = true;
  double runtime = 0;
};

/// Base modulation solve plus the hierarchy to order c.n.
BaseSolution solve_base(const cli::Config& c);

/// One eps: phase lift, residuals and, when with_nls, the NLS comparison.
/// A non-empty snapshot_dir receives W and psi at the final time as CSV.
EpsRun run_eps(const cli::Config& c, const BaseSolution& b, double eps, bool with_nls,
               const std::string& snapshot_dir = "");

/// All eps of the ladder (in parallel) with fitted slopes.
ConvergenceTable run_convergence(const cli::Config& c, const BaseSolution& b, bool with_nls = true,
                                 const std::string& snapshot_dir = "");
ConvergenceTable run_convergence(const cli::Config& c);

// ---- self-convergence ------------------------------------------------------

struct SelfConvergence {
  std::vector<double> rk4_diffs;    ///< ||y_h - y_{h/2}||_{H^1} for the base, h halved twice
  std::vector<double> phase_diffs;  ///< same for the lifted phase
  std::vector<double> strang_diffs; ///< ||psi_h - psi_{h/2}||_{L^2} for the NLS
  double rk4_order = 0;
  double phase_order = 0;
  double strang_order = 0;

  friend bool operator==(const SelfConvergence&, const SelfConvergence&) = default;
};

/// Step-halving study on a 256-point slow grid over a short horizon.
SelfConvergence self_convergence(const cli::Config& c);

// ---- wavetrain stability ---------------------------------------------------

struct StabilityCase {
  std::string name;
  double mean_w1 = 0;
  double conserved_drift = 0;   ///< max relative drift
  double w2_slope = 0;          ///< fitted on the second half of the horizon
  double w2_slope_expected = 0; ///< 2 |gamma| |mean W1(0)| sqrt(L)
  double w2_max = 0;
  double w2_envelope = 0;       ///< modal bound from the initial data (finite when mean-free)
  double wx_ratio = 0;          ///< max ||W_x(t)|| / ||W_x(0)||
  std::vector<double> t;
  std::vector<double> conserved;
  std::vector<double> w2_l2;
  std::vector<double> wx_l2;

  friend bool operator==(const StabilityCase&, const StabilityCase&) = default;
};

struct StabilityReport {
  StabilityCase mean_free;
  StabilityCase jordan;
  double max_real_part = 0;     ///< over sampled xi != 0
  std::size_t sampled_xi = 0;
  int jordan_rank = 0;          ///< rank of M(0) - 0 I

  friend bool operator==(const StabilityReport&, const StabilityReport&) = default;
};

StabilityReport run_stability_demo(const cli::Config& c);

// ---- reports ---------------------------------------------------------------

struct Criterion {
  std::string id;
  std::string description;
  bool pass = false;
  std::string detail;

  friend bool operator==(const Criterion&, const Criterion&) = default;
};

struct RunReport {
  cli::Config config;
  std::string input_hash;
  std::map<std::string, double> scalars;
  std::map<std::string, std::string> notes;
  std::optional<ConvergenceTable> convergence;
  std::optional<StabilityReport> stability;
  std::optional<SelfConvergence> self;
  std::vector<Criterion> criteria;

  bool all_pass() const;
};

std::string report_to_json(const RunReport& r);
RunReport report_from_json(const std::string& text);

/// Hash of the serialized config plus any custom profile files.
std::string input_hash(const cli::Config& c);

/// Writes report.json, config.ini, table.csv, timings.csv, .dat series and
/// manifest.json under c.out. `written` names files already placed there that
/// the manifest should also cover.
void write_outputs(const RunReport& r, const std::vector<std::string>& written = {});

/// File names used for per-eps outputs.
std::string w_snapshot_name(double eps);
std::string psi_snapshot_name(double eps);

/// Runs the configured subcommand and writes its outputs.
RunReport execute(const cli::Config& c);

bool operator==(const SlopeFit& a, const SlopeFit& b);
bool operator==(const ConvergenceTable& a, const ConvergenceTable& b);
bool operator==(const RunReport& a, const RunReport& b);

}  // namespace whitham::harness
