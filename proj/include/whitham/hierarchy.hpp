#pragma once

/// @file hierarchy.hpp
/// @brief eps^2 correction levels about a base modulation solution, the
/// phase obtained by integrating the amplitude-phase equation in time, and
/// the residuals of the resulting approximate solution.
///
/// Levels are eps-independent. They are solved once; assembly, phase lift and
/// residuals are then evaluated per eps on the same RK4 stages.

#include <stdexcept>
#include <vector>

#include "whitham/field.hpp"
#include "whitham/jets.hpp"
#include "whitham/wme.hpp"

namespace whitham::hierarchy {

inline constexpr unsigned max_order = 3;

using wme::FieldPair;
using wme::StageRef;

/// Raised when the two residual computations disagree.
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Hierarchy {
  unsigned n = 0;
  wme::WmeTrajectory base;
  std::vector<wme::Rk4Trajectory> levels;  ///< levels[l - 1] holds (r_l, u_l)

  Real k() const noexcept { return base.k; }
  Real dt() const noexcept { return base.path.dt(); }
  std::size_t steps() const noexcept { return base.path.steps(); }
  const Grid1D& grid() const { return base.path.grid(); }

  /// (r-hat, u-hat) jets of order n at a stage.
  std::pair<jets::JetField, jets::JetField> state_jets(const StageRef& s) const;
  /// Time-derivative jets at a stage.
  std::pair<jets::JetField, jets::JetField> rate_jets(const StageRef& s) const;
};

/// Forcing of level l at a stage from the base and levels 1..l-1 (the first
/// l-1 entries of `lower`): minus coefficient l of the defect jet with the
/// level-l slots empty.
FieldPair level_forcing(const wme::WmeTrajectory& base, const std::vector<wme::Rk4Trajectory>& lower, unsigned l,
                        const StageRef& s);

/// Levels 1..n driven by level_forcing passed through exponential_filter.
/// Throws std::invalid_argument for n > max_order or a step that differs from the base.
Hierarchy build_hierarchy(const wme::WmeTrajectory& base, unsigned n, Real dt);

/// r-hat = r + eps^2 r_1 + ... at node time T.
wme::ModulationState assemble(const Hierarchy& h, Real eps, Real T);

FieldPair assembled_state(const Hierarchy& h, Real eps, const StageRef& s);
FieldPair assembled_rate(const Hierarchy& h, Real eps, const StageRef& s);

/// -(k + u)^2 - e^{2r} + 1 + k^2 + eps^2 r_XX + eps^2 (r_X)^2
RealField phase_rhs(const FieldPair& ru, Real k, Real eps);

/// u_T + ((k + u)^2)_X + (e^{2r})_X - eps^2 r_XXX - eps^2 ((r_X)^2)_X, with u_T supplied.
RealField hat_residual_u(const FieldPair& ru, const FieldPair& rate, Real k, Real eps);

/// r_T + u_X + 2 (k + u) r_X, with r_T supplied.
RealField hat_residual_r(const FieldPair& ru, const FieldPair& rate, Real k);

struct PhaseState {
  Real T = 0;
  RealField phi_hat;
  RealField A_hat;     ///< e^{r-hat}
  RealField phi_T;     ///< right-hand side of the phase equation at T
  RealField drift;     ///< integral over [0, T] of hat_residual_u
};

struct PhaseTrajectory {
  Real eps = 0;
  std::vector<PhaseState> nodes;  ///< one per base step node
};

/// RK4 quadrature of the phase equation on the hierarchy's stages, with the
/// drift integral advanced by the same weights.
PhaseTrajectory lift_phase(const Hierarchy& h, Real eps, const RealField& phi0, Real dt);

struct ResidualSample {
  Real T = 0;
  // direct substitution into the amplitude-phase equations
  RealField res_phi;
  RealField res_A;
  // closed-form expressions in terms of the drift integral
  RealField res_phi_formula;
  RealField res_r_formula;
  RealField res_A_formula;
  Real norm_h1 = 0;          ///< ||Res_A||_{H^1} + ||Res_phi||_{H^1}, direct path
  Real norm_h2 = 0;
  Real formula_norm_h1 = 0;
  Real path_gap_h1 = 0;      ///< ||difference of the paths||_{H^1}, both components summed
  Real gradient_identity = 0;  ///< ||phi_X - u-hat + drift||_{L^inf}
};

struct ResidualOptions {
  /// Relative agreement demanded of the two paths, against the largest
  /// residual norm over the samples. Nonpositive disables the check.
  Real consistency_tolerance = 1e-8L;
  /// Absolute floor under which disagreement is attributed to roundoff.
  Real roundoff_floor = 1e-12L;
};

/// Residuals at the given node indices.
std::vector<ResidualSample> residuals(const Hierarchy& h, const PhaseTrajectory& phase, Real eps,
                                      const std::vector<std::size_t>& nodes, const ResidualOptions& options = {});

/// Largest relative path gap over samples: max gap / max direct-path norm.
Real relative_path_gap(const std::vector<ResidualSample>& samples);

}  // namespace whitham::hierarchy
