#pragma once

/// @file wme.hpp
/// @brief Shallow-water form of the modulation equations in (r, u) variables,
/// its linearisation about a background solution, and the energies that
/// monitor both.
///
///   r_T = -u_X - 2 (u + k) r_X
///   u_T = -((u + k)^2)_X - (e^{2r})_X
///
/// All trajectories are classical RK4 with every stage state and stage tendency
/// retained. Linearised solves and the correction hierarchy read their
/// background at exactly those stages, so the coupled system is integrated as
/// one RK4 scheme.

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "whitham/field.hpp"

namespace whitham::wme {

/// Defocusing only.
inline constexpr Real gamma = -1;

struct FieldPair {
  RealField first;
  RealField second;
};

struct ModulationState {
  Real T = 0;
  RealField r;
  RealField u;
  Real k = 0;
};

struct LinearizedState {
  Real T = 0;
  RealField R;
  RealField U;
};

/// Identifies an RK4 stage: stage in [0, 4) of step `step`. The terminal node
/// is addressed as {steps(), 0}.
struct StageRef {
  std::size_t step = 0;
  int stage = 0;
};

inline constexpr std::array<Real, 4> rk4_nodes{0, 0.5L, 0.5L, 1};
inline constexpr std::array<Real, 4> rk4_weights{1, 2, 2, 1};

using Tendency = std::function<FieldPair(const StageRef&, Real time, const FieldPair& state)>;
/// Called with every new node; may throw to abort the integration.
using StepHook = std::function<void(std::size_t step, const FieldPair& node)>;

class Rk4Trajectory {
 public:
  Rk4Trajectory() = default;

  Real dt() const noexcept { return dt_; }
  std::size_t steps() const noexcept { return nodes_.empty() ? 0 : nodes_.size() - 1; }
  Real time(std::size_t n) const noexcept { return dt_ * static_cast<Real>(n); }
  Real final_time() const noexcept { return time(steps()); }
  Real stage_time(const StageRef& s) const noexcept { return dt_ * (static_cast<Real>(s.step) + rk4_nodes[s.stage]); }

  const FieldPair& node(std::size_t n) const { return nodes_.at(n); }
  const FieldPair& state(const StageRef& s) const;
  const FieldPair& rate(const StageRef& s) const;
  const Grid1D& grid() const { return nodes_.front().first.grid(); }

  /// Index of the node at time T; throws std::invalid_argument when T is not a node time.
  std::size_t node_index(Real T) const;

  friend Rk4Trajectory integrate_rk4(FieldPair initial, Real dt, std::size_t steps, const Tendency& f,
                                     const std::string& what, const StepHook& hook);

 private:
  Real dt_ = 0;
  std::vector<FieldPair> nodes_;
  std::vector<std::array<FieldPair, 4>> stage_states_;
  std::vector<std::array<FieldPair, 4>> stage_rates_;
  std::optional<FieldPair> terminal_rate_;
};

/// Classical four-stage Runge-Kutta over `steps` steps, keeping every stage.
/// Throws BlowUpError naming the step at which a non-finite value appears.
Rk4Trajectory integrate_rk4(FieldPair initial, Real dt, std::size_t steps, const Tendency& f,
                            const std::string& what, const StepHook& hook = {});

/// Number of steps of size dt covering T; throws unless T is a multiple of dt.
std::size_t steps_for(Real T, Real dt);

/// Base solution of the modulation equations with its carrier wavenumber.
struct WmeTrajectory {
  Real k = 0;
  Rk4Trajectory path;

  ModulationState at(std::size_t n) const;
};

struct WmeOptions {
  /// Stability factor c in dt <= c h / max(2|u+k| + 2 e^{max r}); must be <= 0.5.
  Real cfl_factor = 0.5L;
  /// Abort once ||(r,u)||_{H^2} has doubled relative to T = 0.
  bool monitor_h2_growth = true;
};

/// Largest stable step for a state: cfl h / max(2|u+k| + 2 e^{max r}).
Real cfl_step(const ModulationState& s, Real cfl_factor);

/// Returns (r_T, u_T) with dealiased products.
FieldPair wme_rhs(const ModulationState& s);

WmeTrajectory wme_integrate(const ModulationState& s0, Real T_final, Real dt, const WmeOptions& options = {});

/// (e^{2r} u^2 + (e^{2r} - 1)^2 / 2, 1)
Real wme_energy(const ModulationState& s);

/// Tendencies of the linearised system about background (r, u):
///   R_T = -U_X - 2 U r_X - 2 (u + k) R_X + H_r
///   U_T = -2 ((u + k) U)_X - 2 (e^{2r} R)_X + H_u
FieldPair linearized_rhs(const FieldPair& background, Real k, const FieldPair& perturbation,
                         const FieldPair* forcing = nullptr);

/// Forcing (H_r, H_u) at a stage; an empty function means no forcing.
using Forcing = std::function<FieldPair(const StageRef&, Real time)>;

/// Integrates the linearised system on the background's own steps. The
/// background must use the same dt and cover T_final.
Rk4Trajectory linearized_solve(const RealField& R0, const RealField& U0, const WmeTrajectory& background,
                               const Forcing& forcing, Real T_final, Real dt);

/// (e^{2r} U^2 + 2 e^{4r} R^2, 1)
Real linearized_energy(const RealField& R, const RealField& U, const ModulationState& background);

/// Exact time derivative of linearized_energy along the linearised flow:
///   -(4 u_X e^{2r}, U^2) - (4 u_X e^{4r}, R^2) + (2 e^{2r} U, H_u) + (4 e^{4r} R, H_r)
Real linearized_energy_rate(const RealField& R, const RealField& U, const ModulationState& background,
                            const FieldPair* forcing = nullptr);

struct GronwallFit {
  Real rate = 0;      ///< K
  Real forcing = 0;   ///< C
  bool finite = true;
};

/// Fits d/dT E <= K E + C F step to step. K is taken as given; C is the
/// smallest constant consistent with every step.
GronwallFit fit_gronwall(const std::vector<Real>& times, const std::vector<Real>& energy,
                         const std::vector<Real>& forcing_sq, Real rate);

/// Single-constant variant d/dT E <= C (E + F); C is the smallest admissible.
GronwallFit fit_gronwall_single(const std::vector<Real>& times, const std::vector<Real>& energy,
                                const std::vector<Real>& forcing_sq);

}  // namespace whitham::wme
