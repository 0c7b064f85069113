#include "whitham/wme.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace whitham::wme {
namespace {

FieldPair axpy(const FieldPair& y, Real a, const FieldPair& k) {
  FieldPair out = y;
  for (std::size_t j = 0; j < out.first.size(); ++j) {
    out.first[j] += a * k.first[j];
    out.second[j] += a * k.second[j];
  }
  return out;
}

bool finite(const FieldPair& p) { return p.first.all_finite() && p.second.all_finite(); }

Real h2_norm(const FieldPair& p) {
  const Real a = sobolev_norm(p.first, 2);
  const Real b = sobolev_norm(p.second, 2);
  return std::sqrt(a * a + b * b);
}

void require_pair_grid(const FieldPair& a, const FieldPair& b) {
  a.first.require_same_grid(b.first);
  a.second.require_same_grid(b.second);
}

}  // namespace

const FieldPair& Rk4Trajectory::state(const StageRef& s) const {
  if (s.stage < 0 || s.stage > 3) throw std::invalid_argument("stage index out of range");
  if (s.step == steps() && s.stage == 0) return nodes_.back();
  return stage_states_.at(s.step)[s.stage];
}

const FieldPair& Rk4Trajectory::rate(const StageRef& s) const {
  if (s.stage < 0 || s.stage > 3) throw std::invalid_argument("stage index out of range");
  if (s.step == steps() && s.stage == 0) {
    if (!terminal_rate_) throw std::logic_error("trajectory has no terminal rate");
    return *terminal_rate_;
  }
  return stage_rates_.at(s.step)[s.stage];
}

std::size_t Rk4Trajectory::node_index(Real T) const {
  const std::size_t n = steps_for(T, dt_);
  if (n > steps()) {
    std::ostringstream msg;
    msg << "time " << static_cast<double>(T) << " lies beyond the trajectory end "
        << static_cast<double>(final_time());
    throw std::invalid_argument(msg.str());
  }
  return n;
}

std::size_t steps_for(Real T, Real dt) {
  if (!(dt > 0)) throw std::invalid_argument("time step must be positive");
  if (T < 0) throw std::invalid_argument("time must be nonnegative");
  const Real q = T / dt;
  const Real n = std::round(q);
  if (std::abs(q - n) > 1e-9L * std::max<Real>(1, q)) {
    std::ostringstream msg;
    msg << "time " << static_cast<double>(T) << " is not a multiple of the step " << static_cast<double>(dt);
    throw std::invalid_argument(msg.str());
  }
  return static_cast<std::size_t>(n);
}

Rk4Trajectory integrate_rk4(FieldPair initial, Real dt, std::size_t steps, const Tendency& f,
                            const std::string& what, const StepHook& hook) {
  if (!(dt > 0)) throw std::invalid_argument(what + ": time step must be positive");
  if (!finite(initial)) throw BlowUpError(what + ": initial data not finite", 0);
  Rk4Trajectory tr;
  tr.dt_ = dt;
  tr.nodes_.reserve(steps + 1);
  tr.stage_states_.reserve(steps);
  tr.stage_rates_.reserve(steps);
  tr.nodes_.push_back(std::move(initial));
  for (std::size_t n = 0; n < steps; ++n) {
    const FieldPair& y = tr.nodes_.back();
    const Real t = dt * static_cast<Real>(n);
    std::array<FieldPair, 4> Y{y, y, y, y};
    std::array<FieldPair, 4> K{y, y, y, y};
    for (int i = 0; i < 4; ++i) {
      if (i > 0) Y[i] = axpy(y, dt * rk4_nodes[i], K[i - 1]);
      K[i] = f(StageRef{n, i}, t + dt * rk4_nodes[i], Y[i]);
    }
    FieldPair next = y;
    for (std::size_t j = 0; j < next.first.size(); ++j) {
      next.first[j] += dt / 6 * (K[0].first[j] + 2 * K[1].first[j] + 2 * K[2].first[j] + K[3].first[j]);
      next.second[j] += dt / 6 * (K[0].second[j] + 2 * K[1].second[j] + 2 * K[2].second[j] + K[3].second[j]);
    }
    if (!finite(next)) throw BlowUpError(what + ": non-finite state", n + 1);
    tr.stage_states_.push_back(std::move(Y));
    tr.stage_rates_.push_back(std::move(K));
    tr.nodes_.push_back(std::move(next));
    if (hook) hook(n + 1, tr.nodes_.back());
  }
  tr.terminal_rate_ = f(StageRef{steps, 0}, dt * static_cast<Real>(steps), tr.nodes_.back());
  return tr;
}

ModulationState WmeTrajectory::at(std::size_t n) const {
  const auto& p = path.node(n);
  return ModulationState{path.time(n), p.first, p.second, k};
}

Real cfl_step(const ModulationState& s, Real cfl_factor) {
  Real speed = 0;
  const Real er = std::exp(*std::max_element(s.r.values().begin(), s.r.values().end()));
  for (std::size_t j = 0; j < s.u.size(); ++j) speed = std::max(speed, 2 * std::abs(s.u[j] + s.k));
  speed += 2 * er;
  return cfl_factor * s.r.grid().spacing() / speed;
}

FieldPair wme_rhs(const ModulationState& s) {
  s.r.require_same_grid(s.u);
  const RealField carrier = s.u + s.k;
  const RealField rx = spectral_derivative(s.r);
  RealField rt = -spectral_derivative(s.u) - 2 * dealiased_product(carrier, rx);
  RealField ut = -spectral_derivative(dealiased_product(carrier, carrier)) - spectral_derivative(dealiased_exp(s.r, 2));
  return {std::move(rt), std::move(ut)};
}

WmeTrajectory wme_integrate(const ModulationState& s0, Real T_final, Real dt, const WmeOptions& options) {
  if (!(options.cfl_factor > 0) || options.cfl_factor > 0.5L) {
    throw std::invalid_argument("CFL factor must lie in (0, 0.5]");
  }
  const Real cap = cfl_step(s0, options.cfl_factor);
  if (dt > cap * (1 + 1e-12L)) {
    std::ostringstream msg;
    msg << "time step " << static_cast<double>(dt) << " violates the CFL bound " << static_cast<double>(cap);
    throw std::invalid_argument(msg.str());
  }
  const std::size_t steps = steps_for(T_final, dt);
  const Real k = s0.k;
  FieldPair init{s0.r, s0.u};
  const Real h2_0 = h2_norm(init);

  StepHook hook;
  if (options.monitor_h2_growth && h2_0 > 0) {
    hook = [h2_0, dt](std::size_t n, const FieldPair& y) {
      const Real h2 = h2_norm(y);
      if (h2 > 2 * h2_0) {
        std::ostringstream msg;
        msg << "H2 norm doubled (" << static_cast<double>(h2_0) << " -> " << static_cast<double>(h2) << ") at T="
            << static_cast<double>(dt * static_cast<Real>(n)) << ", close to gradient blow-up";
        throw BlowUpError(msg.str(), n);
      }
    };
  }
  auto f = [k](const StageRef&, Real t, const FieldPair& y) {
    return wme_rhs(ModulationState{t, y.first, y.second, k});
  };
  WmeTrajectory out;
  out.k = k;
  out.path = integrate_rk4(std::move(init), dt, steps, f, "modulation equations", hook);
  return out;
}

Real wme_energy(const ModulationState& s) {
  Real acc = 0;
  for (std::size_t j = 0; j < s.r.size(); ++j) {
    const Real e2 = std::exp(2 * s.r[j]);
    acc += e2 * s.u[j] * s.u[j] + (e2 - 1) * (e2 - 1) / 2;
  }
  return acc * s.r.grid().spacing();
}

FieldPair linearized_rhs(const FieldPair& background, Real k, const FieldPair& perturbation,
                         const FieldPair* forcing) {
  require_pair_grid(background, perturbation);
  const RealField& r = background.first;
  const RealField& R = perturbation.first;
  const RealField& U = perturbation.second;
  const RealField carrier = background.second + k;
  RealField Rt = -spectral_derivative(U) - 2 * dealiased_product(U, spectral_derivative(r)) -
                 2 * dealiased_product(carrier, spectral_derivative(R));
  RealField Ut = -2 * spectral_derivative(dealiased_product(carrier, U)) -
                 2 * spectral_derivative(dealiased_product(dealiased_exp(r, 2), R));
  if (forcing) {
    Rt += forcing->first;
    Ut += forcing->second;
  }
  return {std::move(Rt), std::move(Ut)};
}

Rk4Trajectory linearized_solve(const RealField& R0, const RealField& U0, const WmeTrajectory& background,
                               const Forcing& forcing, Real T_final, Real dt) {
  const Real bdt = background.path.dt();
  if (std::abs(dt - bdt) > 1e-12L * bdt) {
    throw std::invalid_argument("linearised step does not match the background step");
  }
  const std::size_t steps = steps_for(T_final, dt);
  if (steps > background.path.steps()) {
    throw std::invalid_argument("background trajectory does not cover the requested interval");
  }
  if (!(R0.grid() == background.path.grid()) || !(U0.grid() == background.path.grid())) {
    throw std::invalid_argument("initial data and background live on different grids");
  }
  const Real k = background.k;
  auto f = [&](const StageRef& s, Real t, const FieldPair& y) {
    const FieldPair& bg = background.path.state(s);
    if (forcing) {
      const FieldPair h = forcing(s, t);
      return linearized_rhs(bg, k, y, &h);
    }
    return linearized_rhs(bg, k, y);
  };
  return integrate_rk4(FieldPair{R0, U0}, bdt, steps, f, "linearised system");
}

Real linearized_energy(const RealField& R, const RealField& U, const ModulationState& background) {
  R.require_same_grid(U);
  R.require_same_grid(background.r);
  Real acc = 0;
  for (std::size_t j = 0; j < R.size(); ++j) {
    const Real e2 = std::exp(2 * background.r[j]);
    acc += e2 * U[j] * U[j] + 2 * e2 * e2 * R[j] * R[j];
  }
  return acc * R.grid().spacing();
}

Real linearized_energy_rate(const RealField& R, const RealField& U, const ModulationState& background,
                            const FieldPair* forcing) {
  const RealField ux = spectral_derivative(background.u);
  Real acc = 0;
  for (std::size_t j = 0; j < R.size(); ++j) {
    const Real e2 = std::exp(2 * background.r[j]);
    acc -= 4 * ux[j] * e2 * U[j] * U[j] + 4 * ux[j] * e2 * e2 * R[j] * R[j];
    if (forcing) acc += 2 * e2 * U[j] * forcing->second[j] + 4 * e2 * e2 * R[j] * forcing->first[j];
  }
  return acc * R.grid().spacing();
}

namespace {

void check_series(const std::vector<Real>& t, const std::vector<Real>& e, const std::vector<Real>& f) {
  if (t.size() != e.size() || t.size() != f.size() || t.size() < 2) {
    throw std::invalid_argument("Gronwall fit needs matching series of at least two samples");
  }
}

}  // namespace

GronwallFit fit_gronwall(const std::vector<Real>& times, const std::vector<Real>& energy,
                         const std::vector<Real>& forcing_sq, Real rate) {
  check_series(times, energy, forcing_sq);
  GronwallFit fit{rate, 0, true};
  for (std::size_t j = 0; j + 1 < times.size(); ++j) {
    const Real dT = times[j + 1] - times[j];
    const Real excess = (energy[j + 1] - energy[j]) / dT - rate * (energy[j + 1] + energy[j]) / 2;
    if (excess <= 0) continue;
    const Real F = (forcing_sq[j + 1] + forcing_sq[j]) / 2;
    if (F <= 0) {
      fit.finite = false;
      fit.forcing = std::numeric_limits<Real>::infinity();
      return fit;
    }
    fit.forcing = std::max(fit.forcing, excess / F);
  }
  return fit;
}

GronwallFit fit_gronwall_single(const std::vector<Real>& times, const std::vector<Real>& energy,
                                const std::vector<Real>& forcing_sq) {
  check_series(times, energy, forcing_sq);
  GronwallFit fit{0, 0, true};
  for (std::size_t j = 0; j + 1 < times.size(); ++j) {
    const Real growth = (energy[j + 1] - energy[j]) / (times[j + 1] - times[j]);
    if (growth <= 0) continue;
    const Real base = (energy[j + 1] + energy[j] + forcing_sq[j + 1] + forcing_sq[j]) / 2;
    if (base <= 0) {
      fit.finite = false;
      fit.rate = std::numeric_limits<Real>::infinity();
      break;
    }
    fit.rate = std::max(fit.rate, growth / base);
  }
  fit.forcing = fit.rate;
  return fit;
}

}  // namespace whitham::wme
