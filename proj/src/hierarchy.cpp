#include "whitham/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace whitham::hierarchy {
namespace {

using jets::JetField;

/// Jets of order `order` built from the base and the first `filled` levels.
std::pair<JetField, JetField> stage_jets(const wme::WmeTrajectory& base, const std::vector<wme::Rk4Trajectory>& levels,
                                         unsigned order, unsigned filled, const StageRef& s, bool rates) {
  const Grid1D& g = base.path.grid();
  auto rj = JetField::zero(g, order);
  auto uj = JetField::zero(g, order);
  const FieldPair& b = rates ? base.path.rate(s) : base.path.state(s);
  rj[0] = b.first;
  uj[0] = b.second;
  for (unsigned l = 1; l <= filled; ++l) {
    const FieldPair& p = rates ? levels[l - 1].rate(s) : levels[l - 1].state(s);
    rj[l] = p.first;
    uj[l] = p.second;
  }
  return {std::move(rj), std::move(uj)};
}

Real h1(const RealField& f) { return sobolev_norm(f, 1); }

}  // namespace

std::pair<JetField, JetField> Hierarchy::state_jets(const StageRef& s) const {
  return stage_jets(base, levels, n, n, s, false);
}

std::pair<JetField, JetField> Hierarchy::rate_jets(const StageRef& s) const {
  return stage_jets(base, levels, n, n, s, true);
}

FieldPair level_forcing(const wme::WmeTrajectory& base, const std::vector<wme::Rk4Trajectory>& lower, unsigned l,
                        const StageRef& s) {
  if (l == 0 || lower.size() + 1 < l) throw std::invalid_argument("level forcing needs all lower levels");
  auto [rj, uj] = stage_jets(base, lower, l, l - 1, s, false);
  auto [rt, ut] = stage_jets(base, lower, l, l - 1, s, true);
  auto [dr, du] = jets::jet_defect_swe(rj, uj, base.k, rt, ut);
  return {-dr[l], -du[l]};
}

Hierarchy build_hierarchy(const wme::WmeTrajectory& base, unsigned n, Real dt) {
  if (n > max_order) {
    throw std::invalid_argument("hierarchy order " + std::to_string(n) + " exceeds the supported maximum " +
                                std::to_string(max_order));
  }
  const Real T = base.path.final_time();
  Hierarchy h;
  h.n = n;
  h.base = base;
  const RealField zero(base.path.grid());
  for (unsigned l = 1; l <= n; ++l) {
    const auto& lower = h.levels;
    // Each level takes three more derivatives of the one below; the filter keeps
    // the amplified roundoff at the top modes from compounding across levels.
    wme::Forcing forcing = [&base, &lower, l](const StageRef& s, Real) {
      FieldPair f = level_forcing(base, lower, l, s);
      return FieldPair{exponential_filter(f.first), exponential_filter(f.second)};
    };
    h.levels.push_back(wme::linearized_solve(zero, zero, base, forcing, T, dt));
  }
  return h;
}

FieldPair assembled_state(const Hierarchy& h, Real eps, const StageRef& s) {
  auto [rj, uj] = h.state_jets(s);
  return {rj.evaluate(eps), uj.evaluate(eps)};
}

FieldPair assembled_rate(const Hierarchy& h, Real eps, const StageRef& s) {
  auto [rj, uj] = h.rate_jets(s);
  return {rj.evaluate(eps), uj.evaluate(eps)};
}

wme::ModulationState assemble(const Hierarchy& h, Real eps, Real T) {
  const std::size_t n = h.base.path.node_index(T);
  auto p = assembled_state(h, eps, StageRef{n, 0});
  return wme::ModulationState{h.base.path.time(n), std::move(p.first), std::move(p.second), h.k()};
}

RealField phase_rhs(const FieldPair& ru, Real k, Real eps) {
  const RealField& r = ru.first;
  const RealField carrier = ru.second + k;
  const RealField rx = spectral_derivative(r);
  const Real e2 = eps * eps;
  RealField P = -dealiased_product(carrier, carrier) - dealiased_exp(r, 2);
  P += e2 * (spectral_derivative(r, 2) + dealiased_product(rx, rx));
  P += 1 + k * k;
  return P;
}

RealField hat_residual_u(const FieldPair& ru, const FieldPair& rate, Real k, Real eps) {
  const RealField& r = ru.first;
  const RealField carrier = ru.second + k;
  const RealField rx = spectral_derivative(r);
  const Real e2 = eps * eps;
  RealField res = rate.second + spectral_derivative(dealiased_product(carrier, carrier)) +
                  spectral_derivative(dealiased_exp(r, 2));
  res -= e2 * (spectral_derivative(spectral_derivative(r, 2)) + spectral_derivative(dealiased_product(rx, rx)));
  return res;
}

RealField hat_residual_r(const FieldPair& ru, const FieldPair& rate, Real k) {
  const RealField carrier = ru.second + k;
  return rate.first + spectral_derivative(ru.second) + 2 * dealiased_product(carrier, spectral_derivative(ru.first));
}

PhaseTrajectory lift_phase(const Hierarchy& h, Real eps, const RealField& phi0, Real dt) {
  if (std::abs(dt - h.dt()) > 1e-12L * h.dt()) {
    throw std::invalid_argument("phase quadrature step does not match the hierarchy step");
  }
  if (!(phi0.grid() == h.grid())) throw std::invalid_argument("initial phase lives on a different grid");
  const Real k = h.k();
  const std::size_t steps = h.steps();

  auto node_state = [&](std::size_t n, const RealField& phi, const RealField& drift) {
    const StageRef s{n, 0};
    const FieldPair ru = assembled_state(h, eps, s);
    return PhaseState{h.base.path.time(n), phi, map_values(ru.first, [](Real v) { return std::exp(v); }),
                      phase_rhs(ru, k, eps), drift};
  };

  PhaseTrajectory out;
  out.eps = eps;
  out.nodes.reserve(steps + 1);
  RealField phi = phi0;
  RealField drift(h.grid());
  out.nodes.push_back(node_state(0, phi, drift));
  for (std::size_t n = 0; n < steps; ++n) {
    RealField dphi(h.grid());
    RealField ddrift(h.grid());
    for (int i = 0; i < 4; ++i) {
      const StageRef s{n, i};
      const FieldPair ru = assembled_state(h, eps, s);
      const FieldPair rate = assembled_rate(h, eps, s);
      dphi += wme::rk4_weights[i] * phase_rhs(ru, k, eps);
      ddrift += wme::rk4_weights[i] * hat_residual_u(ru, rate, k, eps);
    }
    phi += (dt / 6) * dphi;
    drift += (dt / 6) * ddrift;
    if (!phi.all_finite()) throw BlowUpError("phase quadrature: non-finite phase", n + 1);
    out.nodes.push_back(node_state(n + 1, phi, drift));
  }
  return out;
}

std::vector<ResidualSample> residuals(const Hierarchy& h, const PhaseTrajectory& phase, Real eps,
                                      const std::vector<std::size_t>& nodes, const ResidualOptions& options) {
  if (phase.nodes.size() != h.steps() + 1) throw std::invalid_argument("phase trajectory does not match the hierarchy");
  if (std::abs(phase.eps - eps) > 0) throw std::invalid_argument("phase trajectory was lifted for a different eps");
  const Real k = h.k();
  const Real e2 = eps * eps;
  std::vector<ResidualSample> out;
  out.reserve(nodes.size());
  for (std::size_t n : nodes) {
    if (n > h.steps()) throw std::invalid_argument("residual sample beyond the trajectory end");
    const StageRef s{n, 0};
    const FieldPair ru = assembled_state(h, eps, s);
    const FieldPair rate = assembled_rate(h, eps, s);
    const PhaseState& ps = phase.nodes[n];
    const RealField& r = ru.first;
    const RealField& u = ru.second;
    const RealField& I = ps.drift;

    // Closed forms.
    RealField res_phi_formula = -pointwise_product(2 * u + 2 * k - I, I);
    RealField res_r_formula = hat_residual_r(ru, rate, k) - spectral_derivative(I) -
                              2 * pointwise_product(spectral_derivative(r), I);
    RealField res_A_formula = pointwise_product(ps.A_hat, res_r_formula);

    // Direct substitution of (A-hat, phi-hat).
    const RealField& A = ps.A_hat;
    const RealField phix = spectral_derivative(ps.phi_hat);
    const RealField phixx = spectral_derivative(ps.phi_hat, 2);
    const RealField Ax = spectral_derivative(A);
    const RealField Axx = spectral_derivative(A, 2);
    RealField res_phi(h.grid());
    RealField res_A(h.grid());
    for (std::size_t j = 0; j < res_phi.size(); ++j) {
      const Real c = k + phix[j];
      res_phi[j] = ps.phi_T[j] + c * c + A[j] * A[j] - 1 - k * k - e2 * Axx[j] / A[j];
      res_A[j] = A[j] * rate.first[j] + 2 * c * Ax[j] + A[j] * phixx[j];
    }

    ResidualSample rs{ps.T, res_phi, res_A, res_phi_formula, res_r_formula, res_A_formula};
    rs.norm_h1 = h1(rs.res_A) + h1(rs.res_phi);
    rs.norm_h2 = sobolev_norm(rs.res_A, 2) + sobolev_norm(rs.res_phi, 2);
    rs.formula_norm_h1 = h1(rs.res_A_formula) + h1(rs.res_phi_formula);
    rs.path_gap_h1 = h1(rs.res_A - rs.res_A_formula) + h1(rs.res_phi - rs.res_phi_formula);
    rs.gradient_identity = linf_norm(phix - u + I);
    out.push_back(std::move(rs));
  }

  if (options.consistency_tolerance > 0 && !out.empty()) {
    Real scale = 0;
    Real gap = 0;
    for (const auto& rs : out) {
      scale = std::max(scale, rs.norm_h1);
      gap = std::max(gap, rs.path_gap_h1);
    }
    if (gap > options.consistency_tolerance * scale + options.roundoff_floor) {
      std::ostringstream msg;
      msg << "residual paths disagree: gap " << static_cast<double>(gap) << " against residual scale "
          << static_cast<double>(scale) << " at eps=" << static_cast<double>(eps);
      throw ConsistencyError(msg.str());
    }
  }
  return out;
}

Real relative_path_gap(const std::vector<ResidualSample>& samples) {
  Real scale = 0;
  Real gap = 0;
  for (const auto& rs : samples) {
    scale = std::max(scale, rs.norm_h1);
    gap = std::max(gap, rs.path_gap_h1);
  }
  return scale > 0 ? gap / scale : gap;
}

}  // namespace whitham::hierarchy
