#include "whitham/nls.hpp"

#include <cmath>
#include <sstream>

#include "fft.hpp"

namespace whitham::nls {
namespace {

constexpr Complex I1{0, 1};

RealField on_grid(const Grid1D& g, const RealField& f) { return RealField(g, f.data()); }

/// Slow field interpolated to the points of `fast`, returned on the refined slow grid.
RealField refine(const RealField& slow, const Grid1D& fast) { return resample(slow, fast.points()); }

Real sq(Real v) { return v * v; }

}  // namespace

Real nearest_admissible_k(Real k, Real L_fast) {
  const Real unit = 2 * pi / L_fast;
  return unit * std::round(k / unit);
}

void require_commensurate(Real k, Real L_fast) {
  const Real unit = 2 * pi / L_fast;
  const Real q = k / unit;
  if (std::abs(q - std::round(q)) > 1e-9L) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "carrier wavenumber " << static_cast<double>(k) << " is not a multiple of 2 pi / L_fast = "
        << static_cast<double>(unit) << "; nearest admissible k = " << static_cast<double>(nearest_admissible_k(k, L_fast));
    throw std::invalid_argument(msg.str());
  }
}

Grid1D fast_grid(const Grid1D& slow, Real eps, std::size_t points) {
  if (!(eps > 0)) throw std::invalid_argument("eps must be positive");
  return Grid1D(slow.length() / eps, points);
}

NlsState nls_init(const RealField& r0, const RealField& phi0, const WaveParams& params, Real eps,
                  std::size_t fast_points) {
  r0.require_same_grid(phi0);
  const Grid1D fast = fast_grid(r0.grid(), eps, fast_points);
  require_commensurate(params.k, fast.length());
  const RealField r = refine(r0, fast);
  const RealField phi = refine(phi0, fast);
  ComplexField psi(fast);
  for (std::size_t j = 0; j < psi.size(); ++j) {
    psi[j] = std::exp(r[j]) * std::exp(I1 * (params.k * fast.coordinate(j) + phi[j] / eps));
  }
  return NlsState{0, std::move(psi)};
}

namespace {

void rotate(std::vector<Complex>& v, Real dt) {
  for (auto& z : v) z *= std::exp(I1 * (gamma * std::norm(z) * dt));
}

std::vector<Complex> linear_multiplier(const Grid1D& g, Real dt) {
  std::vector<Complex> mult(g.points());
  for (std::size_t m = 0; m < mult.size(); ++m) mult[m] = std::exp(-I1 * (sq(g.wavenumber(m)) * dt));
  return mult;
}

void strang(std::vector<Complex>& v, const std::vector<Complex>& mult, Real dt) {
  rotate(v, dt / 2);
  auto spec = fft::forward(v);
  for (std::size_t m = 0; m < spec.size(); ++m) spec[m] *= mult[m];
  v = fft::inverse(spec);
  rotate(v, dt / 2);
}

}  // namespace

NlsState nls_step(const NlsState& s, Real dt) {
  NlsState out = s;
  nls_advance(out, dt, 1);
  return out;
}

void nls_advance(NlsState& s, Real dt, std::size_t steps) {
  const Grid1D g = s.psi.grid();
  const auto mult = linear_multiplier(g, dt);
  std::vector<Complex> v(s.psi.data());
  for (std::size_t n = 0; n < steps; ++n) {
    strang(v, mult, dt);
    for (const auto& z : v) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw BlowUpError("NLS: non-finite field", n + 1);
    }
  }
  s.psi = ComplexField(g, std::move(v));
  s.t += dt * static_cast<Real>(steps);
}

Real mass(const ComplexField& psi) {
  const Real n = l2_norm(psi);
  return n * n;
}

ComplexField nls_time_derivative(const ComplexField& psi) {
  ComplexField out = spectral_derivative(psi, 2);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = I1 * (out[j] + gamma * std::norm(psi[j]) * psi[j]);
  return out;
}

ComplexField approximate_wave(const RealField& A_hat, const RealField& phi_hat, const WaveParams& params, Real eps,
                              Real T, const Grid1D& fast) {
  A_hat.require_same_grid(phi_hat);
  const RealField A = refine(A_hat, fast);
  const RealField phi = refine(phi_hat, fast);
  const Real t = T / eps;
  ComplexField out(fast);
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = A[j] * std::exp(I1 * (params.omega * t + params.k * fast.coordinate(j) + phi[j] / eps));
  }
  return out;
}

DeviationState extract_W(const NlsState& s, const RealField& A_hat, const RealField& phi_hat,
                         const WaveParams& params, Real eps, Real T, const ExtractOptions& options) {
  const Grid1D& fast = s.psi.grid();
  const Grid1D& slow = A_hat.grid();
  if (std::abs(fast.length() * eps - slow.length()) > 1e-9L * slow.length()) {
    throw std::invalid_argument("fast grid length does not equal L_slow / eps");
  }
  if (std::abs(s.t * eps - T) > 1e-9L * std::max<Real>(1, T)) {
    throw std::invalid_argument("NLS time does not match T / eps");
  }
  const ComplexField hat = approximate_wave(A_hat, phi_hat, params, eps, T, fast);
  const Grid1D refined = slow.refined(fast.points());
  ComplexField W(refined);
  ComplexField D(refined);
  for (std::size_t j = 0; j < W.size(); ++j) {
    W[j] = s.psi[j] / hat[j] - Real(1);
    D[j] = (s.psi[j] - hat[j]) * std::abs(hat[j]) / hat[j];
  }
  DeviationState d{T, RealField(slow), RealField(slow), RealField(slow), RealField(slow), 0};
  d.band_fraction = energy_fraction_above(W, slow.points() / 2);
  const Real above = std::sqrt(d.band_fraction) * l2_norm(W);
  if (d.band_fraction > options.max_band_fraction && above > options.band_floor) {
    std::ostringstream msg;
    msg << "deviation W aliased: " << static_cast<double>(100 * d.band_fraction)
        << "% of its energy lies above the slow band at T=" << static_cast<double>(T);
    throw AliasingError(msg.str());
  }
  const ComplexField Ws = resample(W, slow.points());
  const ComplexField Ds = resample(D, slow.points());
  d.W1 = on_grid(slow, real_part(Ws));
  d.W2 = on_grid(slow, imag_part(Ws));
  d.D1 = on_grid(slow, real_part(Ds));
  d.D2 = on_grid(slow, imag_part(Ds));
  return d;
}

Real validity_energy(const DeviationState& d, const RealField& r_hat, Real eps) {
  d.W1.require_same_grid(r_hat);
  const RealField w1x = spectral_derivative(d.W1);
  const RealField w2x = spectral_derivative(d.W2);
  Real grad = 0;
  Real amp = 0;
  for (std::size_t j = 0; j < r_hat.size(); ++j) {
    const Real e2 = std::exp(2 * r_hat[j]);
    grad += e2 * (sq(w1x[j]) + sq(w2x[j]));
    amp += e2 * e2 * sq(d.W1[j]);
  }
  const Real h = r_hat.grid().spacing();
  return (grad + 2 * amp / (eps * eps)) * h;
}

Real deviation_h1(const DeviationState& d) { return std::hypot(sobolev_norm(d.W1, 1), sobolev_norm(d.W2, 1)); }

Real deviation_linf(const DeviationState& d) {
  Real m = 0;
  for (std::size_t j = 0; j < d.W1.size(); ++j) m = std::max(m, std::hypot(d.W1[j], d.W2[j]));
  return m;
}

VEquationCheck v_equation_defect(const NlsState& s, const RealField& r_hat, const RealField& r_T,
                                 const RealField& phi_hat, const RealField& phi_T, const RealField& res_A,
                                 const RealField& res_phi, const WaveParams& params, Real eps, Real T) {
  const Grid1D& fast = s.psi.grid();
  const Grid1D G = r_hat.grid().refined(fast.points());
  const RealField r = refine(r_hat, fast);
  const RealField rT = refine(r_T, fast);
  const RealField phi = refine(phi_hat, fast);
  const RealField phiT = refine(phi_T, fast);
  const RealField rA = refine(res_A, fast);
  const RealField rphi = refine(res_phi, fast);
  const RealField A = map_values(r, [](Real v) { return std::exp(v); });

  const ComplexField hat = approximate_wave(map_values(r_hat, [](Real v) { return std::exp(v); }), phi_hat, params, eps, T, fast);
  const ComplexField psi_t = nls_time_derivative(s.psi);

  ComplexField V(G);
  ComplexField VT(G);
  for (std::size_t j = 0; j < V.size(); ++j) {
    V[j] = s.psi[j] / hat[j];
    const Complex hat_T = hat[j] * (rT[j] + I1 * (params.omega + phiT[j]) / eps);
    VT[j] = (psi_t[j] / eps - V[j] * hat_T) / hat[j];
  }
  const ComplexField VX = spectral_derivative(V);
  const ComplexField VXX = spectral_derivative(V, 2);
  const RealField rX = spectral_derivative(on_grid(G, r));
  const RealField phiX = spectral_derivative(on_grid(G, phi));

  std::array<ComplexField, 6> terms{ComplexField(G), ComplexField(G), ComplexField(G),
                                    ComplexField(G), ComplexField(G), ComplexField(G)};
  for (std::size_t j = 0; j < V.size(); ++j) {
    terms[0][j] = I1 * VT[j];
    terms[1][j] = eps * VXX[j];
    terms[2][j] = Real(2) * I1 * (params.k + phiX[j]) * VX[j];
    terms[3][j] = 2 * eps * rX[j] * VX[j];
    terms[4][j] = gamma * A[j] * A[j] / eps * V[j] * (std::norm(V[j]) - 1);
    terms[5][j] = (I1 * rA[j] / A[j] - rphi[j] / eps) * V[j];
  }
  ComplexField sum(G);
  VEquationCheck out;
  for (const auto& t : terms) {
    sum += t;
    out.scale += l2_norm(t);
  }
  out.defect = l2_norm(sum);
  return out;
}

// ---- linearisation about the plane wave ------------------------------------

Matrix2 wavetrain_symbol(Real xi, Real k) {
  const Complex transport = Real(-2) * I1 * k * xi;
  return Matrix2{{{transport, Complex(xi * xi)}, {Complex(-xi * xi + 2 * gamma), transport}}};
}

Matrix2 wavetrain_propagator(Real xi, Real k, Real t) {
  const Complex phase = std::exp(Real(-2) * I1 * (k * xi * t));
  const Real b12 = xi * xi;
  const Real b21 = -xi * xi + 2 * gamma;
  Real c = 1;
  Real sinc_t = t;  // sin(nu t) / nu
  if (xi != 0) {
    const Real nu = std::abs(xi) * std::sqrt(xi * xi - 2 * gamma);
    c = std::cos(nu * t);
    sinc_t = std::sin(nu * t) / nu;
  }
  return Matrix2{{{phase * c, phase * (sinc_t * b12)}, {phase * (sinc_t * b21), phase * c}}};
}

std::array<Complex, 2> eigenvalues(const Matrix2& m) {
  const Complex half_tr = (m[0][0] + m[1][1]) / Real(2);
  const Complex disc = std::sqrt((m[0][0] - m[1][1]) * (m[0][0] - m[1][1]) / Real(4) + m[0][1] * m[1][0]);
  return {half_tr + disc, half_tr - disc};
}

int rank_shifted(const Matrix2& m, Complex lambda, Real tol) {
  Matrix2 s = m;
  s[0][0] -= lambda;
  s[1][1] -= lambda;
  Real scale = 0;
  for (const auto& row : s)
    for (const auto& v : row) scale = std::max(scale, std::abs(v));
  if (scale <= tol) return 0;
  const Complex det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
  return std::abs(det) > tol * scale * scale ? 2 : 1;
}

Real wavetrain_conserved(const RealField& W1, const RealField& W2) {
  const Real a = l2_norm(spectral_derivative(W1));
  const Real b = l2_norm(spectral_derivative(W2));
  const Real c = l2_norm(W1);
  return a * a + b * b - 2 * gamma * c * c;
}

std::vector<WavetrainSample> wavetrain_linearized(const ComplexField& W0, const WaveParams& params, Real t_final,
                                                  Real dt) {
  if (!(dt > 0) || t_final < 0) throw std::invalid_argument("wavetrain evolution needs dt > 0 and t_final >= 0");
  const Grid1D& g = W0.grid();
  const auto s1 = forward_spectrum(to_complex(real_part(W0), RealField(g)));
  const auto s2 = forward_spectrum(to_complex(imag_part(W0), RealField(g)));
  const auto steps = static_cast<std::size_t>(std::llround(t_final / dt));
  std::vector<WavetrainSample> out;
  out.reserve(steps + 1);
  for (std::size_t n = 0; n <= steps; ++n) {
    const Real t = dt * static_cast<Real>(n);
    std::vector<Complex> a(g.points());
    std::vector<Complex> b(g.points());
    for (std::size_t m = 0; m < g.points(); ++m) {
      // odd derivatives vanish on the Nyquist bin
      const Real k = g.is_nyquist(m) ? 0 : params.k;
      const Matrix2 P = wavetrain_propagator(g.wavenumber(m), k, t);
      a[m] = P[0][0] * s1[m] + P[0][1] * s2[m];
      b[m] = P[1][0] * s1[m] + P[1][1] * s2[m];
    }
    WavetrainSample w{t, real_part(from_spectrum(g, std::move(a))), real_part(from_spectrum(g, std::move(b)))};
    w.conserved = wavetrain_conserved(w.W1, w.W2);
    w.w2_l2 = l2_norm(w.W2);
    w.wx_l2 = std::hypot(l2_norm(spectral_derivative(w.W1)), l2_norm(spectral_derivative(w.W2)));
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace whitham::nls
