#pragma once

/// @file nls.hpp
/// @brief Defocusing cubic NLS  i psi_t + psi_xx + gamma |psi|^2 psi = 0  on a
/// periodic fast grid, modulated initial data, the co-rotating deviation W,
/// and the linearisation about the plane wave.
///
/// Slow and fast variables are related by X = eps x, T = eps t. A fast grid of
/// N points over L_slow / eps samples exactly the slow coordinates of an
/// N-point slow grid, so slow profiles reach the fast grid by trigonometric
/// interpolation.

#include <array>
#include <stdexcept>
#include <vector>

#include "whitham/field.hpp"

namespace whitham::nls {

inline constexpr Real gamma = -1;

/// Raised when W carries too much energy outside the slow band.
class AliasingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WaveParams {
  Real k = 0;
  Real omega = -1;

  /// omega = -k^2 - 1, i.e. gamma = omega + k^2 with unit amplitude.
  static WaveParams for_wavenumber(Real k) { return WaveParams{k, -k * k - 1}; }
};

struct NlsState {
  Real t = 0;
  ComplexField psi;
};

/// Nearest wavenumber of the form 2 pi m / L_fast.
Real nearest_admissible_k(Real k, Real L_fast);

/// Throws std::invalid_argument naming the nearest admissible k unless k L_fast is a multiple of 2 pi.
void require_commensurate(Real k, Real L_fast);

/// Fast grid of `points` samples over L_slow / eps.
Grid1D fast_grid(const Grid1D& slow, Real eps, std::size_t points);

/// psi(0, x) = e^{r0(eps x)} e^{i (k x + phi0(eps x) / eps)}.
NlsState nls_init(const RealField& r0, const RealField& phi0, const WaveParams& params, Real eps,
                  std::size_t fast_points);

/// Strang splitting: half nonlinear rotation, exact linear propagator, half rotation.
NlsState nls_step(const NlsState& s, Real dt);

/// `steps` Strang steps in place; throws BlowUpError on non-finite values.
void nls_advance(NlsState& s, Real dt, std::size_t steps);

/// integral of |psi|^2
Real mass(const ComplexField& psi);

/// psi_t = i (psi_xx + gamma |psi|^2 psi)
ComplexField nls_time_derivative(const ComplexField& psi);

/// A-hat e^{i Theta-hat / eps} on the fast grid with Theta-hat = omega T + k X + phi-hat.
ComplexField approximate_wave(const RealField& A_hat, const RealField& phi_hat, const WaveParams& params, Real eps,
                              Real T, const Grid1D& fast);

struct DeviationState {
  Real T = 0;
  RealField W1;
  RealField W2;
  /// Same quantity without the division by A-hat: (psi - psi-hat) e^{-i Theta-hat / eps}.
  RealField D1;
  RealField D2;
  Real band_fraction = 0;  ///< energy fraction of W above the slow band on the fast grid
};

struct ExtractOptions {
  Real max_band_fraction = 0.01L;
  /// Out-of-band L2 mass below this is treated as roundoff.
  Real band_floor = 1e-10L;
};

/// W = psi / psi-hat - 1 low-passed onto the slow grid of A_hat.
DeviationState extract_W(const NlsState& s, const RealField& A_hat, const RealField& phi_hat,
                         const WaveParams& params, Real eps, Real T, const ExtractOptions& options = {});

/// ||e^{r} W_X||^2 + 2 eps^{-2} ||e^{2r} W_1||^2
Real validity_energy(const DeviationState& d, const RealField& r_hat, Real eps);

/// ||W||_{H^1} on the slow grid.
Real deviation_h1(const DeviationState& d);
Real deviation_linf(const DeviationState& d);

/// Defect of the V-equation
///   i V_T + eps V_XX + 2 i (k + phi_X) V_X + 2 eps r_X V_X
///     + gamma e^{2r} eps^{-1} V (|V|^2 - 1) + (i e^{-r} Res_A - eps^{-1} Res_phi) V
/// with V = psi / psi-hat, V_T from the NLS and slow tendencies, evaluated on
/// the refined slow grid. Returned relative to the sum of the term norms.
struct VEquationCheck {
  Real defect = 0;
  Real scale = 0;
  Real relative() const { return scale > 0 ? defect / scale : defect; }
};
VEquationCheck v_equation_defect(const NlsState& s, const RealField& r_hat, const RealField& r_T,
                                 const RealField& phi_hat, const RealField& phi_T, const RealField& res_A,
                                 const RealField& res_phi, const WaveParams& params, Real eps, Real T);

// ---- linearisation about the plane wave ------------------------------------

using Matrix2 = std::array<std::array<Complex, 2>, 2>;

/// Fourier symbol of  W1_t = -W2_xx - 2k W1_x,  W2_t = W1_xx - 2k W2_x + 2 gamma W1:
///   [[-2 i k xi, xi^2], [-xi^2 + 2 gamma, -2 i k xi]]
Matrix2 wavetrain_symbol(Real xi, Real k);

/// exp(t M(xi)) in closed form, including the Jordan cell at xi = 0.
Matrix2 wavetrain_propagator(Real xi, Real k, Real t);

std::array<Complex, 2> eigenvalues(const Matrix2& m);
/// Numerical rank of M - lambda I.
int rank_shifted(const Matrix2& m, Complex lambda, Real tol = 1e-14L);

struct WavetrainSample {
  Real t = 0;
  RealField W1;
  RealField W2;
  Real conserved = 0;   ///< ||W_x||^2 - 2 gamma ||W1||^2
  Real w2_l2 = 0;
  Real wx_l2 = 0;
};

/// Exact modal evolution of W0 = W1 + i W2 sampled at multiples of dt.
std::vector<WavetrainSample> wavetrain_linearized(const ComplexField& W0, const WaveParams& params, Real t_final,
                                                  Real dt);

Real wavetrain_conserved(const RealField& W1, const RealField& W2);

}  // namespace whitham::nls
