#pragma once

/// @file field.hpp
/// @brief Uniform periodic grids and sampled fields with Fourier-based calculus.
///
/// Every slow-variable profile (r, u, phases, residuals) and every fast NLS
/// state lives on a Grid1D. Fields are plain values; all spectral operations
/// are free functions returning new fields.

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace whitham {

/// Working precision. Extended precision keeps O(eps^6) residuals well above
/// the roundoff floor of differentiated O(1) phases.
using Real = long double;
using Complex = std::complex<Real>;

inline constexpr Real pi = 3.141592653589793238462643383279502884L;

/// Raised by time integrators when a state stops being finite.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, std::size_t step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Periodic grid on [-L/2, L/2) with N equispaced samples, N a power of two.
class Grid1D {
 public:
  Grid1D(Real length, std::size_t points);

  Real length() const noexcept { return length_; }
  std::size_t points() const noexcept { return points_; }
  Real spacing() const noexcept { return length_ / static_cast<Real>(points_); }
  Real origin() const noexcept { return -length_ / 2; }
  Real coordinate(std::size_t j) const noexcept { return origin() + spacing() * static_cast<Real>(j); }
  std::vector<Real> coordinates() const;

  /// Signed mode index of FFT bin m (the Nyquist bin maps to +N/2).
  long mode(std::size_t m) const noexcept;
  Real wavenumber(std::size_t m) const noexcept { return 2 * pi * static_cast<Real>(mode(m)) / length_; }
  bool is_nyquist(std::size_t m) const noexcept { return 2 * m == points_; }

  /// Same period, different resolution.
  Grid1D refined(std::size_t points) const { return Grid1D(length_, points); }

  friend bool operator==(const Grid1D&, const Grid1D&) = default;

 private:
  Real length_;
  std::size_t points_;
};

template <typename T>
class BasicField {
 public:
  using value_type = T;

  explicit BasicField(Grid1D grid) : grid_(grid), values_(grid.points(), T{}) {}
  BasicField(Grid1D grid, std::vector<T> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.points()) {
      throw std::invalid_argument("field size " + std::to_string(values_.size()) +
                                  " does not match grid points " + std::to_string(grid_.points()));
    }
  }

  static BasicField constant(Grid1D grid, T value) {
    return BasicField(grid, std::vector<T>(grid.points(), value));
  }

  /// Samples fn(x) at every grid coordinate.
  template <typename Fn>
  static BasicField sample(Grid1D grid, Fn&& fn) {
    std::vector<T> v(grid.points());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = static_cast<T>(fn(grid.coordinate(j)));
    return BasicField(grid, std::move(v));
  }

  const Grid1D& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const T> values() const noexcept { return values_; }
  std::span<T> values() noexcept { return values_; }
  const std::vector<T>& data() const noexcept { return values_; }

  T operator[](std::size_t j) const { return values_[j]; }
  T& operator[](std::size_t j) { return values_[j]; }

  bool all_finite() const noexcept;

  BasicField& operator+=(const BasicField& o) {
    require_same_grid(o);
    for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += o.values_[j];
    return *this;
  }
  BasicField& operator-=(const BasicField& o) {
    require_same_grid(o);
    for (std::size_t j = 0; j < values_.size(); ++j) values_[j] -= o.values_[j];
    return *this;
  }
  BasicField& operator+=(T c) {
    for (auto& v : values_) v += c;
    return *this;
  }
  BasicField& operator*=(T c) {
    for (auto& v : values_) v *= c;
    return *this;
  }

  void require_same_grid(const BasicField& o) const {
    if (!(grid_ == o.grid_)) throw std::invalid_argument("fields live on different grids");
  }

 private:
  Grid1D grid_;
  std::vector<T> values_;
};

using RealField = BasicField<Real>;
using ComplexField = BasicField<Complex>;

template <typename T>
BasicField<T> operator+(BasicField<T> a, const BasicField<T>& b) { return a += b; }
template <typename T>
BasicField<T> operator-(BasicField<T> a, const BasicField<T>& b) { return a -= b; }
template <typename T>
BasicField<T> operator-(BasicField<T> a) { return a *= T(-1); }
template <typename T>
BasicField<T> operator*(T c, BasicField<T> a) { return a *= c; }
template <typename T>
BasicField<T> operator+(BasicField<T> a, T c) { return a += c; }

// Non-template overloads so integer literals scale fields without a cast.
inline BasicField<long double> operator*(long double c, BasicField<long double> a) { return a *= c; }
inline BasicField<std::complex<long double>> operator*(std::complex<long double> c,
                                                       BasicField<std::complex<long double>> a) {
  return a *= c;
}

/// Sample-by-sample product. Use dealiased_product inside nonlinear tendencies.
template <typename T>
BasicField<T> pointwise_product(const BasicField<T>& a, const BasicField<T>& b) {
  a.require_same_grid(b);
  BasicField<T> out(a.grid());
  for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] * b[j];
  return out;
}

template <typename T, typename Fn>
BasicField<T> map_values(const BasicField<T>& a, Fn&& fn) {
  BasicField<T> out(a.grid());
  for (std::size_t j = 0; j < a.size(); ++j) out[j] = fn(a[j]);
  return out;
}

ComplexField to_complex(const RealField& re, const RealField& im);
RealField real_part(const ComplexField& f);
RealField imag_part(const ComplexField& f);

// ---- spectral calculus -------------------------------------------------------

inline constexpr int max_derivative_order = 4;
inline constexpr int max_sobolev_index = 8;

/// Fourier-multiplier derivative (i xi)^order; odd orders zero the Nyquist bin.
/// Throws std::invalid_argument unless 1 <= order <= 4.
RealField spectral_derivative(const RealField& f, int order = 1);
ComplexField spectral_derivative(const ComplexField& f, int order = 1);

/// Rectangle-rule pairing sum f g h.
Real l2_inner(const RealField& f, const RealField& g);
Real l2_norm(const RealField& f);
Real l2_norm(const ComplexField& f);
Real linf_norm(const RealField& f);
Real linf_norm(const ComplexField& f);
Real mean(const RealField& f);

/// sqrt(sum_{j<=s} ||d^j f||^2), evaluated on the spectral side with the
/// same multipliers as spectral_derivative.
Real sobolev_norm(const RealField& f, int s);
Real sobolev_norm(const ComplexField& f, int s);

/// Quadratic product evaluated on a 3N/2 zero-padded grid and truncated back.
RealField dealiased_product(const RealField& a, const RealField& b);

/// fn applied on the 3N/2 padded grid, truncated back to N modes.
RealField dealiased_map(const RealField& a, const std::function<Real(Real)>& fn);

/// exp(scale * a) through dealiased_map.
RealField dealiased_exp(const RealField& a, Real scale = 1);

/// Trigonometric interpolation (points > N) or low-pass projection (points < N).
RealField resample(const RealField& f, std::size_t points);
ComplexField resample(const ComplexField& f, std::size_t points);

/// Zero-mean periodic antiderivative. Throws if |mean f| exceeds tolerance.
RealField spectral_antiderivative(const RealField& f, Real mean_tolerance = 1e-12L);

/// Multiplies mode m by exp(-strength (|m| / (N/2))^order). The default
/// leaves |m| < N/3 unchanged to about 1e-5 and removes the top modes.
RealField exponential_filter(const RealField& f, Real strength = 36, int order = 36);

/// max |F_m| over |m| > N/3 divided by max |F_m|; 0 for the zero field.
Real spectral_tail_ratio(const RealField& f);

/// Fraction of spectral energy in modes with |m| >= band.
Real energy_fraction_above(const ComplexField& f, std::size_t band);

/// Raw unnormalised spectra (F_m = sum_j f_j e^{-2 pi i j m / N}).
/// The real overload returns only the N/2 + 1 nonnegative modes.
std::vector<Complex> forward_spectrum(const RealField& f);
std::vector<Complex> forward_spectrum(const ComplexField& f);
ComplexField from_spectrum(const Grid1D& grid, std::vector<Complex> spectrum);

}  // namespace whitham
