#include "whitham/field.hpp"

#include <algorithm>
#include <cmath>

#include "fft.hpp"

namespace whitham {
namespace {

bool finite_value(Real v) { return std::isfinite(v); }
bool finite_value(const Complex& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

void check_order(int order) {
  if (order < 1 || order > max_derivative_order) {
    throw std::invalid_argument("derivative order must lie in [1, 4], got " + std::to_string(order));
  }
}

void check_sobolev_index(int s) {
  if (s < 0 || s > max_sobolev_index) {
    throw std::invalid_argument("Sobolev index must lie in [0, 8], got " + std::to_string(s));
  }
}

// (i xi)^order, with odd orders annihilating the Nyquist bin.
Complex derivative_multiplier(const Grid1D& g, std::size_t m, int order) {
  if (g.is_nyquist(m) && order % 2 == 1) return {0, 0};
  const Real xi = g.wavenumber(m);
  switch (order) {
    case 1: return {0, xi};
    case 2: return {-xi * xi, 0};
    case 3: return {0, -xi * xi * xi};
    default: return {xi * xi * xi * xi, 0};
  }
}

Real sobolev_weight(const Grid1D& g, std::size_t m, int s) {
  const Real xi2 = g.wavenumber(m) * g.wavenumber(m);
  Real w = 0;
  Real power = 1;
  for (int j = 0; j <= s; ++j) {
    if (!(g.is_nyquist(m) && j % 2 == 1)) w += power;
    power *= xi2;
  }
  return w;
}

// Half spectrum of an n-point real signal re-expressed on m > n points.
std::vector<Complex> pad_half_spectrum(const std::vector<Complex>& half, std::size_t n, std::size_t m) {
  std::vector<Complex> out(m / 2 + 1, Complex{0, 0});
  const Real scale = static_cast<Real>(m) / static_cast<Real>(n);
  for (std::size_t k = 0; k < n / 2; ++k) out[k] = half[k] * scale;
  out[n / 2] = half[n / 2] * (scale / 2);
  return out;
}

// Half spectrum of an m-point real signal truncated to n < m points, Nyquist dropped.
std::vector<Complex> truncate_half_spectrum(const std::vector<Complex>& half, std::size_t m, std::size_t n) {
  std::vector<Complex> out(n / 2 + 1, Complex{0, 0});
  const Real scale = static_cast<Real>(n) / static_cast<Real>(m);
  for (std::size_t k = 0; k < n / 2; ++k) out[k] = half[k] * scale;
  return out;
}

std::vector<Real> padded_values(const RealField& f, std::size_t m) {
  const std::size_t n = f.size();
  return fft::inverse_real(pad_half_spectrum(fft::forward_real(f.values()), n, m), m);
}

RealField truncated_field(const Grid1D& grid, const std::vector<Real>& padded) {
  const std::size_t m = padded.size();
  const std::size_t n = grid.points();
  return RealField(grid, fft::inverse_real(truncate_half_spectrum(fft::forward_real(padded), m, n), n));
}

std::size_t padded_size(std::size_t n) { return 3 * n / 2; }

}  // namespace

Grid1D::Grid1D(Real length, std::size_t points) : length_(length), points_(points) {
  if (!(length > 0) || !std::isfinite(length)) {
    throw std::invalid_argument("grid length must be positive and finite");
  }
  if (points < 8 || (points & (points - 1)) != 0) {
    throw std::invalid_argument("grid points must be a power of two >= 8, got " + std::to_string(points));
  }
}

std::vector<Real> Grid1D::coordinates() const {
  std::vector<Real> x(points_);
  for (std::size_t j = 0; j < points_; ++j) x[j] = coordinate(j);
  return x;
}

long Grid1D::mode(std::size_t m) const noexcept {
  const auto n = static_cast<long>(points_);
  const auto k = static_cast<long>(m);
  return 2 * k <= n ? k : k - n;
}

template <typename T>
bool BasicField<T>::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](const T& v) { return finite_value(v); });
}

template class BasicField<Real>;
template class BasicField<Complex>;

ComplexField to_complex(const RealField& re, const RealField& im) {
  re.require_same_grid(im);
  ComplexField out(re.grid());
  for (std::size_t j = 0; j < re.size(); ++j) out[j] = Complex(re[j], im[j]);
  return out;
}

RealField real_part(const ComplexField& f) {
  RealField out(f.grid());
  for (std::size_t j = 0; j < f.size(); ++j) out[j] = f[j].real();
  return out;
}

RealField imag_part(const ComplexField& f) {
  RealField out(f.grid());
  for (std::size_t j = 0; j < f.size(); ++j) out[j] = f[j].imag();
  return out;
}

RealField spectral_derivative(const RealField& f, int order) {
  check_order(order);
  const Grid1D& g = f.grid();
  auto spec = fft::forward_real(f.values());
  for (std::size_t m = 0; m < spec.size(); ++m) spec[m] *= derivative_multiplier(g, m, order);
  return RealField(g, fft::inverse_real(spec, g.points()));
}

ComplexField spectral_derivative(const ComplexField& f, int order) {
  check_order(order);
  const Grid1D& g = f.grid();
  auto spec = fft::forward(f.values());
  for (std::size_t m = 0; m < spec.size(); ++m) spec[m] *= derivative_multiplier(g, m, order);
  return ComplexField(g, fft::inverse(spec));
}

Real l2_inner(const RealField& f, const RealField& g) {
  f.require_same_grid(g);
  Real sum = 0;
  for (std::size_t j = 0; j < f.size(); ++j) sum += f[j] * g[j];
  return sum * f.grid().spacing();
}

Real l2_norm(const RealField& f) { return std::sqrt(l2_inner(f, f)); }

Real l2_norm(const ComplexField& f) {
  Real sum = 0;
  for (const auto& v : f.values()) sum += std::norm(v);
  return std::sqrt(sum * f.grid().spacing());
}

Real linf_norm(const RealField& f) {
  Real m = 0;
  for (Real v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

Real linf_norm(const ComplexField& f) {
  Real m = 0;
  for (const auto& v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

Real mean(const RealField& f) {
  Real sum = 0;
  for (Real v : f.values()) sum += v;
  return sum / static_cast<Real>(f.size());
}

Real sobolev_norm(const RealField& f, int s) {
  check_sobolev_index(s);
  const Grid1D& g = f.grid();
  const auto spec = fft::forward_real(f.values());
  Real sum = 0;
  for (std::size_t m = 0; m < spec.size(); ++m) {
    const Real multiplicity = (m == 0 || g.is_nyquist(m)) ? 1 : 2;
    sum += multiplicity * std::norm(spec[m]) * sobolev_weight(g, m, s);
  }
  const auto n = static_cast<Real>(g.points());
  return std::sqrt(sum * g.length() / (n * n));
}

Real sobolev_norm(const ComplexField& f, int s) {
  check_sobolev_index(s);
  const Grid1D& g = f.grid();
  const auto spec = fft::forward(f.values());
  Real sum = 0;
  for (std::size_t m = 0; m < spec.size(); ++m) sum += std::norm(spec[m]) * sobolev_weight(g, m, s);
  const auto n = static_cast<Real>(g.points());
  return std::sqrt(sum * g.length() / (n * n));
}

RealField dealiased_product(const RealField& a, const RealField& b) {
  a.require_same_grid(b);
  const std::size_t m = padded_size(a.size());
  auto pa = padded_values(a, m);
  const auto pb = padded_values(b, m);
  for (std::size_t j = 0; j < m; ++j) pa[j] *= pb[j];
  return truncated_field(a.grid(), pa);
}

RealField dealiased_map(const RealField& a, const std::function<Real(Real)>& fn) {
  const std::size_t m = padded_size(a.size());
  auto pa = padded_values(a, m);
  for (auto& v : pa) v = fn(v);
  return truncated_field(a.grid(), pa);
}

RealField dealiased_exp(const RealField& a, Real scale) {
  return dealiased_map(a, [scale](Real v) { return std::exp(scale * v); });
}

RealField resample(const RealField& f, std::size_t points) {
  const Grid1D target = f.grid().refined(points);
  const std::size_t n = f.size();
  if (points == n) return f;
  const auto half = fft::forward_real(f.values());
  auto spec = points > n ? pad_half_spectrum(half, n, points) : truncate_half_spectrum(half, n, points);
  return RealField(target, fft::inverse_real(spec, points));
}

ComplexField resample(const ComplexField& f, std::size_t points) {
  const Grid1D target = f.grid().refined(points);
  const std::size_t n = f.size();
  if (points == n) return f;
  const auto spec = fft::forward(f.values());
  std::vector<Complex> out(points, Complex{0, 0});
  const Real scale = static_cast<Real>(points) / static_cast<Real>(n);
  const auto wrap = [points](long k) { return static_cast<std::size_t>(k < 0 ? k + static_cast<long>(points) : k); };
  for (std::size_t m = 0; m < n; ++m) {
    const long k = f.grid().mode(m);
    if (points > n) {
      if (f.grid().is_nyquist(m)) {
        out[wrap(k)] += spec[m] * (scale / 2);
        out[wrap(-k)] += spec[m] * (scale / 2);
      } else {
        out[wrap(k)] = spec[m] * scale;
      }
    } else if (2 * std::abs(k) < static_cast<long>(points)) {
      out[wrap(k)] = spec[m] * scale;
    }
  }
  return ComplexField(target, fft::inverse(out));
}

RealField spectral_antiderivative(const RealField& f, Real mean_tolerance) {
  const Grid1D& g = f.grid();
  auto spec = fft::forward_real(f.values());
  const Real avg = spec[0].real() / static_cast<Real>(g.points());
  if (std::abs(avg) > mean_tolerance) {
    throw std::invalid_argument("antiderivative requires a zero-mean field (mean " + std::to_string(static_cast<double>(avg)) + ")");
  }
  spec[0] = {0, 0};
  for (std::size_t m = 1; m < spec.size(); ++m) {
    spec[m] = g.is_nyquist(m) ? Complex{0, 0} : spec[m] / Complex(0, g.wavenumber(m));
  }
  return RealField(g, fft::inverse_real(spec, g.points()));
}

RealField exponential_filter(const RealField& f, Real strength, int order) {
  const Grid1D& g = f.grid();
  auto spec = fft::forward_real(f.values());
  const Real half = static_cast<Real>(g.points() / 2);
  for (std::size_t m = 0; m < spec.size(); ++m) spec[m] *= std::exp(-strength * std::pow(static_cast<Real>(m) / half, order));
  return RealField(g, fft::inverse_real(spec, g.points()));
}

Real spectral_tail_ratio(const RealField& f) {
  const auto spec = fft::forward_real(f.values());
  Real peak = 0;
  Real tail = 0;
  for (std::size_t m = 0; m < spec.size(); ++m) {
    const Real a = std::abs(spec[m]);
    peak = std::max(peak, a);
    if (3 * m > f.size()) tail = std::max(tail, a);
  }
  return peak > 0 ? tail / peak : Real(0);
}

Real energy_fraction_above(const ComplexField& f, std::size_t band) {
  const auto spec = fft::forward(f.values());
  Real total = 0;
  Real above = 0;
  for (std::size_t m = 0; m < spec.size(); ++m) {
    const Real e = std::norm(spec[m]);
    total += e;
    if (static_cast<std::size_t>(std::abs(f.grid().mode(m))) >= band) above += e;
  }
  return total > 0 ? above / total : Real(0);
}

std::vector<Complex> forward_spectrum(const RealField& f) { return fft::forward_real(f.values()); }
std::vector<Complex> forward_spectrum(const ComplexField& f) { return fft::forward(f.values()); }

ComplexField from_spectrum(const Grid1D& grid, std::vector<Complex> spectrum) {
  if (spectrum.size() != grid.points()) throw std::invalid_argument("spectrum size does not match grid");
  return ComplexField(grid, fft::inverse(spectrum));
}

}  // namespace whitham
