#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace whitham::fft {
namespace {

enum class Kind { r2c, c2r, c2c_forward, c2c_backward };

std::mutex planner_mutex;

fftwl_plan plan_for(Kind kind, std::size_t n) {
  static std::map<std::tuple<Kind, std::size_t>, fftwl_plan> cache;
  std::lock_guard lock(planner_mutex);
  auto key = std::make_tuple(kind, n);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  const int len = static_cast<int>(n);
  auto* real_buf = static_cast<long double*>(fftwl_malloc(sizeof(long double) * n));
  auto* cplx_in = static_cast<fftwl_complex*>(fftwl_malloc(sizeof(fftwl_complex) * n));
  auto* cplx_out = static_cast<fftwl_complex*>(fftwl_malloc(sizeof(fftwl_complex) * n));
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  fftwl_plan p = nullptr;
  switch (kind) {
    case Kind::r2c: p = fftwl_plan_dft_r2c_1d(len, real_buf, cplx_out, flags); break;
    case Kind::c2r: p = fftwl_plan_dft_c2r_1d(len, cplx_in, real_buf, flags); break;
    case Kind::c2c_forward: p = fftwl_plan_dft_1d(len, cplx_in, cplx_out, FFTW_FORWARD, flags); break;
    case Kind::c2c_backward: p = fftwl_plan_dft_1d(len, cplx_in, cplx_out, FFTW_BACKWARD, flags); break;
  }
  fftwl_free(real_buf);
  fftwl_free(cplx_in);
  fftwl_free(cplx_out);
  cache.emplace(key, p);
  return p;
}

fftwl_complex* as_fftw(Complex* p) { return reinterpret_cast<fftwl_complex*>(p); }

}  // namespace

std::vector<Complex> forward_real(std::span<const Real> in) {
  const std::size_t n = in.size();
  std::vector<Real> work(in.begin(), in.end());
  std::vector<Complex> out(n / 2 + 1);
  fftwl_execute_dft_r2c(plan_for(Kind::r2c, n), work.data(), as_fftw(out.data()));
  return out;
}

std::vector<Real> inverse_real(std::span<const Complex> half_spectrum, std::size_t n) {
  // c2r overwrites its input
  std::vector<Complex> work(half_spectrum.begin(), half_spectrum.end());
  std::vector<Real> out(n);
  fftwl_execute_dft_c2r(plan_for(Kind::c2r, n), as_fftw(work.data()), out.data());
  const Real scale = Real(1) / static_cast<Real>(n);
  for (auto& v : out) v *= scale;
  return out;
}

std::vector<Complex> forward(std::span<const Complex> in) {
  const std::size_t n = in.size();
  std::vector<Complex> work(in.begin(), in.end());
  std::vector<Complex> out(n);
  fftwl_execute_dft(plan_for(Kind::c2c_forward, n), as_fftw(work.data()), as_fftw(out.data()));
  return out;
}

std::vector<Complex> inverse(std::span<const Complex> spectrum) {
  const std::size_t n = spectrum.size();
  std::vector<Complex> work(spectrum.begin(), spectrum.end());
  std::vector<Complex> out(n);
  fftwl_execute_dft(plan_for(Kind::c2c_backward, n), as_fftw(work.data()), as_fftw(out.data()));
  const Real scale = Real(1) / static_cast<Real>(n);
  for (auto& v : out) v *= scale;
  return out;
}

}  // namespace whitham::fft
