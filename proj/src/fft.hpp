#pragma once

// Thin wrapper over FFTW's long-double interface. Plans are cached per
// (kind, size); execution uses the new-array API so concurrent callers only
// contend on plan creation.

#include <span>
#include <vector>

#include "whitham/field.hpp"

namespace whitham::fft {

/// Half spectrum of length n/2 + 1, unnormalised.
std::vector<Complex> forward_real(std::span<const Real> in);

/// Inverse of forward_real, divided by n.
std::vector<Real> inverse_real(std::span<const Complex> half_spectrum, std::size_t n);

/// Full spectrum, unnormalised.
std::vector<Complex> forward(std::span<const Complex> in);

/// Inverse of forward, divided by n.
std::vector<Complex> inverse(std::span<const Complex> spectrum);

}  // namespace whitham::fft
