#pragma once

#include <span>

#include "specrob/tensor.hpp"

namespace specrob {

// Unnormalized forward 2D DFT per channel:
//   F[u,v] = sum_{m,n} x[m,n] exp(-2 pi i (u m / H + v n / W)).
// Any H, W >= 1 (mixed-radix Cooley-Tukey; prime factors fall back to a
// direct butterfly).
Spectrum dft2(const Image& x);
Spectrum dft2_complex(const Spectrum& s);

// Inverse with 1/(H W) scaling. Rejects shifted input. Imaginary parts are
// discarded; `max_imag`, when given, receives the largest discarded magnitude.
Image idft2(const Spectrum& s, double* max_imag = nullptr);
Spectrum idft2_complex(const Spectrum& s);

// Frequency (0, 0) moves to (floor(H/2), floor(W/2)). ifftshift undoes it for
// every parity.
Spectrum fftshift(const Spectrum& s);
Spectrum ifftshift(const Spectrum& s);

// Index arithmetic shared by shift helpers and shifted-grid consumers.
inline std::size_t shift_index(std::size_t k, std::size_t n) { return (k + n / 2) % n; }
inline std::size_t unshift_index(std::size_t k, std::size_t n) { return (k + n - n / 2) % n; }

// In-place 1D transform of length data.size(); sign -1 forward, +1 inverse
// (unscaled).
void fft1d(std::span<Complex> data, int sign);

}  // namespace specrob
