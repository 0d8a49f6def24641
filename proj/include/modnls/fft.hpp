#pragma once

#include <complex>
#include <span>

namespace modnls::fft {

/// In-place unnormalized forward DFT: X_k = sum_j x_j e^{-2 pi i jk/n}.
void forward(std::span<std::complex<double>> data);

/// In-place unnormalized backward DFT: x_j = sum_k X_k e^{+2 pi i jk/n}.
void backward(std::span<std::complex<double>> data);

/// Smallest power of two >= n.
std::size_t next_pow2(std::size_t n);

}  // namespace modnls::fft
