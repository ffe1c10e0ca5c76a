#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace holograph::fft {

// In-place 2D c2c FFT of an n x n row-major buffer. sign -1 = forward,
// +1 = backward. Unnormalized in both directions; callers fold 1/N where
// they need it.
void transform(std::complex<double>* data, std::uint32_t n, int sign);

// out = IFFT( FFT(in) .* kernel ) / N, all on the n x n grid. `in` and `out`
// may alias. This is the whole propagation inner loop, fused so the
// normalization touches each element once.
void spectral_apply(const std::complex<double>* in, const std::complex<double>* kernel,
                    std::complex<double>* out, std::uint32_t n);

}  // namespace holograph::fft
