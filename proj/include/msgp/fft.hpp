#pragma once

#include <complex>
#include <vector>

namespace msgp::fft {

/// FFT backend boundary. Everything above this header talks DFTs in these
/// terms only; the implementation behind it (FFTW) is not visible elsewhere.
///
/// Conventions: forward is the unnormalized DFT
///   X[k] = sum_j x[j] exp(-2*pi*i*j*k/n),
/// inverse applies the 1/n normalization, so inverse(forward(x)) == x.
/// Multidimensional transforms are row-major over `shape`.

using Complex = std::complex<double>;

void forward(std::size_t n, const Complex* in, Complex* out);
void inverse(std::size_t n, const Complex* in, Complex* out);

void forward_nd(const std::vector<int>& shape, const Complex* in, Complex* out);
void inverse_nd(const std::vector<int>& shape, const Complex* in, Complex* out);

std::vector<Complex> forward(const std::vector<Complex>& in);
std::vector<Complex> inverse(const std::vector<Complex>& in);

}  // namespace msgp::fft
