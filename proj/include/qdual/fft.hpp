#pragma once

#include <complex>
#include <vector>

namespace qdual {

// Multi-dimensional complex DFT on a cubic N^d array (row-major, N per axis).
// Forward applies sum_x f(x) e^{-i 2pi k.x/N}; inverse applies
// (1/N^d) sum_k F(k) e^{+i 2pi k.x/N}, so inverse(forward(f)) == f.
// Backed by FFTW; plans are cached per (dim, n) behind an internal lock,
// execution uses caller-owned buffers and is safe to run concurrently.
std::vector<std::complex<double>> dft_forward(int dim, int n,
                                              const std::vector<std::complex<double>>& in);
std::vector<std::complex<double>> dft_inverse(int dim, int n,
                                              const std::vector<std::complex<double>>& in);

}  // namespace qdual
