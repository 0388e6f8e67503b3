#pragma once
// Real-to-complex 3D FFT wrappers (FFTW r2c/c2r) with a per-size plan cache.
// Forward transform is unnormalized; backward divides by n^3.
// Spectral layout: index (k*n + j)*(n/2+1) + i with kx = i in [0, n/2],
// ky/kz folded (j <= n/2 ? j : j-n).

#include "jetforge/common.hpp"
#include "jetforge/field.hpp"

namespace jetforge {

inline std::size_t spec_size(int n) {
  return std::size_t(n) * n * (n / 2 + 1);
}

// FFT of one real component (length n^3, x-fastest) into spectral buffer.
void fft_forward(const Grid3& g, const Real* in, Cplx* out);
// Inverse FFT; `in` is preserved; output scaled by 1/n^3.
void fft_backward(const Grid3& g, const Cplx* in, Real* out);

// Per-component forward transform of a full field.
std::vector<std::vector<Cplx>> fft_forward_all(const Field& f);
Field fft_backward_all(const Grid3& g, Rank r,
                       const std::vector<std::vector<Cplx>>& spec,
                       bool trace_free = false);

// Iterate modes: callback(flat, kx, ky, kz). kx in [0,n/2].
template <class F>
void for_each_mode(const Grid3& g, F&& fn) {
  const int n = g.n, nxh = n / 2 + 1;
  std::size_t flat = 0;
  for (int k = 0; k < n; ++k) {
    int kz = k <= n / 2 ? k : k - n;
    for (int j = 0; j < n; ++j) {
      int ky = j <= n / 2 ? j : j - n;
      for (int i = 0; i < nxh; ++i, ++flat) fn(flat, i, ky, kz);
    }
  }
}

}  // namespace jetforge
