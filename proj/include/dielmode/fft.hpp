#pragma once

#include <vector>

#include "dielmode/common.hpp"

namespace dielmode {

// In-place iterative radix-2 FFT, X_k = sum_n x_n e^{-2 pi i n k / N}.
inline void fft_radix2(std::vector<complexd>& x) {
  const std::size_t n = x.size();
  if (n == 0 || (n & (n - 1)) != 0) throw numeric_error("fft: length must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * constants::pi / static_cast<double>(len);
    const complexd wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      complexd w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const complexd a = x[i + k];
        const complexd b = x[i + k + len / 2] * w;
        x[i + k] = a + b;
        x[i + k + len / 2] = a - b;
        w *= wl;
      }
    }
  }
}

inline void ifft_radix2(std::vector<complexd>& x) {
  for (auto& v : x) v = std::conj(v);
  fft_radix2(x);
  const double inv = 1.0 / static_cast<double>(x.size());
  for (auto& v : x) v = std::conj(v) * inv;
}

}  // namespace dielmode
