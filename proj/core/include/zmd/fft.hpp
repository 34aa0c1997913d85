#pragma once

#include <complex>
#include <vector>

namespace zmd::fft {

using cd = std::complex<double>;

bool is_pow2(int n);
int next_pow2(int n);

/// In-place radix-2 FFT. n must be a power of two. inverse applies 1/n.
void transform(cd* data, int n, bool inverse);

/// 2D FFT over a row-major w x h buffer; both dims must be powers of two.
void transform2d(cd* data, int w, int h, bool inverse);

/// FFT frequency for bin i of an n-point transform with sample pitch d,
/// in cycles per meter (numpy fftfreq convention).
inline double freq(int i, int n, double d) {
  int k = (i < (n + 1) / 2) ? i : i - n;
  return static_cast<double>(k) / (static_cast<double>(n) * d);
}

}  // namespace zmd::fft
