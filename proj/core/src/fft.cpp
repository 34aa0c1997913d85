#include "zmd/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace zmd::fft {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

void transform(cd* a, int n, bool inverse) {
  if (!is_pow2(n)) throw std::invalid_argument("fft: size must be a power of two");
  // bit-reversal permutation
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (int len = 2; len <= n; len <<= 1) {
    double ang = 2.0 * std::numbers::pi / len * (inverse ? 1.0 : -1.0);
    cd wlen(std::cos(ang), std::sin(ang));
    for (int i = 0; i < n; i += len) {
      cd w(1.0, 0.0);
      for (int j = 0; j < len / 2; ++j) {
        cd u = a[i + j];
        cd v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    double inv = 1.0 / n;
    for (int i = 0; i < n; ++i) a[i] *= inv;
  }
}

void transform2d(cd* data, int w, int h, bool inverse) {
  for (int y = 0; y < h; ++y) transform(data + static_cast<size_t>(y) * w, w, inverse);
  std::vector<cd> col(h);
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) col[y] = data[static_cast<size_t>(y) * w + x];
    transform(col.data(), h, inverse);
    for (int y = 0; y < h; ++y) data[static_cast<size_t>(y) * w + x] = col[y];
  }
}

}  // namespace zmd::fft
