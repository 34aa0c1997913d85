#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "zmd/fft.hpp"
#include "zmd/rng.hpp"

using namespace zmd;
using fft::cd;

TEST_CASE("power of two helpers") {
  CHECK(fft::is_pow2(1));
  CHECK(fft::is_pow2(64));
  CHECK_FALSE(fft::is_pow2(0));
  CHECK_FALSE(fft::is_pow2(48));
  CHECK(fft::next_pow2(48) == 64);
  CHECK(fft::next_pow2(64) == 64);
  CHECK(fft::next_pow2(65) == 128);
}

TEST_CASE("delta transforms to a constant spectrum") {
  std::vector<cd> v(16, 0.0);
  v[0] = 1.0;
  fft::transform(v.data(), 16, false);
  for (const cd& c : v) CHECK(std::abs(c - cd(1.0, 0.0)) < 1e-12);
}

TEST_CASE("cosine concentrates on two conjugate bins") {
  const int n = 32, f = 5;
  std::vector<cd> v(n);
  for (int i = 0; i < n; ++i)
    v[i] = std::cos(2.0 * std::numbers::pi * f * i / n);
  fft::transform(v.data(), n, false);
  for (int i = 0; i < n; ++i) {
    double expected = (i == f || i == n - f) ? n / 2.0 : 0.0;
    CHECK(std::abs(v[i] - cd(expected, 0.0)) < 1e-9);
  }
}

TEST_CASE("forward then inverse is the identity") {
  Rng rng(1);
  std::vector<cd> v(128), orig;
  for (cd& c : v) c = cd(rng.normal(), rng.normal());
  orig = v;
  fft::transform(v.data(), 128, false);
  fft::transform(v.data(), 128, true);
  for (size_t i = 0; i < v.size(); ++i) CHECK(std::abs(v[i] - orig[i]) < 1e-12);
}

TEST_CASE("Parseval's identity holds") {
  Rng rng(2);
  const int n = 64;
  std::vector<cd> v(n);
  double time_energy = 0;
  for (cd& c : v) {
    c = cd(rng.normal(), rng.normal());
    time_energy += std::norm(c);
  }
  fft::transform(v.data(), n, false);
  double freq_energy = 0;
  for (const cd& c : v) freq_energy += std::norm(c);
  CHECK(freq_energy / n == doctest::Approx(time_energy).epsilon(1e-12));
}

TEST_CASE("2-D round trip and separable plane wave") {
  Rng rng(3);
  const int w = 16, h = 8;
  std::vector<cd> v(static_cast<size_t>(w) * h), orig;
  for (cd& c : v) c = cd(rng.normal(), rng.normal());
  orig = v;
  fft::transform2d(v.data(), w, h, false);
  fft::transform2d(v.data(), w, h, true);
  for (size_t i = 0; i < v.size(); ++i) CHECK(std::abs(v[i] - orig[i]) < 1e-12);

  // e^{2 pi i (3x/w + 2y/h)} lands on bin (3, 2) only
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      v[static_cast<size_t>(y) * w + x] =
          std::exp(cd(0.0, 2.0 * std::numbers::pi * (3.0 * x / w + 2.0 * y / h)));
  fft::transform2d(v.data(), w, h, false);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double expected = (x == 3 && y == 2) ? static_cast<double>(w) * h : 0.0;
      CHECK(std::abs(v[static_cast<size_t>(y) * w + x] - cd(expected, 0.0)) < 1e-8);
    }
}

TEST_CASE("frequency bins follow the fftfreq convention") {
  // n=8, d=1: 0, 1/8, 2/8, 3/8, -4/8, -3/8, -2/8, -1/8
  const double expected[8] = {0, 0.125, 0.25, 0.375, -0.5, -0.375, -0.25, -0.125};
  for (int i = 0; i < 8; ++i) CHECK(fft::freq(i, 8, 1.0) == doctest::Approx(expected[i]));
  // odd n=5: 0, 1/5, 2/5, -2/5, -1/5
  const double odd[5] = {0, 0.2, 0.4, -0.4, -0.2};
  for (int i = 0; i < 5; ++i) CHECK(fft::freq(i, 5, 1.0) == doctest::Approx(odd[i]));
  CHECK(fft::freq(1, 8, 0.5) == doctest::Approx(0.25));
}
