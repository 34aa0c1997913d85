#include <doctest.h>

#include <cmath>
#include <numbers>

#include "zmd/dataset.hpp"

using namespace zmd;

TEST_CASE("grayscale maps affinely onto the phase range") {
  RealImage img(4, 4, 0.5e-6);
  SUBCASE("constant image maps to zero phase") {
    for (double& v : img.data) v = 0.7;
    PhaseMap p = dataset::phase_from_grayscale(img, 3.5);
    for (double v : p.data) CHECK(v == 0.0);
  }
  SUBCASE("extremes hit 0 and phase_max") {
    for (size_t i = 0; i < img.data.size(); ++i) img.data[i] = (i % 2) ? 255.0 : 0.0;
    PhaseMap p = dataset::phase_from_grayscale(img, 3.5);
    for (size_t i = 0; i < p.data.size(); ++i)
      CHECK(p.data[i] == doctest::Approx((i % 2) ? 3.5 : 0.0));
  }
  SUBCASE("a unit ramp becomes a phase ramp") {
    for (size_t i = 0; i < img.data.size(); ++i)
      img.data[i] = static_cast<double>(i) / (img.data.size() - 1);
    PhaseMap p = dataset::phase_from_grayscale(img, 3.5);
    for (size_t i = 0; i < p.data.size(); ++i)
      CHECK(p.data[i] == doctest::Approx(3.5 * i / (img.data.size() - 1)));
  }
}

TEST_CASE("noise injection follows the relative sigma contract") {
  SUBCASE("sigma zero is the identity") {
    RealImage img(8, 8, 0.5e-6, 0.3);
    Rng rng(1);
    RealImage out = dataset::add_noise(img, 0.0, rng);
    CHECK(out.data == img.data);
  }
  SUBCASE("empirical std tracks sigma times the mean") {
    RealImage img(256, 256, 0.5e-6, 1.0);
    Rng rng(2);
    RealImage out = dataset::add_noise(img, 0.1, rng);
    double m = out.mean(), var = 0;
    for (double v : out.data) var += (v - m) * (v - m);
    double sd = std::sqrt(var / (out.data.size() - 1));
    CHECK(sd > 0.09);
    CHECK(sd < 0.11);
  }
  SUBCASE("zero image stays zero") {
    RealImage img(8, 8, 0.5e-6, 0.0);
    Rng rng(3);
    RealImage out = dataset::add_noise(img, 0.5, rng);
    for (double v : out.data) CHECK(v == 0.0);
  }
  SUBCASE("values stay non-negative") {
    RealImage img(64, 64, 0.5e-6, 0.01);
    Rng rng(4);
    RealImage out = dataset::add_noise(img, 5.0, rng);
    for (double v : out.data) CHECK(v >= 0.0);
  }
}

TEST_CASE("zero phase with no noise yields flat channel images") {
  dataset::SimulationSpec spec;
  spec.width = spec.height = 16;
  spec.noise_sigma = 0.0;
  PhaseMap phase(16, 16, spec.pitch);
  Rng rng(5);
  dataset::Sample s = dataset::simulate_sample(phase, spec, rng);
  for (int c = 0; c < 3; ++c) {
    optics::SensorChannel ch(spec.channel_centers[c], s.sigma_c_used[c]);
    double expected = 0;
    for (double lambda : spec.band.lambdas)
      expected += optics::quantum_efficiency(lambda, ch);
    expected /= spec.band.count();
    for (double v : s.x[c].data) CHECK(v == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("sample generation is bit-deterministic") {
  dataset::SimulationSpec spec;
  spec.width = spec.height = 16;
  Rng rng_a(7), rng_b(7);
  PhaseMap phase(16, 16, spec.pitch);
  for (size_t i = 0; i < phase.data.size(); ++i) phase.data[i] = 0.01 * (i % 13);
  dataset::Sample a = dataset::simulate_sample(phase, spec, rng_a);
  dataset::Sample b = dataset::simulate_sample(phase, spec, rng_b);
  CHECK(a.z == b.z);
  CHECK(a.sigma_c_used == b.sigma_c_used);
  for (int c = 0; c < 3; ++c) CHECK(a.x[c].data == b.x[c].data);
  CHECK(a.y.data == b.y.data);
}

TEST_CASE("chromatic defocus separates the channel images") {
  dataset::SimulationSpec spec;
  spec.width = spec.height = 32;
  spec.noise_sigma = 0.0;
  spec.fixed_z = true;
  spec.z_min = spec.z_max = 1e-6;
  PhaseMap phase(32, 32, spec.pitch);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x)
      phase.at(x, y) = 0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * 3.0 * x / 32.0);
  Rng rng(9);
  dataset::Sample s = dataset::simulate_sample(phase, spec, rng);
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) {
      double l2 = 0;
      for (size_t i = 0; i < s.x[a].data.size(); ++i) {
        double d = s.x[a].data[i] - s.x[b].data[i];
        l2 += d * d;
      }
      CHECK(l2 > 0.0);
    }
}

TEST_CASE("phase objects are invisible in focus") {
  dataset::SimulationSpec spec;
  spec.width = spec.height = 16;
  spec.noise_sigma = 0.0;
  spec.fixed_z = true;
  spec.z_min = spec.z_max = 1e-9;
  PhaseMap phase(16, 16, spec.pitch);
  for (size_t i = 0; i < phase.data.size(); ++i)
    phase.data[i] = 0.3 * std::sin(0.37 * static_cast<double>(i));
  Rng rng(11);
  dataset::Sample s = dataset::simulate_sample(phase, spec, rng);
  for (int c = 0; c < 3; ++c) {
    optics::SensorChannel ch(spec.channel_centers[c], s.sigma_c_used[c]);
    double flat = 0;
    for (double lambda : spec.band.lambdas) flat += optics::quantum_efficiency(lambda, ch);
    flat /= spec.band.count();
    for (double v : s.x[c].data) CHECK(std::abs(v - flat) < 1e-4);
  }
}

TEST_CASE("samples respect the documented ranges") {
  dataset::SimulationSpec spec;
  spec.width = spec.height = 16;
  Rng rng(13);
  RealImage gray = dataset::procedural_grayscale(16, 16, spec.pitch, rng);
  for (double v : gray.data) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  PhaseMap phase = dataset::phase_from_grayscale(gray, spec.phase_max);
  dataset::Sample s = dataset::simulate_sample(phase, spec, rng);
  CHECK(s.z >= spec.z_min);
  CHECK(s.z <= spec.z_max);
  for (double v : s.y.data) {
    CHECK(v >= 0.0);
    CHECK(v <= spec.phase_max);
  }
  for (int c = 0; c < 3; ++c) {
    CHECK(s.sigma_c_used[c] >= spec.sigma_c_min);
    CHECK(s.sigma_c_used[c] <= spec.sigma_c_max);
    for (double v : s.x[c].data) CHECK(v >= 0.0);
  }
}

TEST_CASE("invalid simulation specs are rejected") {
  dataset::SimulationSpec spec;
  spec.phase_max = 0.0;
  CHECK_THROWS_AS(spec.validate(), InvalidInput);
  spec = {};
  spec.z_min = 2e-6;
  spec.z_max = 1e-6;
  CHECK_THROWS_AS(spec.validate(), InvalidInput);
  spec = {};
  spec.noise_sigma = -0.1;
  CHECK_THROWS_AS(spec.validate(), InvalidInput);
}
