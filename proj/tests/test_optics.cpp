#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "zmd/fft.hpp"
#include "zmd/optics.hpp"
#include "zmd/rng.hpp"

using namespace zmd;

namespace {

ComplexField random_phase_object(int n, uint64_t seed, double amp = 1.0) {
  Rng rng(seed);
  ComplexField f(n, n, 0.5e-6);
  for (auto& v : f.data) v = std::polar(1.0, amp * rng.normal());
  return f;
}

struct WarnCapture {
  std::vector<std::string> messages;
  WarnCapture() {
    optics::set_warn_handler([this](const std::string& m) { messages.push_back(m); });
  }
  ~WarnCapture() { optics::set_warn_handler(nullptr); }
};

}  // namespace

TEST_CASE("zero distance propagation is the identity") {
  ComplexField f = random_phase_object(32, 5);
  ComplexField out = optics::fresnel_propagate(f, 0.0, 550e-9);
  for (size_t i = 0; i < f.data.size(); ++i) CHECK(std::abs(out.data[i] - f.data[i]) < 1e-12);
}

TEST_CASE("a plane wave is a propagation eigenfunction") {
  ComplexField f(64, 64, 0.5e-6, {1.0, 0.0});
  RealImage i = optics::intensity(optics::fresnel_propagate(f, 2e-6, 550e-9));
  for (double v : i.data) CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("propagation conserves energy") {
  ComplexField f = random_phase_object(64, 7);
  double before = f.energy();
  ComplexField out = optics::fresnel_propagate(f, 1e-6, 630e-9);
  CHECK(out.energy() == doctest::Approx(before).epsilon(1e-10));
}

TEST_CASE("back propagation inverts forward propagation") {
  ComplexField f = random_phase_object(32, 9);
  ComplexField round = optics::fresnel_propagate(
      optics::fresnel_propagate(f, 1.5e-6, 550e-9), -1.5e-6, 550e-9);
  for (size_t i = 0; i < f.data.size(); ++i)
    CHECK(std::abs(round.data[i] - f.data[i]) < 1e-8);
}

TEST_CASE("propagation composes over distance") {
  ComplexField f = random_phase_object(32, 11);
  ComplexField two_steps = optics::fresnel_propagate(
      optics::fresnel_propagate(f, 0.7e-6, 450e-9), 1.1e-6, 450e-9);
  ComplexField one_step = optics::fresnel_propagate(f, 1.8e-6, 450e-9);
  for (size_t i = 0; i < f.data.size(); ++i)
    CHECK(std::abs(two_steps.data[i] - one_step.data[i]) < 1e-8);
}

TEST_CASE("non power-of-two grids round trip through padding") {
  Rng rng(13);
  ComplexField f(48, 24, 0.5e-6);
  for (auto& v : f.data) v = std::polar(1.0, 0.3 * rng.normal());
  ComplexField out = optics::fresnel_propagate(f, 0.0, 550e-9);
  CHECK(out.width == 48);
  CHECK(out.height == 24);
  for (size_t i = 0; i < f.data.size(); ++i) CHECK(std::abs(out.data[i] - f.data[i]) < 1e-12);
}

TEST_CASE("non-finite fields are rejected") {
  ComplexField f(8, 8, 0.5e-6, {1.0, 0.0});
  f.data[3] = {std::nan(""), 0.0};
  CHECK_THROWS_AS(optics::fresnel_propagate(f, 1e-6, 550e-9), InvalidInput);
}

TEST_CASE("aliasing beyond the sampling criterion warns") {
  WarnCapture cap;
  ComplexField f(8, 8, 0.5e-6, {1.0, 0.0});
  CHECK(optics::fresnel_sampling_ratio(f, 1e-2, 550e-9) > 1.0);
  optics::fresnel_propagate(f, 1e-2, 550e-9);
  CHECK(cap.messages.size() == 1);
  ComplexField g(64, 64, 0.5e-6, {1.0, 0.0});
  CHECK(optics::fresnel_sampling_ratio(g, 2e-6, 550e-9) < 1.0);
  optics::fresnel_propagate(g, 2e-6, 550e-9);
  CHECK(cap.messages.size() == 1);
}

TEST_CASE("intensity is the squared modulus") {
  ComplexField f(8, 8, 0.5e-6);
  for (size_t i = 0; i < f.data.size(); ++i) f.data[i] = std::polar(1.0, 0.1 * i);
  RealImage ones = optics::intensity(f);
  for (double v : ones.data) CHECK(v == doctest::Approx(1.0));

  ComplexField zero(8, 8, 0.5e-6);
  for (double v : optics::intensity(zero).data) CHECK(v == 0.0);

  ComplexField diag(8, 8, 0.5e-6, {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)});
  for (double v : optics::intensity(diag).data) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("quantum efficiency evaluates the sensitivity Gaussian") {
  optics::SensorChannel ch(550e-9, 50e-9);
  CHECK(optics::quantum_efficiency(550e-9, ch) == doctest::Approx(1.0));
  CHECK(optics::quantum_efficiency(600e-9, ch) == doctest::Approx(std::exp(-0.5)));
  CHECK(optics::quantum_efficiency(450e-9, ch) == doctest::Approx(std::exp(-2.0)));
}

TEST_CASE("sensor channel bounds are validated") {
  CHECK_THROWS_AS(optics::SensorChannel(300e-9, 50e-9), InvalidInput);
  CHECK_THROWS_AS(optics::SensorChannel(900e-9, 50e-9), InvalidInput);
  CHECK_THROWS_AS(optics::SensorChannel(550e-9, 0.0), InvalidInput);
}

TEST_CASE("widening sigma never lowers any efficiency") {
  optics::WavelengthGrid grid = optics::WavelengthGrid::visible_default();
  optics::SensorChannel narrow(550e-9, 30e-9), wide(550e-9, 80e-9);
  for (double lambda : grid.lambdas)
    CHECK(optics::quantum_efficiency(lambda, wide) >=
          optics::quantum_efficiency(lambda, narrow));
}

TEST_CASE("uniform object gives the mean efficiency as a flat image") {
  ComplexField f(16, 16, 0.5e-6, {1.0, 0.0});
  optics::SensorChannel ch(550e-9, 50e-9);
  optics::WavelengthGrid grid = optics::WavelengthGrid::visible_default();
  double expected = 0;
  for (double lambda : grid.lambdas) expected += optics::quantum_efficiency(lambda, ch);
  expected /= grid.count();
  RealImage img = optics::polychromatic_image(f, 1e-6, ch, grid);
  for (double v : img.data) CHECK(v == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("single wavelength grid reduces to the monochromatic image") {
  ComplexField f = random_phase_object(16, 17, 0.2);
  optics::SensorChannel ch(550e-9, 50e-9);
  optics::WavelengthGrid grid(550e-9, 6e-9, 1);
  RealImage poly = optics::polychromatic_image(f, 2e-6, ch, grid);
  RealImage mono = optics::intensity(optics::fresnel_propagate(f, 2e-6, 550e-9));
  for (size_t i = 0; i < poly.data.size(); ++i)
    CHECK(poly.data[i] ==
          doctest::Approx(optics::quantum_efficiency(550e-9, ch) * mono.data[i]).epsilon(1e-12));
}

TEST_CASE("polychromatic image matches a direct per-wavelength sum") {
  ComplexField f = random_phase_object(64, 19, 0.3);
  optics::SensorChannel ch(550e-9, 40e-9);
  optics::WavelengthGrid grid(400e-9, 6e-9, 51);
  RealImage img = optics::polychromatic_image(f, 2e-6, ch, grid);

  // independent reference: accumulate each monochromatic image explicitly
  RealImage ref(f.width, f.height, f.pitch);
  for (double lambda : grid.lambdas) {
    RealImage mono = optics::intensity(optics::fresnel_propagate(f, 2e-6, lambda));
    double q = optics::quantum_efficiency(lambda, ch);
    for (size_t i = 0; i < ref.data.size(); ++i) ref.data[i] += q * mono.data[i];
  }
  for (double& v : ref.data) v /= grid.count();

  for (size_t i = 0; i < img.data.size(); ++i) {
    CHECK(std::abs(img.data[i] - ref.data[i]) <= 1e-12 * std::abs(ref.data[i]) + 1e-15);
  }
}

TEST_CASE("weak phase objects reproduce the axial intensity law") {
  // centered difference of I around focus vs -(I0/k) lap(phi)
  const int n = 64;
  const double pitch = 0.5e-6, lambda = 550e-9, a = 0.2, z = 0.05e-6;
  const double k = 2.0 * std::numbers::pi / lambda;
  PhaseMap phi(n, n, pitch);
  double fx = 2.0 / (n * pitch);  // 2 cycles across the field
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      phi.at(x, y) = a * std::cos(2.0 * std::numbers::pi * fx * x * pitch);

  ComplexField obj = pure_phase_object(phi);
  RealImage ip = optics::intensity(optics::fresnel_propagate(obj, z, lambda));
  RealImage im = optics::intensity(optics::fresnel_propagate(obj, -z, lambda));

  double err2 = 0, ref2 = 0;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      double didz = (ip.at(x, y) - im.at(x, y)) / (2.0 * z);
      double lap = -a * std::pow(2.0 * std::numbers::pi * fx, 2) *
                   std::cos(2.0 * std::numbers::pi * fx * x * pitch);
      double predicted = -lap / k;  // I0 = 1
      err2 += (didz - predicted) * (didz - predicted);
      ref2 += predicted * predicted;
    }
  CHECK(std::sqrt(err2 / ref2) < 0.05);
}
