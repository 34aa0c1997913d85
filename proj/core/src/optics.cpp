#include "zmd/optics.hpp"

#include <cmath>
#include <iostream>
#include <mutex>
#include <numbers>

#include "zmd/fft.hpp"

namespace zmd::optics {

namespace {

std::mutex g_warn_mutex;
WarnHandler g_warn_handler;

// Zero-pads to the next power of two in each dimension (no-op for pow2).
fft::cd* pad_to_pow2(const ComplexField& f, std::vector<fft::cd>& buf, int& pw, int& ph) {
  pw = fft::next_pow2(f.width);
  ph = fft::next_pow2(f.height);
  buf.assign(static_cast<size_t>(pw) * ph, {0.0, 0.0});
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x)
      buf[static_cast<size_t>(y) * pw + x] = f.at(x, y);
  return buf.data();
}

}  // namespace

void set_warn_handler(WarnHandler handler) {
  std::lock_guard lock(g_warn_mutex);
  g_warn_handler = std::move(handler);
}

void warn(const std::string& message) {
  std::lock_guard lock(g_warn_mutex);
  if (g_warn_handler)
    g_warn_handler(message);
  else
    std::cerr << "[zmd] warning: " << message << "\n";
}

double fresnel_sampling_ratio(const ComplexField& field, double z, double lambda) {
  int n = std::min(field.width, field.height);
  return lambda * std::abs(z) / (field.pitch * field.pitch * n);
}

ComplexField fresnel_propagate(const ComplexField& field, double z, double lambda) {
  if (!(lambda > 0)) throw InvalidInput("fresnel_propagate: lambda must be > 0");
  if (!field.finite()) throw InvalidInput("fresnel_propagate: non-finite field values");
  if (fresnel_sampling_ratio(field, z, lambda) > 1.0)
    warn("fresnel_propagate: sampling criterion exceeded (lambda*|z|/(pitch^2*N) > 1), "
         "transfer-function phase aliases");

  int pw, ph;
  std::vector<fft::cd> buf;
  pad_to_pow2(field, buf, pw, ph);
  fft::transform2d(buf.data(), pw, ph, false);

  const double k = 2.0 * std::numbers::pi / lambda;
  const fft::cd global = std::polar(1.0, k * z);
  for (int y = 0; y < ph; ++y) {
    double fy = fft::freq(y, ph, field.pitch);
    for (int x = 0; x < pw; ++x) {
      double fx = fft::freq(x, pw, field.pitch);
      double phase = -std::numbers::pi * lambda * z * (fx * fx + fy * fy);
      buf[static_cast<size_t>(y) * pw + x] *= global * std::polar(1.0, phase);
    }
  }
  fft::transform2d(buf.data(), pw, ph, true);

  ComplexField out(field.width, field.height, field.pitch);
  for (int y = 0; y < field.height; ++y)
    for (int x = 0; x < field.width; ++x)
      out.at(x, y) = buf[static_cast<size_t>(y) * pw + x];
  return out;
}

RealImage intensity(const ComplexField& field) {
  if (!field.finite()) throw InvalidInput("intensity: non-finite field values");
  RealImage img(field.width, field.height, field.pitch);
  for (size_t i = 0; i < field.data.size(); ++i) img.data[i] = std::norm(field.data[i]);
  return img;
}

double quantum_efficiency(double lambda, const SensorChannel& channel) {
  double d = lambda - channel.lambda_c;
  return std::exp(-d * d / (2.0 * channel.sigma_c * channel.sigma_c));
}

RealImage polychromatic_image(const ComplexField& object, double z,
                              const SensorChannel& channel,
                              const WavelengthGrid& grid) {
  if (grid.lambdas.empty()) throw InvalidInput("polychromatic_image: empty wavelength grid");
  RealImage acc(object.width, object.height, object.pitch);
  const double inv_w = 1.0 / grid.count();
  // Fixed-order sum over wavelengths keeps the reduction deterministic.
  for (double lambda : grid.lambdas) {
    RealImage mono = intensity(fresnel_propagate(object, z, lambda));
    double q = quantum_efficiency(lambda, channel);
    for (size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += inv_w * q * mono.data[i];
  }
  return acc;
}

}  // namespace zmd::optics
