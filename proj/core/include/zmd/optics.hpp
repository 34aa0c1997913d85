#pragma once

#include <functional>
#include <string>
#include <vector>

#include "zmd/image.hpp"

namespace zmd::optics {

/// Per-channel sensor sensitivity Gaussian.
struct SensorChannel {
  double lambda_c;  // meters, channel center
  double sigma_c;   // meters, sensitivity width

  SensorChannel(double lambda_center, double sigma) : lambda_c(lambda_center), sigma_c(sigma) {
    if (lambda_c < 350e-9 || lambda_c > 800e-9)
      throw InvalidInput("SensorChannel: lambda_c outside [350, 800] nm");
    if (!(sigma_c > 0)) throw InvalidInput("SensorChannel: sigma_c must be > 0");
  }
};

/// Uniform, strictly increasing wavelength discretization.
struct WavelengthGrid {
  std::vector<double> lambdas;  // meters
  double step;                  // meters

  WavelengthGrid(double start, double step_m, int count) : step(step_m) {
    if (count < 1) throw InvalidInput("WavelengthGrid: need at least 1 wavelength");
    if (!(step_m > 0)) throw InvalidInput("WavelengthGrid: step must be > 0");
    lambdas.reserve(count);
    for (int i = 0; i < count; ++i) lambdas.push_back(start + i * step_m);
  }

  /// Left-endpoint grid over [400, 700] nm with 6 nm intervals (50 terms).
  static WavelengthGrid visible_default() {
    return WavelengthGrid(400e-9, 6e-9, 50);
  }
  int count() const { return static_cast<int>(lambdas.size()); }
};

/// Warning sink for non-fatal diagnostics (aliasing etc.); default prints
/// to stderr. Tests may install a capture handler.
using WarnHandler = std::function<void(const std::string&)>;
void set_warn_handler(WarnHandler handler);
void warn(const std::string& message);

/// Fresnel sampling ratio lambda*|z| / (pitch^2 * N); > 1 means the
/// quadratic transfer-function phase aliases on this grid.
double fresnel_sampling_ratio(const ComplexField& field, double z, double lambda);

/// Paraxial free-space propagation over distance z (negative z
/// back-propagates), realized as the Fourier-domain transfer function
/// exp(ikz) exp(-i pi lambda z |u|^2). Unit modulus, so total power is
/// preserved. Non-power-of-two grids are zero-padded internally and
/// cropped on return.
ComplexField fresnel_propagate(const ComplexField& field, double z, double lambda);

/// Pixelwise |a|^2.
RealImage intensity(const ComplexField& field);

/// Q_c(lambda) = exp(-(lambda - lambda_c)^2 / (2 sigma_c^2)), in (0, 1].
double quantum_efficiency(double lambda, const SensorChannel& channel);

/// Single-channel polychromatic acquisition:
/// I_c(x; z) = (1/W) sum_i Q_c(lambda_i) I(x; z, lambda_i),
/// each term a coherent plane-wave Fresnel image.
RealImage polychromatic_image(const ComplexField& object, double z,
                              const SensorChannel& channel,
                              const WavelengthGrid& grid);

}  // namespace zmd::optics
