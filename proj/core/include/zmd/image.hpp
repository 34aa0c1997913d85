#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace zmd {

/// Thrown when an input violates a documented precondition.
struct InvalidInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Real-valued 2D array on a regular grid. Depending on role it carries
/// intensity (non-negative, arbitrary linear units) or phase in radians.
struct RealImage {
  int width = 0;
  int height = 0;
  double pitch = 0.5e-6;  // meters per pixel
  std::vector<double> data;

  RealImage() = default;
  RealImage(int w, int h, double pitch_m, double fill = 0.0)
      : width(w), height(h), pitch(pitch_m),
        data(static_cast<size_t>(w) * h, fill) {
    if (w <= 0 || h <= 0) throw InvalidInput("RealImage: non-positive size");
    if (!(pitch_m > 0)) throw InvalidInput("RealImage: pitch must be > 0");
  }

  double& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
  double at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
  size_t size() const { return data.size(); }

  bool same_grid(const RealImage& o) const {
    return width == o.width && height == o.height;
  }
  bool finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }
  double mean() const {
    double s = 0;
    for (double v : data) s += v;
    return data.empty() ? 0.0 : s / static_cast<double>(data.size());
  }
  /// Subtracts the mean in place (gauge normalization for phase maps).
  void remove_mean() {
    double m = mean();
    for (double& v : data) v -= m;
  }
};

/// Phase maps are real images whose values are radians.
using PhaseMap = RealImage;

/// Sampled complex amplitude on a regular pixel grid with physical pitch.
struct ComplexField {
  int width = 0;
  int height = 0;
  double pitch = 0.5e-6;  // meters per pixel
  std::vector<std::complex<double>> data;

  ComplexField() = default;
  ComplexField(int w, int h, double pitch_m,
               std::complex<double> fill = {0.0, 0.0})
      : width(w), height(h), pitch(pitch_m),
        data(static_cast<size_t>(w) * h, fill) {
    if (w < 8 || h < 8) throw InvalidInput("ComplexField: sizes must be >= 8");
    if (!(pitch_m > 0)) throw InvalidInput("ComplexField: pitch must be > 0");
  }

  std::complex<double>& at(int x, int y) {
    return data[static_cast<size_t>(y) * width + x];
  }
  std::complex<double> at(int x, int y) const {
    return data[static_cast<size_t>(y) * width + x];
  }
  size_t size() const { return data.size(); }

  bool finite() const {
    for (const auto& v : data)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
  }
  /// Total power sum(|a|^2).
  double energy() const {
    double s = 0;
    for (const auto& v : data) s += std::norm(v);
    return s;
  }
};

/// Builds a unit-amplitude pure phase object e^{i phi}.
inline ComplexField pure_phase_object(const PhaseMap& phi) {
  ComplexField f(phi.width, phi.height, phi.pitch);
  for (size_t i = 0; i < phi.data.size(); ++i)
    f.data[i] = std::polar(1.0, phi.data[i]);
  return f;
}

}  // namespace zmd
