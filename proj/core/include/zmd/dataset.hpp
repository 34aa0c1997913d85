#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "zmd/image.hpp"
#include "zmd/optics.hpp"
#include "zmd/rng.hpp"

namespace zmd::dataset {

/// All stochastic ranges of the acquisition-simulation pipeline.
struct SimulationSpec {
  double phase_max = 3.5;                       // radians
  double z_min = 0.1e-6, z_max = 3e-6;          // meters
  optics::WavelengthGrid band = optics::WavelengthGrid::visible_default();
  std::array<double, 3> channel_centers = {630e-9, 550e-9, 450e-9};  // r, g, b
  double sigma_c_min = 10e-9, sigma_c_max = 100e-9;                  // meters
  double noise_sigma = 0.01;  // fraction of mean intensity
  double pitch = 0.5e-6;      // meters per pixel
  uint64_t seed = 0;
  bool fixed_z = false;       // when true, z is z_min for every sample
  int width = 64, height = 64;

  void validate() const {
    if (!(phase_max > 0)) throw InvalidInput("SimulationSpec: phase_max must be > 0");
    if (!(z_min > 0) || !(z_max >= z_min))
      throw InvalidInput("SimulationSpec: z_range must be ordered and positive");
    if (noise_sigma < 0) throw InvalidInput("SimulationSpec: noise_sigma must be >= 0");
    if (!(sigma_c_min > 0) || !(sigma_c_max >= sigma_c_min))
      throw InvalidInput("SimulationSpec: sigma_c range must be ordered and positive");
  }
};

/// One (acquisition, phase) training pair plus the draws that produced it.
struct Sample {
  std::array<RealImage, 3> x;  // simulated RGB acquisition, channel order r, g, b
  PhaseMap y;                  // ground-truth phase, radians
  double z = 0;                // meters
  std::array<double, 3> sigma_c_used = {0, 0, 0};
  uint64_t seed_used = 0;
};

/// Affine map of [min, max] onto [0, phase_max]; constant images map to 0.
PhaseMap phase_from_grayscale(const RealImage& image, double phase_max);

/// Adds i.i.d. Gaussian noise with std = sigma * mean(image); clamps at 0.
RealImage add_noise(const RealImage& image, double sigma, Rng& rng);

/// Full pipeline for one sample: draw z and per-channel sigma_c, build the
/// pure-phase object e^{i phi}, image each channel, add noise. All draws
/// come from rng in a fixed order.
Sample simulate_sample(const PhaseMap& phase, const SimulationSpec& spec, Rng& rng);

/// Corpus-free phase source: smooth filtered noise plus a few Gaussian
/// blobs, normalized to [0, 1].
RealImage procedural_grayscale(int width, int height, double pitch, Rng& rng);

}  // namespace zmd::dataset
