#include "zmd/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "zmd/fft.hpp"

namespace zmd::dataset {

PhaseMap phase_from_grayscale(const RealImage& image, double phase_max) {
  if (!image.finite()) throw InvalidInput("phase_from_grayscale: non-finite input");
  auto [mn_it, mx_it] = std::minmax_element(image.data.begin(), image.data.end());
  double mn = *mn_it, mx = *mx_it;
  PhaseMap phi(image.width, image.height, image.pitch);
  if (mx > mn) {
    double scale = phase_max / (mx - mn);
    for (size_t i = 0; i < image.data.size(); ++i)
      phi.data[i] = (image.data[i] - mn) * scale;
  }
  return phi;
}

RealImage add_noise(const RealImage& image, double sigma, Rng& rng) {
  if (sigma < 0) throw InvalidInput("add_noise: sigma must be >= 0");
  if (sigma == 0) return image;
  double std_dev = sigma * image.mean();
  RealImage out = image;
  for (double& v : out.data) v = std::max(0.0, v + std_dev * rng.normal());
  return out;
}

Sample simulate_sample(const PhaseMap& phase, const SimulationSpec& spec, Rng& rng) {
  spec.validate();
  Sample s;
  s.y = phase;
  s.z = spec.fixed_z ? spec.z_min : rng.uniform(spec.z_min, spec.z_max);
  for (int c = 0; c < 3; ++c)
    s.sigma_c_used[c] = rng.uniform(spec.sigma_c_min, spec.sigma_c_max);
  s.seed_used = spec.seed;

  ComplexField object = pure_phase_object(phase);
  object.pitch = phase.pitch;
  for (int c = 0; c < 3; ++c) {
    optics::SensorChannel chan(spec.channel_centers[c], s.sigma_c_used[c]);
    RealImage img = optics::polychromatic_image(object, s.z, chan, spec.band);
    s.x[c] = add_noise(img, spec.noise_sigma, rng);
  }
  return s;
}

RealImage procedural_grayscale(int width, int height, double pitch, Rng& rng) {
  int pw = fft::next_pow2(width), ph = fft::next_pow2(height);
  std::vector<fft::cd> buf(static_cast<size_t>(pw) * ph);
  for (auto& v : buf) v = {rng.normal(), 0.0};
  fft::transform2d(buf.data(), pw, ph, false);
  // low-pass so structures span ~16 pixels
  double cutoff = 1.0 / (16.0 * pitch);
  for (int y = 0; y < ph; ++y) {
    double fy = fft::freq(y, ph, pitch);
    for (int x = 0; x < pw; ++x) {
      double fx = fft::freq(x, pw, pitch);
      double f2 = fx * fx + fy * fy;
      buf[static_cast<size_t>(y) * pw + x] *= std::exp(-f2 / (2.0 * cutoff * cutoff));
    }
  }
  fft::transform2d(buf.data(), pw, ph, true);

  RealImage img(width, height, pitch);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      img.at(x, y) = buf[static_cast<size_t>(y) * pw + x].real();

  // a few soft blobs on top of the filtered-noise background
  int nblobs = 2 + static_cast<int>(rng.uniform() * 4);
  for (int b = 0; b < nblobs; ++b) {
    double cx = rng.uniform() * width, cy = rng.uniform() * height;
    double r = (0.05 + 0.15 * rng.uniform()) * std::min(width, height);
    double amp = 0.5 + rng.uniform();
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        img.at(x, y) += amp * std::exp(-d2 / (2.0 * r * r));
      }
  }

  auto [mn_it, mx_it] = std::minmax_element(img.data.begin(), img.data.end());
  double mn = *mn_it, mx = *mx_it;
  if (mx > mn)
    for (double& v : img.data) v = (v - mn) / (mx - mn);
  return img;
}

}  // namespace zmd::dataset
