#pragma once

#include <string>
#include <vector>

#include "zmd/image.hpp"

namespace zmd::metrics {

/// Mean absolute error in radians after removing each map's mean (phase is
/// only defined up to an additive constant).
double mae(const RealImage& a, const RealImage& b);

/// Multi-scale structural similarity: 11x11 Gaussian window sigma=1.5,
/// power weights (0.0448, 0.2856, 0.3001, 0.2363, 0.1333), dyadic
/// downsampling. The dynamic range is the joint maximum after shifting both
/// inputs to non-negative. Too-small images reduce the level count with a
/// warning.
double ms_ssim(const RealImage& a, const RealImage& b, int levels = 5);

/// Single-scale SSIM mean over the valid window area.
double ssim(const RealImage& a, const RealImage& b);

struct SampleMetrics {
  std::string id;
  double ms_ssim = 0;  // clipped to [0, 1] for reporting
  double mae = 0;
};

struct MetricReport {
  std::vector<SampleMetrics> samples;
  double ms_ssim_mean = 0, ms_ssim_std = 0;
  double mae_mean = 0, mae_std = 0;

  void finalize();
  std::string to_csv() const;  // header + one row per sample
};

}  // namespace zmd::metrics
