#pragma once

#include <string>

#include "zmd/image.hpp"

namespace zmd::io {

/// Writes a 16-bit grayscale PNG, min-max scaled. Returns {offset, scale}
/// such that value = offset + scale * code / 65535; callers record it in a
/// sidecar because the PNG is for visualization only.
struct PngScale {
  double offset = 0;
  double scale = 1;
};

PngScale write_png16(const std::string& path, const RealImage& img);

/// Reads an 8- or 16-bit grayscale (or RGB, converted by mean) PNG into
/// [0, 1].
RealImage read_png(const std::string& path, double pitch);

/// Plain binary PGM (P5), 8 or 16 bit, values scaled to [0, 1].
RealImage read_pgm(const std::string& path, double pitch);

}  // namespace zmd::io
