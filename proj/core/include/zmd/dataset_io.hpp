#pragma once

#include <string>
#include <vector>

#include "zmd/dataset.hpp"

namespace zmd::io {

/// Dataset container: magic "ZMDS", u16 version, u64 sample count, f64
/// pitch, then per sample a small binary record (z, sigma_c x3, seed) plus
/// two embedded tensors ({3,H,W} acquisition, {H,W} phase). Lossless f64
/// round trip.
void write_dataset(const std::string& path, const std::vector<dataset::Sample>& samples,
                   double pitch);
std::vector<dataset::Sample> read_dataset(const std::string& path, double* pitch_out = nullptr);

}  // namespace zmd::io
