#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "zmd/image.hpp"

namespace zmd::io {

/// Binary container: magic "ZMDT", u16 version, u8 dtype (f32=1, f64=2),
/// u8 ndim, ndim x u64 dims, then the little-endian payload. Metadata lives
/// in an optional JSON sidecar next to the file.
enum class Dtype : uint8_t { F32 = 1, F64 = 2 };

struct TensorData {
  std::vector<uint64_t> dims;
  Dtype dtype = Dtype::F64;
  std::vector<double> data;  // f32 payloads are widened on read

  uint64_t element_count() const {
    uint64_t n = 1;
    for (uint64_t d : dims) n *= d;
    return n;
  }
};

void write_tensor_stream(std::ostream& os, const TensorData& t);
TensorData read_tensor_stream(std::istream& is);

void write_tensor(const std::string& path, const TensorData& t);
TensorData read_tensor(const std::string& path);

/// Writes `text` to path + ".json".
void write_sidecar(const std::string& tensor_path, const std::string& text);

TensorData from_image(const RealImage& img, Dtype dtype = Dtype::F64);
RealImage to_image(const TensorData& t, double pitch);

}  // namespace zmd::io
