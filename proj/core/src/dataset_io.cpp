#include "zmd/dataset_io.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "zmd/tensor_io.hpp"

namespace zmd::io {

namespace {

constexpr char kMagic[4] = {'Z', 'M', 'D', 'S'};
constexpr uint16_t kVersion = 1;

void put_u64(std::ostream& os, uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}

uint64_t get_u64(std::istream& is, const char* what) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8))
    throw InvalidInput(std::string("dataset: truncated ") + what);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}

void put_f64(std::ostream& os, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(os, bits);
}

double get_f64(std::istream& is, const char* what) {
  uint64_t bits = get_u64(is, what);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void write_dataset(const std::string& path, const std::vector<dataset::Sample>& samples,
                   double pitch) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidInput("dataset: cannot open " + path + " for writing");
  os.write(kMagic, 4);
  char ver[2] = {static_cast<char>(kVersion & 0xff), static_cast<char>(kVersion >> 8)};
  os.write(ver, 2);
  put_u64(os, samples.size());
  put_f64(os, pitch);
  for (const auto& s : samples) {
    put_f64(os, s.z);
    for (double sc : s.sigma_c_used) put_f64(os, sc);
    put_u64(os, s.seed_used);

    TensorData x;
    x.dims = {3, static_cast<uint64_t>(s.y.height), static_cast<uint64_t>(s.y.width)};
    for (const auto& ch : s.x) {
      if (!ch.same_grid(s.y)) throw InvalidInput("dataset: channel/phase grid mismatch");
      x.data.insert(x.data.end(), ch.data.begin(), ch.data.end());
    }
    write_tensor_stream(os, x);
    write_tensor_stream(os, from_image(s.y));
  }
  if (!os) throw InvalidInput("dataset: write failed on " + path);
}

std::vector<dataset::Sample> read_dataset(const std::string& path, double* pitch_out) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidInput("dataset: cannot open " + path);
  char magic[4];
  if (!is.read(magic, 4)) throw InvalidInput("dataset: truncated header");
  if (std::memcmp(magic, kMagic, 4) != 0) throw InvalidInput("dataset: bad magic");
  unsigned char ver[2];
  if (!is.read(reinterpret_cast<char*>(ver), 2)) throw InvalidInput("dataset: truncated header");
  if ((ver[0] | ver[1] << 8) != kVersion) throw InvalidInput("dataset: unsupported version");
  uint64_t count = get_u64(is, "header");
  if (count > (1ull << 24)) throw InvalidInput("dataset: implausible sample count");
  double pitch = get_f64(is, "header");
  if (!(pitch > 0)) throw InvalidInput("dataset: bad pitch");
  if (pitch_out) *pitch_out = pitch;

  std::vector<dataset::Sample> samples(count);
  for (auto& s : samples) {
    s.z = get_f64(is, "sample record");
    for (double& sc : s.sigma_c_used) sc = get_f64(is, "sample record");
    s.seed_used = get_u64(is, "sample record");

    TensorData x = read_tensor_stream(is);
    if (x.dims.size() != 3 || x.dims[0] != 3)
      throw InvalidInput("dataset: acquisition tensor must be {3,H,W}");
    TensorData y = read_tensor_stream(is);
    if (y.dims.size() != 2 || y.dims[0] != x.dims[1] || y.dims[1] != x.dims[2])
      throw InvalidInput("dataset: phase tensor shape mismatch");

    int h = static_cast<int>(x.dims[1]), w = static_cast<int>(x.dims[2]);
    size_t hw = static_cast<size_t>(h) * w;
    for (int c = 0; c < 3; ++c) {
      s.x[c] = RealImage(w, h, pitch);
      std::copy(x.data.begin() + c * hw, x.data.begin() + (c + 1) * hw, s.x[c].data.begin());
    }
    s.y = to_image(y, pitch);
  }
  return samples;
}

}  // namespace zmd::io
