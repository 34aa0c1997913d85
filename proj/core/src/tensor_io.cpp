#include "zmd/tensor_io.hpp"

#include <cstring>
#include <fstream>
#include <limits>

namespace zmd::io {

namespace {

constexpr char kMagic[4] = {'Z', 'M', 'D', 'T'};
constexpr uint16_t kVersion = 1;
constexpr uint8_t kMaxNdim = 8;

void put_u16(std::ostream& os, uint16_t v) {
  char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  os.write(b, 2);
}

void put_u64(std::ostream& os, uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}

uint16_t get_u16(std::istream& is) {
  unsigned char b[2];
  if (!is.read(reinterpret_cast<char*>(b), 2))
    throw InvalidInput("tensor: truncated header");
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8))
    throw InvalidInput("tensor: truncated header");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void write_tensor_stream(std::ostream& os, const TensorData& t) {
  if (t.dims.empty() || t.dims.size() > kMaxNdim)
    throw InvalidInput("tensor: ndim must be in [1,8]");
  if (t.element_count() != t.data.size())
    throw InvalidInput("tensor: dims do not match the data length");
  os.write(kMagic, 4);
  put_u16(os, kVersion);
  os.put(static_cast<char>(t.dtype));
  os.put(static_cast<char>(t.dims.size()));
  for (uint64_t d : t.dims) put_u64(os, d);
  if (t.dtype == Dtype::F64) {
    static_assert(std::numeric_limits<double>::is_iec559);
    os.write(reinterpret_cast<const char*>(t.data.data()),
             static_cast<std::streamsize>(t.data.size() * sizeof(double)));
  } else {
    std::vector<float> f(t.data.begin(), t.data.end());
    os.write(reinterpret_cast<const char*>(f.data()),
             static_cast<std::streamsize>(f.size() * sizeof(float)));
  }
  if (!os) throw InvalidInput("tensor: write failed");
}

TensorData read_tensor_stream(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4)) throw InvalidInput("tensor: truncated header");
  if (std::memcmp(magic, kMagic, 4) != 0) throw InvalidInput("tensor: bad magic");
  uint16_t version = get_u16(is);
  if (version != kVersion) throw InvalidInput("tensor: unsupported version");
  int dtype_code = is.get();
  int ndim = is.get();
  if (dtype_code == EOF || ndim == EOF) throw InvalidInput("tensor: truncated header");
  if (dtype_code != 1 && dtype_code != 2) throw InvalidInput("tensor: unknown dtype code");
  if (ndim < 1 || ndim > kMaxNdim) throw InvalidInput("tensor: bad ndim");

  TensorData t;
  t.dtype = static_cast<Dtype>(dtype_code);
  t.dims.resize(ndim);
  uint64_t n = 1;
  for (int i = 0; i < ndim; ++i) {
    t.dims[i] = get_u64(is);
    if (t.dims[i] == 0 || t.dims[i] > (1ull << 32))
      throw InvalidInput("tensor: implausible dimension");
    n *= t.dims[i];
  }
  if (n > (1ull << 32)) throw InvalidInput("tensor: implausible element count");
  t.data.resize(n);
  if (t.dtype == Dtype::F64) {
    if (!is.read(reinterpret_cast<char*>(t.data.data()),
                 static_cast<std::streamsize>(n * sizeof(double))))
      throw InvalidInput("tensor: truncated payload");
  } else {
    std::vector<float> f(n);
    if (!is.read(reinterpret_cast<char*>(f.data()),
                 static_cast<std::streamsize>(n * sizeof(float))))
      throw InvalidInput("tensor: truncated payload");
    for (uint64_t i = 0; i < n; ++i) t.data[i] = f[i];
  }
  return t;
}

void write_tensor(const std::string& path, const TensorData& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidInput("tensor: cannot open " + path + " for writing");
  write_tensor_stream(os, t);
}

TensorData read_tensor(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidInput("tensor: cannot open " + path);
  return read_tensor_stream(is);
}

void write_sidecar(const std::string& tensor_path, const std::string& text) {
  std::ofstream os(tensor_path + ".json", std::ios::binary);
  if (!os) throw InvalidInput("tensor: cannot write sidecar for " + tensor_path);
  os << text;
}

TensorData from_image(const RealImage& img, Dtype dtype) {
  TensorData t;
  t.dtype = dtype;
  t.dims = {static_cast<uint64_t>(img.height), static_cast<uint64_t>(img.width)};
  t.data = img.data;
  return t;
}

RealImage to_image(const TensorData& t, double pitch) {
  if (t.dims.size() != 2) throw InvalidInput("tensor: expected a 2-D tensor for an image");
  RealImage img(static_cast<int>(t.dims[1]), static_cast<int>(t.dims[0]), pitch);
  img.data = t.data;
  return img;
}

}  // namespace zmd::io
