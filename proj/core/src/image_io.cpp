#include "zmd/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <vector>

#include <png.h>

namespace zmd::io {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

PngScale write_png16(const std::string& path, const RealImage& img) {
  if (!img.finite()) throw InvalidInput("write_png16: non-finite values");
  double lo = *std::min_element(img.data.begin(), img.data.end());
  double hi = *std::max_element(img.data.begin(), img.data.end());
  PngScale sc;
  sc.offset = lo;
  sc.scale = (hi > lo) ? (hi - lo) : 1.0;

  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw InvalidInput("write_png16: cannot open " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw InvalidInput("write_png16: libpng failure on " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, img.width, img.height, 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<unsigned char> row(static_cast<size_t>(img.width) * 2);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double v = (img.at(x, y) - sc.offset) / sc.scale;
      int code = static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 65535.0));
      row[2 * x] = static_cast<unsigned char>(code >> 8);  // network byte order
      row[2 * x + 1] = static_cast<unsigned char>(code & 0xff);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return sc;
}

RealImage read_png(const std::string& path, double pitch) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw InvalidInput("read_png: cannot open " + path);
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8))
    throw InvalidInput("read_png: not a PNG file: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw InvalidInput("read_png: libpng failure on " + path);
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  int depth = png_get_bit_depth(png, info);
  int color = png_get_color_type(png, info);

  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  depth = png_get_bit_depth(png, info);
  color = png_get_color_type(png, info);
  int channels = png_get_channels(png, info);
  double norm = depth == 16 ? 65535.0 : 255.0;

  std::vector<unsigned char> row(png_get_rowbytes(png, info));
  RealImage img(static_cast<int>(w), static_cast<int>(h), pitch);
  for (png_uint_32 y = 0; y < h; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (png_uint_32 x = 0; x < w; ++x) {
      double acc = 0;
      for (int c = 0; c < channels; ++c) {
        size_t i = (static_cast<size_t>(x) * channels + c) * (depth / 8);
        double v = depth == 16 ? (row[i] << 8 | row[i + 1]) : row[i];
        acc += v;
      }
      img.at(static_cast<int>(x), static_cast<int>(y)) = acc / channels / norm;
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

RealImage read_pgm(const std::string& path, double pitch) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("read_pgm: cannot open " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5") throw InvalidInput("read_pgm: not a binary PGM: " + path);
  auto next_token = [&in, &path]() {
    std::string tok;
    while (in >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      return tok;
    }
    throw InvalidInput("read_pgm: truncated header: " + path);
  };
  int w = std::stoi(next_token());
  int h = std::stoi(next_token());
  int maxval = std::stoi(next_token());
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
    throw InvalidInput("read_pgm: bad header: " + path);
  in.get();  // the single whitespace after maxval

  int bytes = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> buf(static_cast<size_t>(w) * h * bytes);
  if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
    throw InvalidInput("read_pgm: truncated pixel data: " + path);

  RealImage img(w, h, pitch);
  for (size_t p = 0; p < static_cast<size_t>(w) * h; ++p) {
    double v = bytes == 2 ? (buf[2 * p] << 8 | buf[2 * p + 1]) : buf[p];
    img.data[p] = v / maxval;
  }
  return img;
}

}  // namespace zmd::io
