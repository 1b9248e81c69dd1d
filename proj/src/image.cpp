#include "omni/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <memory>
#include <cstdio>
#include <cstring>
#include <stdexcept>
#include <string>

#include <jpeglib.h>
#include <png.h>

namespace omni::img {

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

Image from_bytes(int w, int h, const std::vector<unsigned char>& bytes, int channels) {
  Image im;
  im.width = w;
  im.height = h;
  im.rgb.resize(static_cast<size_t>(w) * h * 3);
  for (size_t p = 0; p < static_cast<size_t>(w) * h; ++p)
    for (int c = 0; c < 3; ++c) {
      unsigned char v = channels == 1 ? bytes[p] : bytes[p * channels + c];
      im.rgb[p * 3 + c] = static_cast<float>(v) / 255.0f;
    }
  return im;
}

Image load_png(FILE* f, const std::filesystem::path& file) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info) throw std::runtime_error("png: allocation failed");
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("png: decode failed for " + file.string());
  }
  png_init_io(png, f);
  png_read_info(png, info);

  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);

  int w = static_cast<int>(png_get_image_width(png, info));
  int h = static_cast<int>(png_get_image_height(png, info));
  std::vector<unsigned char> bytes(static_cast<size_t>(w) * h * 3);
  std::vector<png_bytep> rows(static_cast<size_t>(h));
  for (int y = 0; y < h; ++y) rows[static_cast<size_t>(y)] = bytes.data() + static_cast<size_t>(y) * w * 3;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);
  return from_bytes(w, h, bytes, 3);
}

Image load_jpeg(FILE* f) {
  jpeg_decompress_struct cinfo;
  jpeg_error_mgr jerr;
  cinfo.err = jpeg_std_error(&jerr);
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, f);
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  int w = static_cast<int>(cinfo.output_width);
  int h = static_cast<int>(cinfo.output_height);
  std::vector<unsigned char> bytes(static_cast<size_t>(w) * h * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    unsigned char* row = bytes.data() + static_cast<size_t>(cinfo.output_scanline) * w * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return from_bytes(w, h, bytes, 3);
}

Image load_ppm(FILE* f, const std::filesystem::path& file) {
  auto next_token = [&]() {
    std::string tok;
    int c;
    while ((c = std::fgetc(f)) != EOF) {
      if (c == '#') {
        while ((c = std::fgetc(f)) != EOF && c != '\n') {
        }
        continue;
      }
      if (std::isspace(c)) {
        if (!tok.empty()) break;
        continue;
      }
      tok.push_back(static_cast<char>(c));
    }
    return tok;
  };
  if (next_token() != "P6") throw std::runtime_error("ppm: not P6: " + file.string());
  int w = std::stoi(next_token());
  int h = std::stoi(next_token());
  int maxval = std::stoi(next_token());
  if (maxval != 255) throw std::runtime_error("ppm: only maxval 255 supported");
  std::vector<unsigned char> bytes(static_cast<size_t>(w) * h * 3);
  if (std::fread(bytes.data(), 1, bytes.size(), f) != bytes.size())
    throw std::runtime_error("ppm: truncated pixel data in " + file.string());
  return from_bytes(w, h, bytes, 3);
}

}  // namespace

Image load_image(const std::filesystem::path& file) {
  FilePtr f(std::fopen(file.string().c_str(), "rb"));
  if (!f) throw std::runtime_error("image: cannot open " + file.string());
  unsigned char magic[2] = {0, 0};
  if (std::fread(magic, 1, 2, f.get()) != 2)
    throw std::runtime_error("image: unreadable file " + file.string());
  std::rewind(f.get());
  if (magic[0] == 0x89 && magic[1] == 'P') return load_png(f.get(), file);
  if (magic[0] == 0xff && magic[1] == 0xd8) return load_jpeg(f.get());
  if (magic[0] == 'P' && magic[1] == '6') return load_ppm(f.get(), file);
  throw std::runtime_error("image: unsupported format (want PNG, JPEG, or PPM): " + file.string());
}

void save_ppm(const std::filesystem::path& file, const Image& image) {
  FilePtr f(std::fopen(file.string().c_str(), "wb"));
  if (!f) throw std::runtime_error("image: cannot write " + file.string());
  std::fprintf(f.get(), "P6\n%d %d\n255\n", image.width, image.height);
  std::vector<unsigned char> bytes(image.rgb.size());
  for (size_t i = 0; i < bytes.size(); ++i) {
    float v = std::clamp(image.rgb[i], 0.0f, 1.0f);
    bytes[i] = static_cast<unsigned char>(v * 255.0f + 0.5f);
  }
  std::fwrite(bytes.data(), 1, bytes.size(), f.get());
}

Image crop(const Image& src, int x0, int y0, int w, int h) {
  if (x0 < 0 || y0 < 0 || x0 + w > src.width || y0 + h > src.height || w <= 0 || h <= 0)
    throw std::invalid_argument("crop: rectangle outside image");
  Image out;
  out.width = w;
  out.height = h;
  out.rgb.resize(static_cast<size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = src.at(x0 + x, y0 + y, c);
  return out;
}

Image resize_bilinear(const Image& src, int out_w, int out_h) {
  if (out_w <= 0 || out_h <= 0) throw std::invalid_argument("resize: non-positive target");
  Image out;
  out.width = out_w;
  out.height = out_h;
  out.rgb.resize(static_cast<size_t>(out_w) * out_h * 3);
  double sx = static_cast<double>(src.width) / out_w;
  double sy = static_cast<double>(src.height) / out_h;
  for (int y = 0; y < out_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    int y0 = static_cast<int>(std::floor(fy));
    double wy = fy - y0;
    int y0c = std::clamp(y0, 0, src.height - 1);
    int y1c = std::clamp(y0 + 1, 0, src.height - 1);
    for (int x = 0; x < out_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      int x0 = static_cast<int>(std::floor(fx));
      double wx = fx - x0;
      int x0c = std::clamp(x0, 0, src.width - 1);
      int x1c = std::clamp(x0 + 1, 0, src.width - 1);
      for (int c = 0; c < 3; ++c) {
        double top = src.at(x0c, y0c, c) * (1 - wx) + src.at(x1c, y0c, c) * wx;
        double bot = src.at(x0c, y1c, c) * (1 - wx) + src.at(x1c, y1c, c) * wx;
        out.at(x, y, c) = static_cast<float>(top * (1 - wy) + bot * wy);
      }
    }
  }
  return out;
}

}  // namespace omni::img
