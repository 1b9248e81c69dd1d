#pragma once

#include <filesystem>
#include <vector>

namespace omni::img {

// 8-bit RGB decoded to floats in [0, 1], row-major, interleaved channels
struct Image {
  int width = 0;
  int height = 0;
  std::vector<float> rgb;  // width * height * 3

  float at(int x, int y, int c) const { return rgb[(static_cast<size_t>(y) * width + x) * 3 + c]; }
  float& at(int x, int y, int c) { return rgb[(static_cast<size_t>(y) * width + x) * 3 + c]; }
};

// PNG, JPEG, or binary PPM (P6), chosen by magic bytes
Image load_image(const std::filesystem::path& file);
void save_ppm(const std::filesystem::path& file, const Image& image);

Image crop(const Image& src, int x0, int y0, int w, int h);
Image resize_bilinear(const Image& src, int out_w, int out_h);

}  // namespace omni::img
