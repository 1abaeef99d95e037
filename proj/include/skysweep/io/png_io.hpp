#pragma once

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "skysweep/common/errors.hpp"
#include "skysweep/core/tensor.hpp"

namespace skysweep {

struct ImageU8 {
  int width = 0, height = 0;
  std::vector<std::uint8_t> rgb;  // H*W*3, row-major
};

namespace detail {

struct PngFile {
  std::FILE* fp = nullptr;
  explicit PngFile(const std::string& path, const char* mode) : fp(std::fopen(path.c_str(), mode)) {}
  ~PngFile() {
    if (fp) std::fclose(fp);
  }
  PngFile(const PngFile&) = delete;
  PngFile& operator=(const PngFile&) = delete;
};

}  // namespace detail

inline void write_png_rgb8(const std::string& path, const ImageU8& img) {
  if (img.width <= 0 || img.height <= 0 ||
      img.rgb.size() != static_cast<std::size_t>(img.width) * img.height * 3)
    throw contract_error("write_png_rgb8: inconsistent image buffer");
  detail::PngFile f(path, "wb");
  if (!f.fp) throw format_error("write_png_rgb8: cannot open " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw format_error("write_png_rgb8: libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw format_error("write_png_rgb8: encode failed for " + path);
  }
  png_init_io(png, f.fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
               static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y)
    png_write_row(png, const_cast<png_bytep>(img.rgb.data() +
                                             static_cast<std::size_t>(y) * img.width * 3));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

inline ImageU8 read_png_rgb8(const std::string& path) {
  detail::PngFile f(path, "rb");
  if (!f.fp) throw format_error("read_png_rgb8: cannot open " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw format_error("read_png_rgb8: libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw format_error("read_png_rgb8: decode failed for " + path);
  }
  png_init_io(png, f.fp);
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);
  if (png_get_channels(png, info) != 3 || png_get_bit_depth(png, info) != 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw format_error("read_png_rgb8: " + path + " did not normalize to 8-bit RGB");
  }
  ImageU8 img;
  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.rgb.resize(static_cast<std::size_t>(img.width) * img.height * 3);
  for (int y = 0; y < img.height; ++y)
    png_read_row(png, img.rgb.data() + static_cast<std::size_t>(y) * img.width * 3, nullptr);
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

inline void write_png_gray16(const std::string& path, int width, int height,
                             const std::vector<std::uint16_t>& gray) {
  if (width <= 0 || height <= 0 || gray.size() != static_cast<std::size_t>(width) * height)
    throw contract_error("write_png_gray16: inconsistent buffer");
  detail::PngFile f(path, "wb");
  if (!f.fp) throw format_error("write_png_gray16: cannot open " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw format_error("write_png_gray16: libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw format_error("write_png_gray16: encode failed for " + path);
  }
  png_init_io(png, f.fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 16,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_set_swap(png);  // buffers are host little-endian
  for (int y = 0; y < height; ++y)
    png_write_row(png, reinterpret_cast<png_bytep>(const_cast<std::uint16_t*>(
                           gray.data() + static_cast<std::size_t>(y) * width)));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

inline std::vector<std::uint16_t> read_png_gray16(const std::string& path, int& width,
                                                  int& height) {
  detail::PngFile f(path, "rb");
  if (!f.fp) throw format_error("read_png_gray16: cannot open " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw format_error("read_png_gray16: libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw format_error("read_png_gray16: decode failed for " + path);
  }
  png_init_io(png, f.fp);
  png_read_info(png, info);
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY ||
      png_get_bit_depth(png, info) != 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw format_error("read_png_gray16: " + path + " is not 16-bit grayscale");
  }
  png_set_swap(png);
  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  std::vector<std::uint16_t> gray(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y)
    png_read_row(png, reinterpret_cast<png_bytep>(gray.data() + static_cast<std::size_t>(y) * width),
                 nullptr);
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return gray;
}

// Depth encoding: 16-bit grayscale, value = round(depth_m * 100), 0 = invalid
// (range ceiling 655.35 m).
inline std::uint16_t depth_to_u16(double depth_m) {
  if (!std::isfinite(depth_m) || depth_m <= 0) return 0;
  const double scaled = std::round(depth_m * 100.0);
  if (scaled > 65535.0)
    throw format_error("depth_to_u16: depth " + std::to_string(depth_m) +
                       " m exceeds the 655.35 m encoding ceiling");
  return static_cast<std::uint16_t>(scaled);
}

inline double u16_to_depth(std::uint16_t v) { return v / 100.0; }

// Depth rasters are [H,W] float tensors with 0 marking invalid pixels.
inline void write_depth_png(const std::string& path, const Tensor<float>& depth) {
  if (depth.shape().rank != 2) throw contract_error("write_depth_png: depth must be [H,W]");
  const int h = depth.shape().extent[0];
  const int w = depth.shape().extent[1];
  std::vector<std::uint16_t> gray(static_cast<std::size_t>(h) * w);
  const float* d = depth.data();
  for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = depth_to_u16(d[i]);
  write_png_gray16(path, w, h, gray);
}

inline Tensor<float> read_depth_png(const std::string& path) {
  int w = 0, h = 0;
  const std::vector<std::uint16_t> gray = read_png_gray16(path, w, h);
  Tensor<float> depth = Tensor<float>::uninit({h, w});
  float* d = depth.data();
  for (std::size_t i = 0; i < gray.size(); ++i) d[i] = static_cast<float>(u16_to_depth(gray[i]));
  return depth;
}

// Network input: [3,H,W] in [0,1].
inline Tensor<float> image_to_tensor(const ImageU8& img) {
  Tensor<float> t = Tensor<float>::uninit({3, img.height, img.width});
  const std::int64_t plane = static_cast<std::int64_t>(img.height) * img.width;
  float* out = t.data();
  for (std::int64_t i = 0; i < plane; ++i)
    for (int ch = 0; ch < 3; ++ch)
      out[ch * plane + i] = img.rgb[static_cast<std::size_t>(i) * 3 + ch] / 255.0f;
  return t;
}

}  // namespace skysweep
