#pragma once

#include <png.h>

#include <cstdio>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace testutil {

// Fresh empty directory under the build tree's temp area.
inline std::filesystem::path temp_dir(const std::string& name) {
  static std::mt19937_64 rng{std::random_device{}()};
  auto dir = std::filesystem::temp_directory_path() / ("eoscript-test-" + name + "-" + std::to_string(rng() % 1000000000));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// 8-bit RGB PNG from row-major interleaved bytes.
inline void write_png(const std::filesystem::path& path, int width, int height, const std::vector<unsigned char>& rgb) {
  FILE* fp = std::fopen(path.string().c_str(), "wb");
  if (!fp) throw std::runtime_error("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw std::runtime_error("png write failed");
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int r = 0; r < height; ++r) {
    png_write_row(png, const_cast<png_bytep>(rgb.data() + static_cast<std::size_t>(r) * width * 3));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

// Uniform color image.
inline void write_solid_png(const std::filesystem::path& path, int width, int height, unsigned char r, unsigned char g,
                            unsigned char b) {
  std::vector<unsigned char> px;
  for (int i = 0; i < width * height; ++i) {
    px.push_back(r);
    px.push_back(g);
    px.push_back(b);
  }
  write_png(path, width, height, px);
}

}  // namespace testutil
