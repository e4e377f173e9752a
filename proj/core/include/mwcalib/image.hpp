#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

namespace mwcalib {

// 8-bit interleaved RGB raster with value semantics.
class Image {
 public:
  Image() = default;
  Image(int width, int height, std::array<std::uint8_t, 3> fill = {0, 0, 0});

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }

  std::uint8_t* pixel(int x, int y) { return &data_[offset(x, y)]; }
  const std::uint8_t* pixel(int x, int y) const { return &data_[offset(x, y)]; }
  std::vector<std::uint8_t>& data() { return data_; }
  const std::vector<std::uint8_t>& data() const { return data_; }

  void set(int x, int y, const Eigen::Vector3d& rgb);

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t offset(int x, int y) const {
    return (static_cast<std::size_t>(y) * width_ + x) * 3;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

enum class WrapMode { kClamp, kWrapX };

// Bilinear sample at continuous coordinates where pixel (i, j) is centered on
// (i + 0.5, j + 0.5). Returns RGB in [0, 255] as doubles.
Eigen::Vector3d sample_bilinear(const Image& img, double x, double y, WrapMode mode = WrapMode::kClamp);

// Per-pixel validity for remapped rasters (1 = rendered from source data).
using Mask = std::vector<std::uint8_t>;

struct RemapResult {
  Image image;
  Mask mask;
};

// PNG / JPEG via OpenCV imgcodecs. Grayscale and alpha inputs become RGB.
Image read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const Image& img);

}  // namespace mwcalib
