#include "mwcalib/image.hpp"

#include <algorithm>
#include <cmath>

#include "mwcalib/error.hpp"

namespace mwcalib {

Image::Image(int width, int height, std::array<std::uint8_t, 3> fill)
    : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "image dimensions must be positive");
  }
  data_.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < data_.size(); i += 3) {
    std::copy(fill.begin(), fill.end(), data_.begin() + static_cast<std::ptrdiff_t>(i));
  }
}

void Image::set(int x, int y, const Eigen::Vector3d& rgb) {
  std::uint8_t* p = pixel(x, y);
  for (int c = 0; c < 3; ++c) {
    p[c] = static_cast<std::uint8_t>(std::clamp(std::lround(rgb[c]), 0L, 255L));
  }
}

Eigen::Vector3d sample_bilinear(const Image& img, double x, double y, WrapMode mode) {
  const double fx = x - 0.5;
  const double fy = y - 0.5;
  const double x0f = std::floor(fx);
  const double y0f = std::floor(fy);
  const double ax = fx - x0f;
  const double ay = fy - y0f;
  const int w = img.width();
  const int h = img.height();
  auto col = [&](int i) {
    if (mode == WrapMode::kWrapX) {
      i %= w;
      return i < 0 ? i + w : i;
    }
    return std::clamp(i, 0, w - 1);
  };
  const int x0 = col(static_cast<int>(x0f));
  const int x1 = col(static_cast<int>(x0f) + 1);
  const int y0 = std::clamp(static_cast<int>(y0f), 0, h - 1);
  const int y1 = std::clamp(static_cast<int>(y0f) + 1, 0, h - 1);

  const std::uint8_t* p00 = img.pixel(x0, y0);
  const std::uint8_t* p10 = img.pixel(x1, y0);
  const std::uint8_t* p01 = img.pixel(x0, y1);
  const std::uint8_t* p11 = img.pixel(x1, y1);
  Eigen::Vector3d out;
  for (int c = 0; c < 3; ++c) {
    const double top = (1.0 - ax) * p00[c] + ax * p10[c];
    const double bottom = (1.0 - ax) * p01[c] + ax * p11[c];
    out[c] = (1.0 - ay) * top + ay * bottom;
  }
  return out;
}

}  // namespace mwcalib
