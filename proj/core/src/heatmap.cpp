#include "mwcalib/heatmap.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mwcalib/error.hpp"

namespace mwcalib {

namespace {

constexpr double kLogFloor = 1e-10;

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Reflect-101 border (… 2 1 | 0 1 2 … n-1 | n-2 …).
int reflect(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    i = i < 0 ? -i : 2 * (n - 1) - i;
  }
  return i;
}

std::vector<double> blurred(const Heatmap& hm, double sigma) {
  const std::vector<double> k = gaussian_kernel(sigma);
  const int r = static_cast<int>(k.size() / 2);
  const int w = hm.width();
  const int h = hm.height();
  std::vector<double> tmp(static_cast<std::size_t>(w) * h, 0.0);
  std::vector<double> out(tmp.size(), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * hm.at(reflect(x + i, w), y);
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp[static_cast<std::size_t>(reflect(y + i, h)) * w + x];
      out[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  return out;
}

struct Peak {
  int x = 0;
  int y = 0;
  double value = -std::numeric_limits<double>::infinity();
};

Peak find_peak(const Heatmap& hm) {
  Peak p;
  for (int y = 0; y < hm.height(); ++y) {
    for (int x = 0; x < hm.width(); ++x) {
      if (hm.at(x, y) > p.value) p = {x, y, hm.at(x, y)};
    }
  }
  return p;
}

void put_u32(std::ostream& os, std::uint32_t v) {
  const std::array<char, 4> b = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                 static_cast<char>((v >> 16) & 0xff),
                                 static_cast<char>((v >> 24) & 0xff)};
  os.write(b.data(), 4);
}

std::uint32_t get_u32(std::istream& is) {
  std::array<unsigned char, 4> b{};
  is.read(reinterpret_cast<char*>(b.data()), 4);
  if (!is) throw Error(ErrorCode::kParse, "truncated heatmap file header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::span<const Label> label_order(std::size_t n) {
  if (n == kUsedLabels.size()) return kUsedLabels;
  if (n == kAllLabels.size()) return kAllLabels;
  std::ostringstream msg;
  msg << "heatmap file must hold 13 or 14 labels, got " << n;
  throw Error(ErrorCode::kParse, msg.str());
}

}  // namespace

Heatmap::Heatmap(int width, int height, int stride, Label label)
    : width_(width), height_(height), stride_(stride), label_(label) {
  if (width <= 0 || height <= 0 || stride <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "heatmap dimensions and stride must be positive");
  }
  scores_.assign(static_cast<std::size_t>(width) * height, 0.0);
}

Eigen::Vector2d Heatmap::to_cell(const Eigen::Vector2d& input_px) const {
  return input_px / stride_ - Eigen::Vector2d::Constant(0.5);
}

Eigen::Vector2d Heatmap::to_input(const Eigen::Vector2d& cell) const {
  return (cell + Eigen::Vector2d::Constant(0.5)) * stride_;
}

Heatmap encode(const Eigen::Vector2d& point_px, double sigma, const HeatmapGeometry& geo,
               Label label) {
  if (!(point_px.x() >= 0.0 && point_px.y() >= 0.0 && point_px.x() <= geo.input_w &&
        point_px.y() <= geo.input_h)) {
    std::ostringstream msg;
    msg << "point (" << point_px.x() << ", " << point_px.y() << ") outside the "
        << geo.input_w << "x" << geo.input_h << " raster";
    throw Error(ErrorCode::kInvalidArgument, msg.str());
  }
  if (!(sigma > 0.0)) throw Error(ErrorCode::kInvalidArgument, "sigma must be positive");
  Heatmap hm(geo.width(), geo.height(), geo.stride, label);
  const Eigen::Vector2d c = hm.to_cell(point_px);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (int y = 0; y < hm.height(); ++y) {
    for (int x = 0; x < hm.width(); ++x) {
      const double dx = x - c.x();
      const double dy = y - c.y();
      hm.at(x, y) = std::exp(-(dx * dx + dy * dy) * inv);
    }
  }
  return hm;
}

DecodedPoint decode_argmax(const Heatmap& hm, const DecodeOptions& options) {
  const Peak p = find_peak(hm);
  DecodedPoint out;
  out.score = p.value;
  if (!(p.value >= options.presence_threshold) || !std::isfinite(p.value)) return out;
  out.present = true;
  out.px = hm.to_input(Eigen::Vector2d(p.x, p.y));
  return out;
}

DecodedPoint decode_dark(const Heatmap& hm, const DecodeOptions& options) {
  DecodedPoint out = decode_argmax(hm, options);
  if (!out.present) return out;
  const Peak p = find_peak(hm);
  const int w = hm.width();
  const int h = hm.height();
  if (p.x < 1 || p.y < 1 || p.x > w - 2 || p.y > h - 2) return out;

  const std::vector<double> smooth =
      options.blur ? blurred(hm, options.blur_sigma)
                   : std::vector<double>(hm.scores().begin(), hm.scores().end());
  auto L = [&](int x, int y) {
    return std::log(std::max(smooth[static_cast<std::size_t>(y) * w + x], kLogFloor));
  };
  const double c = L(p.x, p.y);
  const double dx = 0.5 * (L(p.x + 1, p.y) - L(p.x - 1, p.y));
  const double dy = 0.5 * (L(p.x, p.y + 1) - L(p.x, p.y - 1));
  const double dxx = L(p.x + 1, p.y) - 2.0 * c + L(p.x - 1, p.y);
  const double dyy = L(p.x, p.y + 1) - 2.0 * c + L(p.x, p.y - 1);
  const double dxy = 0.25 * (L(p.x + 1, p.y + 1) - L(p.x - 1, p.y + 1) - L(p.x + 1, p.y - 1) +
                             L(p.x - 1, p.y - 1));
  const double det = dxx * dyy - dxy * dxy;
  // Newton step only where the log surface is locally concave.
  if (!(dxx < 0.0 && det > 1e-12) || !std::isfinite(det)) return out;
  Eigen::Vector2d step(-(dyy * dx - dxy * dy) / det, -(-dxy * dx + dxx * dy) / det);
  if (!step.allFinite()) return out;
  step = step.cwiseMax(-1.0).cwiseMin(1.0);
  out.px = hm.to_input(Eigen::Vector2d(p.x, p.y) + step);
  out.refined = true;
  return out;
}

Detections decode_all(std::span<const Heatmap> heatmaps, const DecodeOptions& options) {
  Detections out;
  for (const Heatmap& hm : heatmaps) {
    const DecodedPoint p = decode_dark(hm, options);
    if (p.present) out.push_back({hm.label(), p.px, p.score});
  }
  return out;
}

void write_heatmap_file(const std::filesystem::path& path, std::span<const Heatmap> heatmaps) {
  const std::span<const Label> order = label_order(heatmaps.size());
  const Heatmap& first = heatmaps.front();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  put_u32(os, static_cast<std::uint32_t>(heatmaps.size()));
  put_u32(os, static_cast<std::uint32_t>(first.height()));
  put_u32(os, static_cast<std::uint32_t>(first.width()));
  put_u32(os, static_cast<std::uint32_t>(first.stride()));
  for (std::size_t i = 0; i < heatmaps.size(); ++i) {
    const Heatmap& hm = heatmaps[i];
    if (hm.label() != order[i] || hm.width() != first.width() || hm.height() != first.height()) {
      throw Error(ErrorCode::kInvalidArgument, "heatmaps must share a shape and follow label order");
    }
    for (double v : hm.scores()) {
      put_u32(os, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  if (!os) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

std::vector<Heatmap> read_heatmap_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  const std::uint32_t n = get_u32(is);
  const std::uint32_t h = get_u32(is);
  const std::uint32_t w = get_u32(is);
  const std::uint32_t stride = get_u32(is);
  const std::span<const Label> order = label_order(n);
  if (h == 0 || w == 0 || stride == 0 || h > 1u << 14 || w > 1u << 14) {
    throw Error(ErrorCode::kParse, "implausible heatmap shape in " + path.string());
  }
  std::vector<Heatmap> out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    Heatmap hm(static_cast<int>(w), static_cast<int>(h), static_cast<int>(stride), order[i]);
    for (double& v : hm.scores()) {
      try {
        v = std::bit_cast<float>(get_u32(is));
      } catch (const Error&) {
        throw Error(ErrorCode::kParse, "truncated heatmap payload in " + path.string());
      }
      if (!std::isfinite(v)) throw Error(ErrorCode::kParse, "non-finite score in " + path.string());
    }
    out.push_back(std::move(hm));
  }
  return out;
}

}  // namespace mwcalib
