#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "mwcalib/keypoint.hpp"
#include "mwcalib/manhattan_frame.hpp"

namespace mwcalib {

// 224 x 224 crop at stride 4 gives 56 x 56 heatmaps; the 5.6 px keypoint
// threshold used by the metrics is 1/10 of that heatmap height.
struct HeatmapGeometry {
  int input_w = 224;
  int input_h = 224;
  int stride = 4;

  int width() const { return input_w / stride; }
  int height() const { return input_h / stride; }
};

inline constexpr double kDefaultHeatmapSigma = 2.0;

// Heatmap cell (i, j) is centered on input pixel ((i + 0.5) * stride,
// (j + 0.5) * stride).
class Heatmap {
 public:
  Heatmap(int width, int height, int stride, Label label);

  int width() const { return width_; }
  int height() const { return height_; }
  int stride() const { return stride_; }
  Label label() const { return label_; }

  double& at(int x, int y) { return scores_[static_cast<std::size_t>(y) * width_ + x]; }
  double at(int x, int y) const { return scores_[static_cast<std::size_t>(y) * width_ + x]; }
  std::span<const double> scores() const { return scores_; }
  std::span<double> scores() { return scores_; }

  Eigen::Vector2d to_cell(const Eigen::Vector2d& input_px) const;
  Eigen::Vector2d to_input(const Eigen::Vector2d& cell) const;

 private:
  int width_;
  int height_;
  int stride_;
  Label label_;
  std::vector<double> scores_;
};

// Unnormalized 2D Gaussian with peak 1 at the point (sigma in heatmap cells).
Heatmap encode(const Eigen::Vector2d& point_px, double sigma, const HeatmapGeometry& geometry,
               Label label = Label::kFront);

struct DecodeOptions {
  double presence_threshold = 0.3;
  bool blur = true;
  double blur_sigma = kDefaultHeatmapSigma;
};

struct DecodedPoint {
  Eigen::Vector2d px = Eigen::Vector2d::Zero();
  double score = 0.0;
  bool present = false;
  // false when the log-Taylor step was skipped (border peak, non-finite or
  // non-concave neighbourhood) and the plain argmax is returned.
  bool refined = false;
};

DecodedPoint decode_argmax(const Heatmap& hm, const DecodeOptions& options = {});

// Argmax followed by one Newton step on the (optionally blurred) log heatmap.
DecodedPoint decode_dark(const Heatmap& hm, const DecodeOptions& options = {});

Detections decode_all(std::span<const Heatmap> heatmaps, const DecodeOptions& options = {});

// Raw heatmap file: four little-endian uint32 (n_labels, H, W, stride)
// followed by n_labels * H * W little-endian float32, row-major per label.
// n_labels == 13 uses kUsedLabels order, 14 uses kAllLabels order.
void write_heatmap_file(const std::filesystem::path& path, std::span<const Heatmap> heatmaps);
std::vector<Heatmap> read_heatmap_file(const std::filesystem::path& path);

}  // namespace mwcalib
