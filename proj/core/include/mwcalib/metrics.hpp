#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mwcalib/camera_model.hpp"
#include "mwcalib/image.hpp"
#include "mwcalib/keypoint.hpp"
#include "mwcalib/so3.hpp"

namespace mwcalib {

// 1/10 of a 56-cell heatmap height, in pixels; used both as the PCK radius and
// as the OKS per-keypoint scale s*k_i.
inline constexpr double kKeypointThresholdPx = 5.6;
inline constexpr int kDefaultRepeSamples = 1000;
inline constexpr double kPsnrCapDb = 99.0;

struct AngleErrors {
  double pan = 0.0;
  double tilt = 0.0;
  double roll = 0.0;
};

// Absolute per-angle error after choosing the prediction's Euler branch
// closest to the ground truth.
AngleErrors angle_errors(const Eigen::Matrix3d& pred, const EulerPTR& gt);

AngleErrors angle_mae(std::span<const EulerPTR> pred, std::span<const EulerPTR> gt);

struct CameraModel {
  CameraParams params;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
};

// Reprojection error (repo definition): n Fibonacci directions spread
// uniformly over the ground-truth visible cap are projected through both full
// models; returns the mean pixel distance over mutually visible samples.
double repe(const CameraModel& pred, const CameraModel& gt, int n_samples = kDefaultRepeSamples);

// Fraction of ground-truth points whose same-label detection lies within the
// threshold (inclusive). Missing detections count as misses.
double pck(const Detections& detections, const Detections& gt,
           double threshold_px = kKeypointThresholdPx);

// Mean over ground-truth points of exp(-d^2 / (2 sk^2)); missing -> 0.
double object_keypoint_similarity(const Detections& detections, const Detections& gt,
                                  double sk_px = kKeypointThresholdPx);

struct ApAr {
  double ap = 0.0, ap50 = 0.0, ap75 = 0.0;
  double ar = 0.0, ar50 = 0.0, ar75 = 0.0;
};

struct ImageKeypoints {
  Detections detections;
  Detections gt;
};

// COCO-style AP/AR with one instance per image over OKS thresholds
// 0.50:0.05:0.95 and 101-point interpolated precision. Detections with equal
// scores are ranked as one block so the result does not depend on image order.
ApAr oks_ap_ar(std::span<const ImageKeypoints> images, double sk_px = kKeypointThresholdPx);

double psnr(const Image& a, const Image& b);
double psnr(const Image& a, const Image& b, const Mask& mask);
// Mean SSIM over channels: 11x11 Gaussian window (sigma 1.5), C1 = (0.01*255)^2,
// C2 = (0.03*255)^2, valid-region filtering.
double ssim(const Image& a, const Image& b);

struct KeypointReport {
  ApAr ap_ar;
  double pck = 0.0;
  // Mean distance per label (kAllLabels order); nullopt when never matched.
  std::array<std::optional<double>, kNumLabels> mean_distance{};
  std::optional<double> mean_distance_vp;
  std::optional<double> mean_distance_adp;
  std::optional<double> mean_distance_all;
};

struct EvalReport {
  int total = 0;
  int successes = 0;
  double executable_rate = 0.0;  // percent
  AngleErrors angle_mae;
  double f_mae_mm = 0.0;
  double k1_mae = 0.0;
  std::optional<double> repe_px;
  int repe_failures = 0;
  KeypointReport keypoints;
  std::optional<double> psnr_db;
  std::optional<double> ssim;
};

struct ImageEvaluation {
  std::string id;
  CameraModel gt;
  EulerPTR gt_euler;
  Detections gt_keypoints;
  // Empty when the calibration failed for this image.
  std::optional<CameraModel> pred{};
  Detections detections{};
  std::optional<double> psnr_db{};
  std::optional<double> ssim{};
};

struct ImageRow {
  std::string id;
  bool success = false;
  AngleErrors angle;
  double f_err_mm = 0.0;
  double k1_err = 0.0;
  std::optional<double> repe_px;
  double pck = 0.0;
  double oks = 0.0;
};

// Associative accumulator: images can be scored on separate workers and the
// partial accumulators merged in any order.
class MetricAccumulator {
 public:
  ImageRow add(const ImageEvaluation& image, int repe_samples = kDefaultRepeSamples);
  void merge(const MetricAccumulator& other);
  EvalReport report() const;

 private:
  struct Sums {
    double pan = 0, tilt = 0, roll = 0, f = 0, k1 = 0, repe = 0;
  };
  int total_ = 0;
  int successes_ = 0;
  int repe_count_ = 0;
  int repe_failures_ = 0;
  int gt_points_ = 0;
  int correct_points_ = 0;
  Sums sums_;
  std::array<double, kNumLabels> dist_sum_{};
  std::array<int, kNumLabels> dist_count_{};
  std::vector<ImageKeypoints> keypoints_;
  double psnr_sum_ = 0.0;
  double ssim_sum_ = 0.0;
  int image_quality_count_ = 0;
};

}  // namespace mwcalib
