#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

#include <Eigen/Core>

#include "mwcalib/camera_model.hpp"
#include "mwcalib/image.hpp"
#include "mwcalib/keypoint.hpp"
#include "mwcalib/so3.hpp"

namespace mwcalib {

using Rng = std::mt19937_64;

// Equirectangular mapping (W = 2H): longitude atan2(x, z) grows to the right
// with front at W/2; latitude asin(-y) is linear in rows with +90 deg at y = 0.
Eigen::Vector2d panorama_pixel(const Eigen::Vector3d& dir_world, int width, int height);
Eigen::Vector3d panorama_direction(const Eigen::Vector2d& px, int width, int height);

// Fisheye view of a panorama: backproject each output pixel, take it into the
// Manhattan frame with R^T and bilinearly sample. Pixels outside the image
// circle are black and masked out.
RemapResult render_fisheye(const Image& pano, const CameraParams& params,
                           const Eigen::Matrix3d& rotation, int jobs = 1);

struct GtKeypoints {
  Detections keypoints;
  // Rotation the labels are consistent with; differs from the input by a
  // 180 deg turn about Y_M when direction alignment fired.
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  bool alignment_applied = false;
};

// Projects all 14 directions, applies direction alignment to the visible
// label set, then keeps the visible 13 used labels (back is dropped).
GtKeypoints gt_keypoints(const CameraParams& params, const Eigen::Matrix3d& rotation);

struct GroundTruth {
  CameraParams params;
  EulerPTR euler;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Detections keypoints;
  bool alignment_applied = false;
};

GroundTruth make_ground_truth(const CameraParams& params, const EulerPTR& euler);

struct SamplingConfig {
  int image_w = 224;
  int image_h = 224;
  double eta_cap = kDefaultEtaCap;
  // Default focal range puts gamma(eta_cap) (at k1 = 0) between 0.5 and 1.2
  // times the 12 mm sensor half-height.
  double f_min_mm = 0.5 * 0.5 * kSensorHeightMm / kDefaultEtaCap;
  double f_max_mm = 1.2 * 0.5 * kSensorHeightMm / kDefaultEtaCap;
  double k1_min = -0.1;
  double k1_max = 0.1;
  double pan_min_deg = -90.0;
  double pan_max_deg = 90.0;
  double tilt_min_deg = -45.0;
  double tilt_max_deg = 45.0;
  double roll_min_deg = -45.0;
  double roll_max_deg = 45.0;

  void validate() const;
};

struct SampledCamera {
  CameraParams params;
  EulerPTR euler;
};

SampledCamera sample_params(Rng& rng, const SamplingConfig& config);

// Stand-in for the keypoint network: ground truth plus isotropic Gaussian
// pixel noise, independent dropout, score 1. Noisy points are pulled back
// onto the image circle and raster so they stay backprojectable.
Detections oracle_detect(const GroundTruth& gt, double noise_sigma_px, double dropout, Rng& rng);

enum class Face { kFront, kLeft, kRight, kTop, kBottom };

std::string_view face_name(Face face);
std::optional<Face> parse_face(std::string_view name);
Eigen::Vector3d face_direction(Face face);
// Maps face-frame rays (Z forward, Y down) into the Manhattan frame.
Eigen::Matrix3d face_rotation(Face face);

// Perspective (pinhole) view of one Manhattan face taken from a fisheye image.
// Throws kFaceOutOfFov when the face center is not visible.
RemapResult recover_image(const Image& fisheye, const CameraParams& params,
                          const Eigen::Matrix3d& rotation, Face face, double out_fov_deg,
                          int out_size);

// Direct pinhole view of a panorama; the reference recover_image is judged against.
Image render_pinhole(const Image& pano, Face face, double out_fov_deg, int out_size);

// Smooth procedural street-like panorama (2H x H), deterministic in seed.
Image procedural_panorama(int height, std::uint64_t seed);

}  // namespace mwcalib
