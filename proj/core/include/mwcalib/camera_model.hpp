#pragma once

#include <numbers>

#include <Eigen/Core>

namespace mwcalib {

inline constexpr double kSensorHeightMm = 24.0;
// Half field of view of a 195 degree fisheye.
inline constexpr double kDefaultEtaCap = 97.5 * std::numbers::pi / 180.0;

// Intrinsics of the radially symmetric generic camera model
//   gamma = f * (eta + k1 * eta^3).
// Pixel pitch is square and derived from the fixed 24 mm sensor height; the
// principal point is the image center. Pixel (i, j) covers [i, i+1) x [j, j+1),
// so the center of the raster is (w/2, h/2) in continuous coordinates.
class CameraParams {
 public:
  static CameraParams create(double f_mm, double k1, int image_w, int image_h,
                             double eta_cap = kDefaultEtaCap);

  double f_mm() const { return f_mm_; }
  double k1() const { return k1_; }
  int image_w() const { return image_w_; }
  int image_h() const { return image_h_; }
  double eta_cap() const { return eta_cap_; }

  double pixel_pitch() const { return kSensorHeightMm / image_h_; }
  double d_u() const { return pixel_pitch(); }
  double d_v() const { return pixel_pitch(); }
  double c_u() const { return 0.5 * image_w_; }
  double c_v() const { return 0.5 * image_h_; }
  Eigen::Vector2d principal_point() const { return {c_u(), c_v()}; }

  // Largest incident angle on which the model is monotone (capped).
  double eta_max() const;
  // Image-circle radius in pixels, i.e. gamma(eta_max) / pitch.
  double max_radius_px() const;

  bool in_raster(const Eigen::Vector2d& px) const;
  bool in_image_circle(const Eigen::Vector2d& px) const;

  friend bool operator==(const CameraParams&, const CameraParams&) = default;

 private:
  CameraParams(double f_mm, double k1, int w, int h, double eta_cap)
      : f_mm_(f_mm), k1_(k1), image_w_(w), image_h_(h), eta_cap_(eta_cap) {}

  double f_mm_;
  double k1_;
  int image_w_;
  int image_h_;
  double eta_cap_;
};

// Translation is fixed to zero; only the rotation (world -> camera) varies.
struct Extrinsics {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();

  Eigen::Vector3d translation() const { return Eigen::Vector3d::Zero(); }
};

struct Projection {
  Eigen::Vector2d px = Eigen::Vector2d::Zero();
  double eta = 0.0;
  bool visible = false;
};

double fov_limit(double k1, double eta_cap = kDefaultEtaCap);

double gamma(double eta, double f_mm, double k1, double eta_cap = kDefaultEtaCap);

// Inverts gamma on [0, eta_max]: Cardano / trigonometric root of
// k1*eta^3 + eta - r/f = 0, then Newton polish.
double inverse_gamma(double r_mm, double f_mm, double k1, double eta_cap = kDefaultEtaCap);

// Camera axes: X right, Y down, Z forward. The ray is rotation * dir_world.
Projection project(const Eigen::Vector3d& dir_world, const CameraParams& params,
                   const Extrinsics& ext = {});

// Unit ray in camera coordinates for a pixel (identity extrinsics).
Eigen::Vector3d backproject(const Eigen::Vector2d& px, const CameraParams& params);

}  // namespace mwcalib
