#pragma once

#include <optional>

#include <Eigen/Core>

namespace mwcalib {

// Quaternion stored as (x, y, z, w).
using QuaternionXYZW = Eigen::Vector4d;

// Pan/tilt/roll in degrees. The repo-wide convention is
//   R = R_Y(pan) * R_X(tilt) * R_Z(roll),
// where R maps Manhattan-frame directions into the camera frame.
struct EulerPTR {
  double pan_deg = 0.0;
  double tilt_deg = 0.0;
  double roll_deg = 0.0;

  friend bool operator==(const EulerPTR&, const EulerPTR&) = default;
};

enum class EulerAngle { kPan, kTilt, kRoll };

// Unit quaternion from a Gibbs (Rodrigues) vector: (g, 1) / sqrt(g.g + 1).
QuaternionXYZW rodrigues_to_quaternion(const Eigen::Vector3d& g);

// Rotation matrix built entry-by-entry from the doubled quaternion products.
// Throws kNonUnitQuaternion if | |q| - 1 | > 1e-9.
Eigen::Matrix3d quaternion_to_matrix(const QuaternionXYZW& q);

// One rotation carried in all three encodings. The quaternion is kept in the
// w >= 0 hemisphere so the Gibbs vector is q.xyz / q.w (infinite at 180 deg).
class Rotation {
 public:
  Rotation() = default;

  static Rotation from_gibbs(const Eigen::Vector3d& g);
  static Rotation from_quaternion(const QuaternionXYZW& q);
  static Rotation from_matrix(const Eigen::Matrix3d& r);
  static Rotation from_euler(const EulerPTR& e);

  const Eigen::Matrix3d& matrix() const { return matrix_; }
  const QuaternionXYZW& quaternion() const { return quaternion_; }
  Eigen::Vector3d gibbs() const;
  double angle_rad() const;

 private:
  Eigen::Matrix3d matrix_ = Eigen::Matrix3d::Identity();
  QuaternionXYZW quaternion_ = QuaternionXYZW(0.0, 0.0, 0.0, 1.0);
};

Eigen::Matrix3d rot_x(double rad);
Eigen::Matrix3d rot_y(double rad);
Eigen::Matrix3d rot_z(double rad);

Eigen::Matrix3d compose(const EulerPTR& e);

struct Decomposition {
  EulerPTR angles;
  bool gimbal_degenerate = false;
};

// Splits R into pan/tilt/roll. Of the two Euler branches, returns the one with
// the smallest mean absolute (wrapped) difference to `reference` when given,
// otherwise the branch with |tilt| <= 90. Near gimbal lock roll is set to 0
// and absorbed into pan.
Decomposition decompose(const Eigen::Matrix3d& r,
                        const std::optional<EulerPTR>& reference = std::nullopt);

// Angle of R_a^T R_b in radians.
double geodesic_distance(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b);

// Wraps degrees into (-180, 180].
double wrap_deg(double deg);

double& angle_ref(EulerPTR& e, EulerAngle which);
double angle_of(const EulerPTR& e, EulerAngle which);

}  // namespace mwcalib
