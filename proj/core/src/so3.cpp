#include "mwcalib/so3.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Geometry>

#include "mwcalib/error.hpp"

namespace mwcalib {

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;
constexpr double kRad = std::numbers::pi / 180.0;
constexpr double kGimbalCos = 1e-7;

QuaternionXYZW canonical(QuaternionXYZW q) {
  if (q.w() < 0.0) {
    q = -q;
  }
  return q;
}

double mean_abs_diff(const EulerPTR& a, const EulerPTR& b) {
  return (std::abs(wrap_deg(a.pan_deg - b.pan_deg)) + std::abs(wrap_deg(a.tilt_deg - b.tilt_deg)) +
          std::abs(wrap_deg(a.roll_deg - b.roll_deg))) /
         3.0;
}

}  // namespace

QuaternionXYZW rodrigues_to_quaternion(const Eigen::Vector3d& g) {
  const QuaternionXYZW q(g.x(), g.y(), g.z(), 1.0);
  return q / std::sqrt(q.dot(q));
}

Eigen::Matrix3d quaternion_to_matrix(const QuaternionXYZW& q) {
  const double norm = q.norm();
  if (!(std::abs(norm - 1.0) <= 1e-9)) {
    std::ostringstream msg;
    msg << "quaternion norm " << norm << " deviates from 1";
    throw Error(ErrorCode::kNonUnitQuaternion, msg.str());
  }
  const double ax = 2.0 * q.x() * q.x();
  const double ay = 2.0 * q.y() * q.y();
  const double az = 2.0 * q.z() * q.z();
  const double aw = 2.0 * q.w() * q.w();
  const double axy = 2.0 * q.x() * q.y();
  const double ayz = 2.0 * q.y() * q.z();
  const double azw = 2.0 * q.z() * q.w();
  const double awx = 2.0 * q.w() * q.x();
  const double axz = 2.0 * q.x() * q.z();
  const double ayw = 2.0 * q.y() * q.w();

  Eigen::Matrix3d r;
  r << aw + ax - 1.0, axy - azw, axz + ayw,
       axy + azw, aw + ay - 1.0, ayz - awx,
       axz - ayw, ayz + awx, aw + az - 1.0;
  return r;
}

Rotation Rotation::from_gibbs(const Eigen::Vector3d& g) {
  return from_quaternion(rodrigues_to_quaternion(g));
}

Rotation Rotation::from_quaternion(const QuaternionXYZW& q) {
  Rotation out;
  out.matrix_ = quaternion_to_matrix(q);
  out.quaternion_ = canonical(q);
  return out;
}

Rotation Rotation::from_matrix(const Eigen::Matrix3d& r) {
  const Eigen::Quaterniond eq(r);
  QuaternionXYZW q(eq.x(), eq.y(), eq.z(), eq.w());
  q.normalize();
  Rotation out;
  out.matrix_ = r;
  out.quaternion_ = canonical(q);
  return out;
}

Rotation Rotation::from_euler(const EulerPTR& e) { return from_matrix(compose(e)); }

Eigen::Vector3d Rotation::gibbs() const { return quaternion_.head<3>() / quaternion_.w(); }

double Rotation::angle_rad() const {
  return 2.0 * std::atan2(quaternion_.head<3>().norm(), std::abs(quaternion_.w()));
}

Eigen::Matrix3d rot_x(double rad) {
  const double c = std::cos(rad);
  const double s = std::sin(rad);
  Eigen::Matrix3d r;
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

Eigen::Matrix3d rot_y(double rad) {
  const double c = std::cos(rad);
  const double s = std::sin(rad);
  Eigen::Matrix3d r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

Eigen::Matrix3d rot_z(double rad) {
  const double c = std::cos(rad);
  const double s = std::sin(rad);
  Eigen::Matrix3d r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

Eigen::Matrix3d compose(const EulerPTR& e) {
  return rot_y(e.pan_deg * kRad) * rot_x(e.tilt_deg * kRad) * rot_z(e.roll_deg * kRad);
}

Decomposition decompose(const Eigen::Matrix3d& r, const std::optional<EulerPTR>& reference) {
  Decomposition out;
  const double tilt = std::asin(std::clamp(-r(1, 2), -1.0, 1.0));
  if (std::abs(std::cos(tilt)) < kGimbalCos) {
    out.gimbal_degenerate = true;
    out.angles = {std::atan2(-r(2, 0), r(0, 0)) * kDeg, tilt * kDeg, 0.0};
    return out;
  }
  const EulerPTR a{std::atan2(r(0, 2), r(2, 2)) * kDeg, tilt * kDeg,
                   std::atan2(r(1, 0), r(1, 1)) * kDeg};
  if (!reference) {
    out.angles = a;
    return out;
  }
  const EulerPTR b{wrap_deg(a.pan_deg + 180.0), wrap_deg(180.0 - a.tilt_deg),
                   wrap_deg(a.roll_deg + 180.0)};
  out.angles = mean_abs_diff(b, *reference) < mean_abs_diff(a, *reference) ? b : a;
  return out;
}

double geodesic_distance(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  const Eigen::Matrix3d d = a.transpose() * b;
  const Eigen::Vector3d axis(d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1));
  return std::atan2(0.5 * axis.norm(), 0.5 * (d.trace() - 1.0));
}

double wrap_deg(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w <= -180.0) {
    w += 360.0;
  } else if (w > 180.0) {
    w -= 360.0;
  }
  return w;
}

double& angle_ref(EulerPTR& e, EulerAngle which) {
  switch (which) {
    case EulerAngle::kPan: return e.pan_deg;
    case EulerAngle::kTilt: return e.tilt_deg;
    case EulerAngle::kRoll: return e.roll_deg;
  }
  return e.roll_deg;
}

double angle_of(const EulerPTR& e, EulerAngle which) {
  EulerPTR copy = e;
  return angle_ref(copy, which);
}

}  // namespace mwcalib
