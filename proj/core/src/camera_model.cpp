#include "mwcalib/camera_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mwcalib/error.hpp"

namespace mwcalib {

namespace {

constexpr double kEtaSlack = 1e-12;

double gamma_unchecked(double eta, double f_mm, double k1) {
  return f_mm * (eta + k1 * eta * eta * eta);
}

// Real root of k1*x^3 + x - c = 0 nearest the monotone branch starting at 0.
double cubic_seed(double c, double k1, double eta_max) {
  if (k1 == 0.0 || std::abs(k1) * eta_max * eta_max < 1e-8) {
    return c;
  }
  // Depressed cubic t^3 + p t + q = 0.
  const double p = 1.0 / k1;
  const double q = -c / k1;
  const double disc = 0.25 * q * q + p * p * p / 27.0;
  if (k1 > 0.0) {
    const double s = std::sqrt(disc);
    return std::cbrt(-0.5 * q + s) + std::cbrt(-0.5 * q - s);
  }
  if (disc > 0.0) {
    // Past the local maximum; caller has already range-checked c, so this
    // only happens through rounding right at eta_max.
    return eta_max;
  }
  const double m = 2.0 * std::sqrt(-p / 3.0);
  const double arg = std::clamp(1.5 * q / p * std::sqrt(-3.0 / p), -1.0, 1.0);
  const double phi = std::acos(arg) / 3.0;
  double best = eta_max;
  for (int k = 0; k < 3; ++k) {
    const double t = m * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0);
    if (t >= -1e-12 && t < best + 1e-9) {
      best = std::max(t, 0.0);
    }
  }
  return best;
}

}  // namespace

CameraParams CameraParams::create(double f_mm, double k1, int image_w, int image_h,
                                  double eta_cap) {
  if (!(f_mm > 0.0) || !std::isfinite(f_mm)) {
    throw Error(ErrorCode::kInvalidArgument, "focal length must be positive and finite");
  }
  if (!std::isfinite(k1)) {
    throw Error(ErrorCode::kInvalidArgument, "k1 must be finite");
  }
  if (image_w <= 0 || image_h <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "image size must be positive");
  }
  if (!(eta_cap > 0.0) || eta_cap >= std::numbers::pi) {
    throw Error(ErrorCode::kInvalidArgument, "eta_cap must lie in (0, pi)");
  }
  return CameraParams(f_mm, k1, image_w, image_h, eta_cap);
}

double CameraParams::eta_max() const { return fov_limit(k1_, eta_cap_); }

double CameraParams::max_radius_px() const {
  return gamma_unchecked(eta_max(), f_mm_, k1_) / pixel_pitch();
}

bool CameraParams::in_raster(const Eigen::Vector2d& px) const {
  return px.x() >= 0.0 && px.y() >= 0.0 && px.x() <= image_w_ && px.y() <= image_h_;
}

bool CameraParams::in_image_circle(const Eigen::Vector2d& px) const {
  return (px - principal_point()).norm() <= max_radius_px();
}

double fov_limit(double k1, double eta_cap) {
  if (k1 >= 0.0) {
    return eta_cap;
  }
  return std::min(eta_cap, std::sqrt(-1.0 / (3.0 * k1)));
}

double gamma(double eta, double f_mm, double k1, double eta_cap) {
  const double eta_max = fov_limit(k1, eta_cap);
  if (!(eta >= -kEtaSlack && eta <= eta_max + kEtaSlack)) {
    std::ostringstream msg;
    msg << "incident angle " << eta << " outside [0, " << eta_max << "]";
    throw Error(ErrorCode::kDomain, msg.str());
  }
  return gamma_unchecked(std::clamp(eta, 0.0, eta_max), f_mm, k1);
}

double inverse_gamma(double r_mm, double f_mm, double k1, double eta_cap) {
  if (!(f_mm > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "focal length must be positive");
  }
  const double eta_max = fov_limit(k1, eta_cap);
  const double r_max = gamma_unchecked(eta_max, f_mm, k1);
  if (!std::isfinite(r_mm) || r_mm < 0.0 || r_mm > r_max * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "radius " << r_mm << " mm outside monotone range [0, " << r_max << "]";
    throw Error(ErrorCode::kNoRoot, msg.str());
  }
  const double c = std::min(r_mm, r_max) / f_mm;
  double eta = std::clamp(cubic_seed(c, k1, eta_max), 0.0, eta_max);
  for (int it = 0; it < 30; ++it) {
    const double slope = 1.0 + 3.0 * k1 * eta * eta;
    if (!(slope > 0.0)) {
      break;
    }
    const double step = (k1 * eta * eta * eta + eta - c) / slope;
    eta = std::clamp(eta - step, 0.0, eta_max);
    if (std::abs(step) < 1e-15) {
      break;
    }
  }
  return eta;
}

Projection project(const Eigen::Vector3d& dir_world, const CameraParams& params,
                   const Extrinsics& ext) {
  Projection out;
  const Eigen::Vector3d ray = ext.rotation * dir_world;
  const double rho = std::hypot(ray.x(), ray.y());
  out.eta = std::atan2(rho, ray.z());
  if (out.eta > params.eta_max()) {
    out.px.setConstant(std::numeric_limits<double>::quiet_NaN());
    return out;
  }
  const double radius_px =
      gamma_unchecked(out.eta, params.f_mm(), params.k1()) / params.pixel_pitch();
  out.px = params.principal_point();
  if (rho > 0.0) {
    out.px += radius_px * Eigen::Vector2d(ray.x() / rho, ray.y() / rho);
  }
  out.visible = params.in_raster(out.px);
  return out;
}

Eigen::Vector3d backproject(const Eigen::Vector2d& px, const CameraParams& params) {
  const Eigen::Vector2d d = px - params.principal_point();
  const double rr = d.norm();
  double eta = 0.0;
  try {
    eta = inverse_gamma(rr * params.pixel_pitch(), params.f_mm(), params.k1(), params.eta_cap());
  } catch (const Error& e) {
    std::ostringstream msg;
    msg << "pixel (" << px.x() << ", " << px.y() << ") lies outside the image circle of radius "
        << params.max_radius_px() << " px";
    throw Error(ErrorCode::kOutOfFov, msg.str());
  }
  if (rr == 0.0) {
    return Eigen::Vector3d::UnitZ();
  }
  const double s = std::sin(eta);
  return {s * d.x() / rr, s * d.y() / rr, std::cos(eta)};
}

}  // namespace mwcalib
