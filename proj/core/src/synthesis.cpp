#include "mwcalib/synthesis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mwcalib/error.hpp"
#include "mwcalib/parallel.hpp"

namespace mwcalib {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::Matrix3d half_turn_y() { return Eigen::Vector3d(-1.0, 1.0, -1.0).asDiagonal(); }

void check_panorama(const Image& pano) {
  if (pano.empty() || pano.width() != 2 * pano.height()) {
    throw Error(ErrorCode::kInvalidArgument, "panorama must be equirectangular with W = 2H");
  }
}

void check_range(double lo, double hi, const char* name) {
  if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    std::ostringstream msg;
    msg << name << " range [" << lo << ", " << hi << "] is empty";
    throw Error(ErrorCode::kEmptyRange, msg.str());
  }
}

double uniform(Rng& rng, double lo, double hi) {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double smoothstep(double e0, double e1, double x) {
  const double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

Eigen::Vector3d pinhole_ray(int i, int j, int size, double focal_px) {
  const double half = 0.5 * size;
  return Eigen::Vector3d((i + 0.5 - half) / focal_px, (j + 0.5 - half) / focal_px, 1.0)
      .normalized();
}

bool taps_inside(const Eigen::Vector2d& px, const CameraParams& params) {
  const int x0 = static_cast<int>(std::floor(px.x() - 0.5));
  const int y0 = static_cast<int>(std::floor(px.y() - 0.5));
  for (int dy = 0; dy <= 1; ++dy) {
    for (int dx = 0; dx <= 1; ++dx) {
      const int x = x0 + dx;
      const int y = y0 + dy;
      if (x < 0 || y < 0 || x >= params.image_w() || y >= params.image_h()) return false;
      if (!params.in_image_circle({x + 0.5, y + 0.5})) return false;
    }
  }
  return true;
}

}  // namespace

Eigen::Vector2d panorama_pixel(const Eigen::Vector3d& d, int width, int height) {
  const double lon = std::atan2(d.x(), d.z());
  const double lat = std::asin(std::clamp(-d.y() / d.norm(), -1.0, 1.0));
  return {(lon / (2.0 * kPi) + 0.5) * width, (0.5 - lat / kPi) * height};
}

Eigen::Vector3d panorama_direction(const Eigen::Vector2d& px, int width, int height) {
  const double lon = (px.x() / width - 0.5) * 2.0 * kPi;
  const double lat = (0.5 - px.y() / height) * kPi;
  return {std::cos(lat) * std::sin(lon), -std::sin(lat), std::cos(lat) * std::cos(lon)};
}

RemapResult render_fisheye(const Image& pano, const CameraParams& params,
                           const Eigen::Matrix3d& rotation, int jobs) {
  check_panorama(pano);
  const int w = params.image_w();
  const int h = params.image_h();
  RemapResult out{Image(w, h), Mask(static_cast<std::size_t>(w) * h, 0)};
  const Eigen::Matrix3d to_world = rotation.transpose();
  parallel_for(static_cast<std::size_t>(h), jobs, [&](std::size_t row) {
    const int y = static_cast<int>(row);
    for (int x = 0; x < w; ++x) {
      const Eigen::Vector2d px(x + 0.5, y + 0.5);
      if (!params.in_image_circle(px)) continue;
      const Eigen::Vector3d world = to_world * backproject(px, params);
      const Eigen::Vector2d pp = panorama_pixel(world, pano.width(), pano.height());
      out.image.set(x, y, sample_bilinear(pano, pp.x(), pp.y(), WrapMode::kWrapX));
      out.mask[static_cast<std::size_t>(y) * w + x] = 1;
    }
  });
  return out;
}

GtKeypoints gt_keypoints(const CameraParams& params, const Eigen::Matrix3d& rotation) {
  LabelSet visible;
  for (Label l : kAllLabels) {
    if (project(direction_of(l), params, {rotation}).visible) visible.insert(l);
  }
  GtKeypoints out;
  out.alignment_applied = alignment_required(visible);
  out.rotation = out.alignment_applied ? Eigen::Matrix3d(rotation * half_turn_y()) : rotation;
  for (Label l : kUsedLabels) {
    const Projection p = project(direction_of(l), params, {out.rotation});
    if (p.visible) out.keypoints.push_back({l, p.px, 1.0});
  }
  return out;
}

GroundTruth make_ground_truth(const CameraParams& params, const EulerPTR& euler) {
  GtKeypoints kp = gt_keypoints(params, compose(euler));
  GroundTruth gt{params, euler, kp.rotation, std::move(kp.keypoints), kp.alignment_applied};
  if (gt.alignment_applied) {
    gt.euler = decompose(gt.rotation).angles;
  }
  return gt;
}

void SamplingConfig::validate() const {
  if (image_w <= 0 || image_h <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "image size must be positive");
  }
  check_range(f_min_mm, f_max_mm, "focal length");
  if (!(f_min_mm > 0.0)) throw Error(ErrorCode::kInvalidArgument, "focal length must be positive");
  check_range(k1_min, k1_max, "k1");
  check_range(pan_min_deg, pan_max_deg, "pan");
  check_range(tilt_min_deg, tilt_max_deg, "tilt");
  check_range(roll_min_deg, roll_max_deg, "roll");
}

SampledCamera sample_params(Rng& rng, const SamplingConfig& c) {
  c.validate();
  const double f = uniform(rng, c.f_min_mm, c.f_max_mm);
  const double k1 = uniform(rng, c.k1_min, c.k1_max);
  EulerPTR e;
  e.pan_deg = uniform(rng, c.pan_min_deg, c.pan_max_deg);
  e.tilt_deg = uniform(rng, c.tilt_min_deg, c.tilt_max_deg);
  e.roll_deg = uniform(rng, c.roll_min_deg, c.roll_max_deg);
  return {CameraParams::create(f, k1, c.image_w, c.image_h, c.eta_cap), e};
}

Detections oracle_detect(const GroundTruth& gt, double noise_sigma_px, double dropout, Rng& rng) {
  if (!(noise_sigma_px >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "noise sigma must be >= 0");
  if (!(dropout >= 0.0 && dropout <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "dropout must lie in [0, 1]");
  }
  const CameraParams& p = gt.params;
  const Eigen::Vector2d center = p.principal_point();
  const double max_r = p.max_radius_px() * (1.0 - 1e-9);
  Detections out;
  for (const Detection& kp : gt.keypoints) {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    // Unit draws scaled by sigma.
    std::normal_distribution<double> n(0.0, 1.0);
    const double nx = n(rng);
    const double ny = n(rng);
    const Eigen::Vector2d noise = noise_sigma_px * Eigen::Vector2d(nx, ny);
    if (u < dropout) continue;
    Eigen::Vector2d px = kp.px + noise;
    const Eigen::Vector2d off = px - center;
    if (off.norm() > max_r) px = center + off * (max_r / off.norm());
    px.x() = std::clamp(px.x(), 0.0, static_cast<double>(p.image_w()));
    px.y() = std::clamp(px.y(), 0.0, static_cast<double>(p.image_h()));
    out.push_back({kp.label, px, 1.0});
  }
  return out;
}

std::string_view face_name(Face face) {
  switch (face) {
    case Face::kFront: return "front";
    case Face::kLeft: return "left";
    case Face::kRight: return "right";
    case Face::kTop: return "top";
    case Face::kBottom: return "bottom";
  }
  return "front";
}

std::optional<Face> parse_face(std::string_view name) {
  for (Face f : {Face::kFront, Face::kLeft, Face::kRight, Face::kTop, Face::kBottom}) {
    const std::string_view ref = face_name(f);
    if (ref.size() == name.size() &&
        std::equal(ref.begin(), ref.end(), name.begin(), [](char a, char b) {
          return a == std::tolower(static_cast<unsigned char>(b));
        })) {
      return f;
    }
  }
  return std::nullopt;
}

Eigen::Matrix3d face_rotation(Face face) {
  switch (face) {
    case Face::kFront: return Eigen::Matrix3d::Identity();
    case Face::kLeft: return rot_y(-0.5 * kPi);
    case Face::kRight: return rot_y(0.5 * kPi);
    case Face::kTop: return rot_x(0.5 * kPi);
    case Face::kBottom: return rot_x(-0.5 * kPi);
  }
  return Eigen::Matrix3d::Identity();
}

Eigen::Vector3d face_direction(Face face) { return face_rotation(face).col(2); }

RemapResult recover_image(const Image& fisheye, const CameraParams& params,
                          const Eigen::Matrix3d& rotation, Face face, double out_fov_deg,
                          int out_size) {
  if (fisheye.width() != params.image_w() || fisheye.height() != params.image_h()) {
    throw Error(ErrorCode::kDimensionMismatch, "fisheye raster does not match camera params");
  }
  if (!(out_fov_deg > 0.0 && out_fov_deg < 180.0) || out_size <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "output fov must lie in (0, 180) and size be positive");
  }
  const Projection center = project(face_direction(face), params, {rotation});
  if (!(center.eta <= params.eta_max())) {
    std::ostringstream msg;
    msg << "face '" << face_name(face) << "' is " << center.eta * 180.0 / kPi
        << " deg off-axis, beyond the " << params.eta_max() * 180.0 / kPi << " deg limit";
    throw Error(ErrorCode::kFaceOutOfFov, msg.str());
  }
  const double focal_px = 0.5 * out_size / std::tan(0.5 * out_fov_deg * kPi / 180.0);
  const Eigen::Matrix3d to_camera = rotation * face_rotation(face);
  RemapResult out{Image(out_size, out_size),
                  Mask(static_cast<std::size_t>(out_size) * out_size, 0)};
  for (int j = 0; j < out_size; ++j) {
    for (int i = 0; i < out_size; ++i) {
      const Eigen::Vector3d ray = to_camera * pinhole_ray(i, j, out_size, focal_px);
      const Projection p = project(ray, params);
      if (!p.visible || !taps_inside(p.px, params)) continue;
      out.image.set(i, j, sample_bilinear(fisheye, p.px.x(), p.px.y()));
      out.mask[static_cast<std::size_t>(j) * out_size + i] = 1;
    }
  }
  return out;
}

Image render_pinhole(const Image& pano, Face face, double out_fov_deg, int out_size) {
  check_panorama(pano);
  const double focal_px = 0.5 * out_size / std::tan(0.5 * out_fov_deg * kPi / 180.0);
  const Eigen::Matrix3d to_world = face_rotation(face);
  Image out(out_size, out_size);
  for (int j = 0; j < out_size; ++j) {
    for (int i = 0; i < out_size; ++i) {
      const Eigen::Vector3d world = to_world * pinhole_ray(i, j, out_size, focal_px);
      const Eigen::Vector2d pp = panorama_pixel(world, pano.width(), pano.height());
      out.set(i, j, sample_bilinear(pano, pp.x(), pp.y(), WrapMode::kWrapX));
    }
  }
  return out;
}

Image procedural_panorama(int height, std::uint64_t seed) {
  if (height <= 0) throw Error(ErrorCode::kInvalidArgument, "panorama height must be positive");
  Rng rng(seed);
  struct Wave {
    Eigen::Vector3d axis;
    double freq;
    double phase;
    Eigen::Vector3d amp;
  };
  std::vector<Wave> waves;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int k = 0; k < 8; ++k) {
    Wave w;
    w.axis = Eigen::Vector3d(normal(rng), normal(rng), normal(rng)).normalized();
    w.freq = uniform(rng, 2.0, 7.0);
    w.phase = uniform(rng, 0.0, 2.0 * kPi);
    w.amp = Eigen::Vector3d(uniform(rng, -35, 35), uniform(rng, -35, 35), uniform(rng, -35, 35));
    waves.push_back(w);
  }
  // Facade bands along the longitude with soft edges.
  const int n_bands = 6 + static_cast<int>(rng() % 5);
  std::vector<double> band_tint;
  for (int b = 0; b < n_bands; ++b) band_tint.push_back(uniform(rng, -40.0, 40.0));

  const Eigen::Vector3d sky(135, 180, 230);
  const Eigen::Vector3d facade(150, 130, 110);
  const Eigen::Vector3d ground(90, 90, 95);
  const int width = 2 * height;
  Image pano(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Eigen::Vector3d d = panorama_direction({x + 0.5, y + 0.5}, width, height);
      const double lat = std::asin(std::clamp(-d.y(), -1.0, 1.0)) * 180.0 / kPi;
      const double lon = std::atan2(d.x(), d.z());
      const double band_pos = (lon / (2.0 * kPi) + 0.5) * n_bands;
      const int band = std::min(n_bands - 1, static_cast<int>(band_pos));
      const double skyline = 25.0 + 10.0 * std::sin(3.0 * lon);
      Eigen::Vector3d c = ground;
      c = c + smoothstep(-12.0, 0.0, lat) * (facade + Eigen::Vector3d::Constant(band_tint[band]) - c);
      c = c + smoothstep(skyline - 6.0, skyline + 6.0, lat) * (sky - c);
      for (const Wave& w : waves) c += w.amp * std::cos(w.freq * w.axis.dot(d) + w.phase);
      pano.set(x, y, c);
    }
  }
  return pano;
}

}  // namespace mwcalib
