#include "mwcalib/rotation_estimation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "mwcalib/error.hpp"

namespace mwcalib {

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;
constexpr double kParallelTol = 1e-6;

double weight_at(std::span<const double> weights, std::size_t i) {
  return weights.empty() ? 1.0 : weights[i];
}

void check_weights(std::span<const Correspondence> c, std::span<const double> w) {
  if (!w.empty() && w.size() != c.size()) {
    throw Error(ErrorCode::kLengthMismatch, "weights and correspondences differ in length");
  }
  for (double x : w) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw Error(ErrorCode::kInvalidArgument, "weights must be finite and non-negative");
    }
  }
}

struct NormalSystem {
  Eigen::Matrix3d lhs = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
};

NormalSystem normal_system(std::span<const Correspondence> corrs, std::span<const double> weights) {
  // Residual d - g x s = d + [s]x g, so the normal equations are
  //   sum w ( |s|^2 I - s s^T ) g = sum w s x d.
  NormalSystem sys;
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    const double w = weight_at(weights, i);
    const Eigen::Vector3d s = corrs[i].observed + corrs[i].reference;
    const Eigen::Vector3d d = corrs[i].observed - corrs[i].reference;
    sys.lhs += w * (s.squaredNorm() * Eigen::Matrix3d::Identity() - s * s.transpose());
    sys.rhs += w * s.cross(d);
  }
  return sys;
}

double condition_of(const Eigen::Matrix3d& m) {
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(m, Eigen::EigenvaluesOnly);
  const Eigen::Vector3d ev = eig.eigenvalues();
  if (!(ev(0) > 0.0)) return std::numeric_limits<double>::infinity();
  return ev(2) / ev(0);
}

Eigen::Matrix3d axis_rotation(int axis, double rad) {
  switch (axis) {
    case 0: return rot_x(rad);
    case 1: return rot_y(rad);
    default: return rot_z(rad);
  }
}

// R = rot(outer, alpha) * rot(inner, beta); the third Euler angle is zero.
struct TwoAngleForm {
  EulerAngle zeroed;
  int outer_axis;
  EulerAngle outer_angle;
  int inner_axis;
  EulerAngle inner_angle;
};

constexpr std::array<TwoAngleForm, 3> kForms = {{
    {EulerAngle::kRoll, 1, EulerAngle::kPan, 0, EulerAngle::kTilt},
    {EulerAngle::kTilt, 1, EulerAngle::kPan, 2, EulerAngle::kRoll},
    {EulerAngle::kPan, 0, EulerAngle::kTilt, 2, EulerAngle::kRoll},
}};

const TwoAngleForm& form_for(EulerAngle zeroed) {
  for (const TwoAngleForm& f : kForms) {
    if (f.zeroed == zeroed) return f;
  }
  return kForms[0];
}

// Solves rot(outer, alpha) * rot(inner, beta) * m = o. The outer rotation
// preserves the component along its axis, which fixes beta up to two
// solutions; alpha then closes the remaining gap.
std::optional<EulerPTR> solve_two_angle(const TwoAngleForm& form, const Eigen::Vector3d& m,
                                        const Eigen::Vector3d& o) {
  const Eigen::Vector3d a = Eigen::Vector3d::Unit(form.outer_axis);
  const Eigen::Vector3d b = Eigen::Vector3d::Unit(form.inner_axis);
  const double ca = m.dot(a);
  const double cb = b.cross(m).dot(a);
  const double rho = std::hypot(ca, cb);
  const double target = o.dot(a);
  if (rho < 1e-9 || std::abs(target) > rho * (1.0 + 1e-12)) {
    return std::nullopt;
  }
  const double delta = std::atan2(cb, ca);
  const double spread = std::acos(std::clamp(target / rho, -1.0, 1.0));

  std::optional<EulerPTR> best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (double beta : {delta + spread, delta - spread}) {
    const Eigen::Vector3d w = axis_rotation(form.inner_axis, beta) * m;
    const double alpha = std::atan2(a.dot(w.cross(o)), w.dot(o) - w.dot(a) * o.dot(a));
    EulerPTR e;
    angle_ref(e, form.outer_angle) = wrap_deg(alpha * kDeg);
    angle_ref(e, form.inner_angle) = wrap_deg(beta * kDeg);
    const double cost = std::abs(e.pan_deg) + std::abs(e.tilt_deg) + std::abs(e.roll_deg);
    if (cost < best_cost) {
      best_cost = cost;
      best = e;
    }
  }
  return best;
}

// Unit vector orthogonal to v with maximal Z component; ties (v along Z)
// resolve toward +X.
Eigen::Vector3d temporal_direction(const Eigen::Vector3d& v) {
  Eigen::Vector3d t = Eigen::Vector3d::UnitZ() - v.z() * v;
  if (t.norm() < 1e-9) {
    t = Eigen::Vector3d::UnitX() - v.x() * v;
  }
  return t.normalized();
}

std::vector<EulerAngle> zeroing_order(const Eigen::Vector3d& m) {
  // Angle about the axis nearest the reference first, then roll, tilt, pan.
  const Eigen::Vector3d c = m.cwiseAbs();
  std::vector<EulerAngle> order;
  if (c.z() > c.x() + 1e-9 && c.z() > c.y() + 1e-9) {
    order.push_back(EulerAngle::kRoll);
  } else if (c.x() > c.y() + 1e-9 && c.x() > c.z() + 1e-9) {
    order.push_back(EulerAngle::kTilt);
  } else if (c.y() > c.x() + 1e-9 && c.y() > c.z() + 1e-9) {
    order.push_back(EulerAngle::kPan);
  }
  for (EulerAngle e : {EulerAngle::kRoll, EulerAngle::kTilt, EulerAngle::kPan}) {
    if (std::find(order.begin(), order.end(), e) == order.end()) order.push_back(e);
  }
  return order;
}

Correspondence cross_pair(const Correspondence& a, const Correspondence& b) {
  const Eigen::Vector3d co = a.observed.cross(b.observed);
  const Eigen::Vector3d cr = a.reference.cross(b.reference);
  if (co.norm() < kParallelTol || cr.norm() < kParallelTol) {
    throw Error(ErrorCode::kNearParallel,
                "the two points are (anti)parallel; cross product is undefined");
  }
  return {co.normalized(), cr.normalized()};
}

}  // namespace

double olae_condition_number(std::span<const Correspondence> corrs,
                             std::span<const double> weights) {
  check_weights(corrs, weights);
  return condition_of(normal_system(corrs, weights).lhs);
}

OlaeSolution olae_fit(std::span<const Correspondence> corrs, std::span<const double> weights) {
  check_weights(corrs, weights);
  if (corrs.size() < 2) {
    throw Error(ErrorCode::kIllConditioned, "at least two correspondences are required");
  }
  const NormalSystem sys = normal_system(corrs, weights);
  OlaeSolution sol;
  sol.condition_number = condition_of(sys.lhs);
  if (!(sol.condition_number <= kMaxOlaeCondition)) {
    std::ostringstream msg;
    msg << "normal matrix condition number " << sol.condition_number << " exceeds "
        << kMaxOlaeCondition;
    throw Error(ErrorCode::kIllConditioned, msg.str());
  }
  sol.gibbs = sys.lhs.inverse() * sys.rhs;
  return sol;
}

Eigen::Matrix3d procrustes_fit(std::span<const Correspondence> corrs,
                               std::span<const double> weights) {
  check_weights(corrs, weights);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    cov += weight_at(weights, i) * corrs[i].observed * corrs[i].reference.transpose();
  }
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()(1) < 1e-12) {
    throw Error(ErrorCode::kIllConditioned, "correspondences span fewer than two axes");
  }
  Eigen::Matrix3d fix = Eigen::Matrix3d::Identity();
  fix(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return svd.matrixU() * fix * svd.matrixV().transpose();
}

std::string_view to_string(DegenerateCase c) {
  switch (c) {
    case DegenerateCase::kNone: return "none";
    case DegenerateCase::kTwoPoints: return "two_points";
    case DegenerateCase::kOnePoint: return "one_point";
    case DegenerateCase::kNoPoints: return "no_points";
  }
  return "none";
}

Augmented augment_degenerate(std::span<const Correspondence> corrs) {
  Augmented out;
  out.correspondences.assign(corrs.begin(), corrs.end());
  switch (corrs.size()) {
    case 0:
      out.degenerate_case = DegenerateCase::kNoPoints;
      out.identity = true;
      return out;
    case 1: {
      out.degenerate_case = DegenerateCase::kOnePoint;
      const Eigen::Vector3d& m = corrs[0].reference;
      const Eigen::Vector3d& o = corrs[0].observed;
      for (EulerAngle zeroed : zeroing_order(m)) {
        if (auto e = solve_two_angle(form_for(zeroed), m, o)) {
          out.zeroed_angle = zeroed;
          out.constrained = *e;
          break;
        }
      }
      if (!out.constrained) {
        // Unreachable for unit vectors: at least one form always has a root.
        throw Error(ErrorCode::kIllConditioned, "no constrained single-point solution");
      }
      const Eigen::Vector3d t_ref = temporal_direction(m);
      const Correspondence temporal{compose(*out.constrained) * t_ref, t_ref};
      out.correspondences.push_back(temporal);
      out.correspondences.push_back(cross_pair(corrs[0], temporal));
      return out;
    }
    case 2:
      out.degenerate_case = DegenerateCase::kTwoPoints;
      out.correspondences.push_back(cross_pair(corrs[0], corrs[1]));
      return out;
    default:
      return out;
  }
}

RotationEstimate estimate_rotation(std::span<const Detection> detections,
                                   const CameraParams& params, const EstimateOptions& options) {
  // Keep the best-scoring detection per label.
  std::map<Label, const Detection*> by_label;
  for (const Detection& d : detections) {
    if (!(d.score >= options.min_score)) continue;
    auto [it, inserted] = by_label.try_emplace(d.label, &d);
    if (!inserted && d.score > it->second->score) it->second = &d;
  }

  RotationEstimate est;
  RotationDiagnostics& diag = est.diagnostics;
  diag.num_detections = static_cast<int>(by_label.size());

  std::vector<Correspondence> corrs;
  std::vector<const Detection*> used;
  LabelSet labels;
  for (const auto& [label, det] : by_label) {
    Eigen::Vector3d ray;
    try {
      ray = backproject(det->px, params);
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << "detection '" << label_name(label) << "' at (" << det->px.x() << ", " << det->px.y()
          << "): " << e.what();
      throw Error(e.code(), msg.str());
    }
    corrs.push_back({ray, direction_of(label)});
    used.push_back(det);
    labels.insert(label);
  }
  diag.unique_axes = count_unique_axes(labels);

  if (diag.unique_axes == 1 && corrs.size() == 2) {
    // An antipodal pair carries one axis only; keep the stronger point.
    const std::size_t keep = used[1]->score > used[0]->score ? 1 : 0;
    corrs = {corrs[keep]};
  }

  const Augmented aug = augment_degenerate(corrs);
  diag.degenerate_case = aug.degenerate_case;
  diag.zeroed_angle = aug.zeroed_angle;
  if (aug.identity) {
    diag.undetermined = true;
    return est;
  }

  diag.condition_number = olae_condition_number(aug.correspondences);
  Rotation rot;
  try {
    rot = Rotation::from_gibbs(olae_fit(aug.correspondences).gibbs);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kIllConditioned) throw;
    rot = Rotation::from_matrix(procrustes_fit(aug.correspondences));
    diag.procrustes_fallback = true;
  }

  const Decomposition dec = decompose(rot.matrix(), aug.constrained);
  diag.gimbal_degenerate = dec.gimbal_degenerate;
  est.euler = dec.angles;
  if (aug.zeroed_angle) {
    angle_ref(est.euler, *aug.zeroed_angle) = 0.0;
    est.rotation = Rotation::from_euler(est.euler);
  } else {
    est.rotation = rot;
  }
  return est;
}

LabelSet label_set(const Detections& detections) {
  LabelSet s;
  for (const Detection& d : detections) s.insert(d.label);
  return s;
}

}  // namespace mwcalib
