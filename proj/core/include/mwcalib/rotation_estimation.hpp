#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mwcalib/camera_model.hpp"
#include "mwcalib/keypoint.hpp"
#include "mwcalib/so3.hpp"

namespace mwcalib {

// A backprojected observation (camera frame) paired with the Manhattan
// direction of the same label.
struct Correspondence {
  Eigen::Vector3d observed;
  Eigen::Vector3d reference;
};

inline constexpr double kMaxOlaeCondition = 1e8;

struct OlaeSolution {
  Eigen::Vector3d gibbs = Eigen::Vector3d::Zero();
  double condition_number = 1.0;
};

// Optimal linear attitude estimator. With s = observed + reference and
// d = observed - reference the Cayley identity d = g x s holds exactly for the
// true rotation, so g minimizes sum_i w_i |d_i - g x s_i|^2, a 3x3 symmetric
// linear system. Throws kIllConditioned when the normal matrix has condition
// number above kMaxOlaeCondition (rotation near 180 deg or a single axis).
OlaeSolution olae_fit(std::span<const Correspondence> correspondences,
                      std::span<const double> weights = {});

double olae_condition_number(std::span<const Correspondence> correspondences,
                             std::span<const double> weights = {});

// Weighted orthogonal Procrustes (SVD). Fallback for the Gibbs singularity.
Eigen::Matrix3d procrustes_fit(std::span<const Correspondence> correspondences,
                               std::span<const double> weights = {});

enum class DegenerateCase { kNone, kTwoPoints, kOnePoint, kNoPoints };

std::string_view to_string(DegenerateCase c);

struct Augmented {
  std::vector<Correspondence> correspondences;
  DegenerateCase degenerate_case = DegenerateCase::kNone;
  // One-point case: which Euler angle is pinned to 0, and the constrained
  // solution the temporal point was built from.
  std::optional<EulerAngle> zeroed_angle;
  std::optional<EulerPTR> constrained;
  bool identity = false;
};

// Adds points so that fewer than three correspondences still pin a rotation:
//  - two points: the normalized cross products of both sides;
//  - one point: a temporal point orthogonal to it on both sides plus the
//    cross-product pair, with one Euler angle fixed to zero;
//  - none: identity.
// Throws kNearParallel when two points are (anti)parallel to within 1e-6.
Augmented augment_degenerate(std::span<const Correspondence> correspondences);

struct EstimateOptions {
  double min_score = 0.0;
};

struct RotationDiagnostics {
  int num_detections = 0;
  int unique_axes = 0;
  double condition_number = 0.0;
  DegenerateCase degenerate_case = DegenerateCase::kNone;
  std::optional<EulerAngle> zeroed_angle;
  bool procrustes_fallback = false;
  bool gimbal_degenerate = false;
  bool undetermined = false;
};

struct RotationEstimate {
  Rotation rotation;
  EulerPTR euler;
  RotationDiagnostics diagnostics;
};

// Backprojects each detection, pairs it with its Manhattan direction and fits
// the rotation. Undeterminable rotations come back as (0, 0, 0).
RotationEstimate estimate_rotation(std::span<const Detection> detections,
                                   const CameraParams& params,
                                   const EstimateOptions& options = {});

}  // namespace mwcalib
