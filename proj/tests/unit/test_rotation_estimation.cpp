#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mwcalib/error.hpp"
#include "mwcalib/rotation_estimation.hpp"
#include "mwcalib/synthesis.hpp"
#include "test_support.hpp"

namespace mwcalib {
namespace {

using testing::kDegToRad;
using testing::kPi;

std::vector<Correspondence> rotated(const Eigen::Matrix3d& r, const std::vector<Label>& labels) {
  std::vector<Correspondence> out;
  for (Label l : labels) out.push_back({r * direction_of(l), direction_of(l)});
  return out;
}

std::vector<Label> used_labels() { return {kUsedLabels.begin(), kUsedLabels.end()}; }

TEST(OlaeFit, IdentityGivesZeroGibbs) {
  const OlaeSolution s = olae_fit(rotated(Eigen::Matrix3d::Identity(), used_labels()));
  EXPECT_LT(s.gibbs.norm(), 1e-15);
}

TEST(OlaeFit, TwoPointsThirtyDegreesAboutY) {
  const Eigen::Matrix3d r = rot_y(30.0 * kDegToRad);
  std::vector<Correspondence> c = {{r * Eigen::Vector3d::UnitZ(), Eigen::Vector3d::UnitZ()},
                                   {r * Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitX()}};
  const OlaeSolution s = olae_fit(c);
  EXPECT_NEAR(s.gibbs.x(), 0.0, 1e-14);
  EXPECT_NEAR(s.gibbs.y(), std::tan(15.0 * kDegToRad), 1e-14);
  EXPECT_NEAR(s.gibbs.z(), 0.0, 1e-14);
}

TEST(OlaeFit, RecoversRandomRotations) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 500; ++i) {
    const Eigen::Matrix3d r =
        testing::axis_angle(Eigen::Vector3d(testing::uniform(rng, -1, 1), testing::uniform(rng, -1, 1),
                                            testing::uniform(rng, -1, 1)),
                            testing::uniform(rng, 0.0, 120.0 * kDegToRad));
    const OlaeSolution s = olae_fit(rotated(r, used_labels()));
    EXPECT_LT(geodesic_distance(Rotation::from_gibbs(s.gibbs).matrix(), r), 1e-8);
  }
}

TEST(OlaeFit, IllConditionedNearHalfTurn) {
  const Eigen::Matrix3d r = testing::axis_angle(Eigen::Vector3d(1, 2, 3), kPi - 1e-12);
  try {
    olae_fit(rotated(r, used_labels()));
    FAIL() << "expected ill-conditioned error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIllConditioned);
  }
  EXPECT_LT(geodesic_distance(procrustes_fit(rotated(r, used_labels())), r), 1e-9);
}

TEST(OlaeFit, IllConditionedForOneAxis) {
  const Eigen::Matrix3d r = rot_x(0.2);
  EXPECT_THROW(olae_fit(rotated(r, {Label::kFront, Label::kBack})), Error);
}

TEST(RotationProperty, OlaeWeightScaleInvariance) {
  std::mt19937_64 rng(32);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Matrix3d r = rot_y(0.4) * testing::axis_angle(Eigen::Vector3d(0.3, -1, 0.2), 0.5);
    std::vector<Correspondence> c = rotated(r, used_labels());
    std::normal_distribution<double> n(0.0, 0.02);
    std::vector<double> w;
    for (Correspondence& x : c) {
      x.observed = (x.observed + Eigen::Vector3d(n(rng), n(rng), n(rng))).normalized();
      w.push_back(testing::uniform(rng, 0.1, 1.0));
    }
    const double scale = testing::uniform(rng, 1e-3, 1e3);
    std::vector<double> w2 = w;
    for (double& x : w2) x *= scale;
    EXPECT_LT((olae_fit(c, w).gibbs - olae_fit(c, w2).gibbs).norm(), 1e-12);
  }
}

TEST(OlaeFit, WeightLengthMismatch) {
  const std::vector<double> w = {1.0};
  EXPECT_THROW(olae_fit(rotated(Eigen::Matrix3d::Identity(), used_labels()), w), Error);
}

TEST(AugmentDegenerate, TwoPointsAppendsCrossProduct) {
  const std::vector<Correspondence> c = {{Eigen::Vector3d::UnitZ(), Eigen::Vector3d::UnitZ()},
                                         {Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitX()}};
  const Augmented a = augment_degenerate(c);
  ASSERT_EQ(a.correspondences.size(), 3u);
  EXPECT_EQ(a.degenerate_case, DegenerateCase::kTwoPoints);
  EXPECT_EQ(a.correspondences[2].observed, Eigen::Vector3d(0, 1, 0));
  EXPECT_EQ(a.correspondences[2].reference, Eigen::Vector3d(0, 1, 0));
  EXPECT_FALSE(a.zeroed_angle.has_value());
}

TEST(AugmentDegenerate, EmptyInputIsIdentity) {
  const Augmented a = augment_degenerate({});
  EXPECT_TRUE(a.identity);
  EXPECT_EQ(a.degenerate_case, DegenerateCase::kNoPoints);
  EXPECT_TRUE(a.correspondences.empty());
}

TEST(AugmentDegenerate, SinglePointAddsTemporalAndCross) {
  const Eigen::Matrix3d r = compose({12.0, -7.0, 0.0});
  const std::vector<Correspondence> c = {{r * Eigen::Vector3d::UnitZ(), Eigen::Vector3d::UnitZ()}};
  const Augmented a = augment_degenerate(c);
  ASSERT_EQ(a.correspondences.size(), 3u);
  EXPECT_EQ(a.degenerate_case, DegenerateCase::kOnePoint);
  ASSERT_TRUE(a.zeroed_angle.has_value());
  EXPECT_EQ(*a.zeroed_angle, EulerAngle::kRoll);
  // Temporal reference: orthogonal to front with maximal Z, tie toward +X.
  EXPECT_TRUE(a.correspondences[1].reference.isApprox(Eigen::Vector3d::UnitX(), 1e-15));
  EXPECT_NEAR(a.correspondences[1].reference.dot(a.correspondences[0].reference), 0.0, 1e-15);
  EXPECT_NEAR(a.correspondences[1].observed.dot(a.correspondences[0].observed), 0.0, 1e-12);
}

TEST(AugmentDegenerate, NearParallelPair) {
  const Eigen::Vector3d z = Eigen::Vector3d::UnitZ();
  const std::vector<Correspondence> c = {{z, z}, {-z, -z}};
  try {
    augment_degenerate(c);
    FAIL() << "expected near-parallel error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNearParallel);
  }
}

double max_angle_error(const EulerPTR& a, const EulerPTR& b) {
  return std::max({std::abs(wrap_deg(a.pan_deg - b.pan_deg)), std::abs(wrap_deg(a.tilt_deg - b.tilt_deg)),
                   std::abs(wrap_deg(a.roll_deg - b.roll_deg))});
}

TEST(EstimateRotation, ExactProjectionsRecoverAngles) {
  std::mt19937_64 rng(33);
  for (int i = 0; i < 200; ++i) {
    const CameraParams p = CameraParams::create(testing::uniform(rng, 3.6, 8.4),
                                                testing::uniform(rng, -0.1, 0.1), 224, 224);
    const GroundTruth gt = make_ground_truth(p, testing::random_euler(rng));
    if (count_unique_axes(label_set(gt.keypoints)) < 2) continue;
    const RotationEstimate est = estimate_rotation(gt.keypoints, p);
    EXPECT_LT(max_angle_error(decompose(est.rotation.matrix(), gt.euler).angles, gt.euler), 1e-6);
    EXPECT_EQ(est.diagnostics.num_detections, static_cast<int>(gt.keypoints.size()));
  }
}

TEST(EstimateRotation, TwoAxesRecoverExactly) {
  const CameraParams p = CameraParams::create(5.0, 0.02, 224, 224);
  const EulerPTR e{14.0, -9.0, 6.0};
  const Eigen::Matrix3d r = compose(e);
  Detections dets;
  for (Label l : {Label::kFront, Label::kFRT}) {
    dets.push_back({l, project(direction_of(l), p, {r}).px, 1.0});
  }
  const RotationEstimate est = estimate_rotation(dets, p);
  EXPECT_EQ(est.diagnostics.degenerate_case, DegenerateCase::kTwoPoints);
  EXPECT_EQ(est.diagnostics.unique_axes, 2);
  EXPECT_LT(max_angle_error(est.euler, e), 1e-6);
}

TEST(EstimateRotation, NoDetectionsIsUndetermined) {
  const CameraParams p = CameraParams::create(5.0, 0.0, 224, 224);
  const RotationEstimate est = estimate_rotation(Detections{}, p);
  EXPECT_TRUE(est.diagnostics.undetermined);
  EXPECT_EQ(est.euler, (EulerPTR{0.0, 0.0, 0.0}));
  EXPECT_TRUE(est.rotation.matrix().isIdentity(0.0));
}

TEST(EstimateRotation, SinglePointZeroesOneAngle) {
  const CameraParams p = CameraParams::create(5.0, -0.04, 224, 224);
  const EulerPTR e{20.0, 11.0, 0.0};
  const Detections dets = {{Label::kFront, project(Eigen::Vector3d::UnitZ(), p, {compose(e)}).px, 1.0}};
  const RotationEstimate est = estimate_rotation(dets, p);
  EXPECT_EQ(est.diagnostics.degenerate_case, DegenerateCase::kOnePoint);
  ASSERT_TRUE(est.diagnostics.zeroed_angle.has_value());
  EXPECT_EQ(*est.diagnostics.zeroed_angle, EulerAngle::kRoll);
  EXPECT_EQ(est.euler.roll_deg, 0.0);
  EXPECT_LT(max_angle_error(est.euler, e), 1e-6);
}

TEST(EstimateRotation, AntipodalPairTreatedAsOnePoint) {
  const CameraParams p = CameraParams::create(3.6, 0.1, 224, 224);
  const EulerPTR e{0.0, 0.0, 0.0};
  const Eigen::Matrix3d r = compose({90.0, 0.0, 0.0});
  Detections dets;
  for (Label l : {Label::kFront, Label::kBack}) {
    const Projection pr = project(direction_of(l), p, {r});
    ASSERT_TRUE(pr.visible);
    dets.push_back({l, pr.px, l == Label::kFront ? 0.9 : 0.8});
  }
  const RotationEstimate est = estimate_rotation(dets, p);
  EXPECT_EQ(est.diagnostics.unique_axes, 1);
  EXPECT_EQ(est.diagnostics.degenerate_case, DegenerateCase::kOnePoint);
  (void)e;
}

TEST(EstimateRotation, MinScoreFiltersDetections) {
  const CameraParams p = CameraParams::create(5.0, 0.0, 224, 224);
  const GroundTruth gt = make_ground_truth(p, {5.0, 5.0, 5.0});
  Detections dets = gt.keypoints;
  for (Detection& d : dets) d.score = 0.1;
  EstimateOptions opt;
  opt.min_score = 0.5;
  EXPECT_TRUE(estimate_rotation(dets, p, opt).diagnostics.undetermined);
}

TEST(EstimateRotation, OutOfFovDetectionNamesTheLabel) {
  const CameraParams p = CameraParams::create(3.6, -0.1, 224, 224);
  const Detections dets = {{Label::kTop, {112.0 + p.max_radius_px() + 5.0, 112.0}, 1.0}};
  try {
    estimate_rotation(dets, p);
    FAIL() << "expected out-of-FOV error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOutOfFov);
    EXPECT_NE(std::string(e.what()).find("top"), std::string::npos);
  }
}

TEST(RotationProperty, NoiselessCompleteness) {
  std::mt19937_64 rng(34);
  int evaluated = 0;
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const CameraParams p = CameraParams::create(testing::uniform(rng, 3.6, 8.4),
                                                testing::uniform(rng, -0.1, 0.1), 224, 224);
    const GroundTruth gt = make_ground_truth(p, testing::random_euler(rng));
    if (count_unique_axes(label_set(gt.keypoints)) < 2) continue;
    ++evaluated;
    worst = std::max(worst, geodesic_distance(estimate_rotation(gt.keypoints, p).rotation.matrix(),
                                              gt.rotation));
  }
  EXPECT_GT(evaluated, 9500);
  EXPECT_LT(worst, 1e-6);
}

TEST(RotationProperty, ErrorGrowsWithNoise) {
  std::mt19937_64 rng(35);
  double err1 = 0.0;
  double err3 = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const CameraParams p = CameraParams::create(testing::uniform(rng, 3.6, 8.4),
                                                testing::uniform(rng, -0.1, 0.1), 224, 224);
    const GroundTruth gt = make_ground_truth(p, testing::random_euler(rng));
    const std::uint64_t seed = rng();
    Rng a(seed);
    Rng b(seed);
    err1 += geodesic_distance(estimate_rotation(oracle_detect(gt, 1.0, 0.0, a), p).rotation.matrix(),
                              gt.rotation);
    err3 += geodesic_distance(estimate_rotation(oracle_detect(gt, 3.0, 0.0, b), p).rotation.matrix(),
                              gt.rotation);
  }
  EXPECT_LE(err1, err3);
}

TEST(Diagnostics, CaseNames) {
  EXPECT_EQ(to_string(DegenerateCase::kNone), "none");
  EXPECT_EQ(to_string(DegenerateCase::kTwoPoints), "two_points");
  EXPECT_EQ(to_string(DegenerateCase::kOnePoint), "one_point");
  EXPECT_EQ(to_string(DegenerateCase::kNoPoints), "no_points");
}

}  // namespace
}  // namespace mwcalib
