#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mwcalib/error.hpp"
#include "mwcalib/metrics.hpp"
#include "mwcalib/rotation_estimation.hpp"
#include "mwcalib/synthesis.hpp"
#include "test_support.hpp"

namespace mwcalib {
namespace {

using testing::kDegToRad;
using testing::kPi;

Detections shifted(const Detections& d, const Eigen::Vector2d& offset) {
  Detections out = d;
  for (Detection& x : out) x.px += offset;
  return out;
}

Detections grid_points(int n) {
  Detections d;
  for (int i = 0; i < n; ++i) d.push_back({kUsedLabels[i], Eigen::Vector2d(20.0 + 10 * i, 50.0), 1.0});
  return d;
}

Image natural_image() { return render_pinhole(procedural_panorama(256, 21), Face::kFront, 90.0, 96); }

TEST(AngleMae, Examples) {
  const std::vector<EulerPTR> gt = {{0, 0, 0}};
  std::vector<EulerPTR> pred = gt;
  const AngleErrors zero = angle_mae(pred, gt);
  EXPECT_EQ(zero.pan, 0.0);
  EXPECT_EQ(zero.tilt, 0.0);
  EXPECT_EQ(zero.roll, 0.0);
  pred[0].pan_deg = 2.0;
  EXPECT_NEAR(angle_mae(pred, gt).pan, 2.0, 1e-12);
}

TEST(AngleMae, LengthMismatch) {
  const std::vector<EulerPTR> a(2), b(3);
  try {
    angle_mae(a, b);
    FAIL() << "expected length mismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLengthMismatch);
  }
}

TEST(AngleMae, UsesGroundTruthBranch) {
  const EulerPTR gt{170.0, 100.0, 10.0};
  const AngleErrors e = angle_errors(compose(gt), gt);
  EXPECT_LT(std::max({e.pan, e.tilt, e.roll}), 1e-9);
}

TEST(AngleMae, NoiselessOraclePipeline) {
  Rng rng(61);
  const SamplingConfig cfg;
  std::vector<EulerPTR> pred, gt;
  while (gt.size() < 100) {
    const SampledCamera s = sample_params(rng, cfg);
    const GroundTruth g = make_ground_truth(s.params, s.euler);
    if (count_unique_axes(label_set(g.keypoints)) < 2) continue;
    pred.push_back(estimate_rotation(g.keypoints, g.params).euler);
    gt.push_back(g.euler);
  }
  const AngleErrors e = angle_mae(pred, gt);
  EXPECT_LT(e.pan, 1e-5);
  EXPECT_LT(e.tilt, 1e-5);
  EXPECT_LT(e.roll, 1e-5);
}

TEST(Repe, IdenticalModelsGiveZero) {
  const CameraModel m{CameraParams::create(6.0, -0.03, 224, 224), compose({10, 20, 5})};
  EXPECT_EQ(repe(m, m), 0.0);
}

// Dense midpoint quadrature over (eta, azimuth) of the GT cap with sin(eta)
// area weights; independent of the Fibonacci sampler.
double repe_quadrature(const CameraModel& pred, const CameraModel& gt) {
  const int n_eta = 1500;
  const int n_az = 720;
  const double eta_max = gt.params.eta_max();
  double num = 0.0;
  double den = 0.0;
  for (int i = 0; i < n_eta; ++i) {
    const double eta = (i + 0.5) * eta_max / n_eta;
    const double w = std::sin(eta);
    for (int j = 0; j < n_az; ++j) {
      const double az = (j + 0.5) * 2.0 * kPi / n_az;
      const Eigen::Vector3d ray(std::sin(eta) * std::cos(az), std::sin(eta) * std::sin(az), std::cos(eta));
      const Eigen::Vector3d world = gt.rotation.transpose() * ray;
      const Projection a = project(world, gt.params, {gt.rotation});
      const Projection b = project(world, pred.params, {pred.rotation});
      if (!a.visible || !b.visible) continue;
      num += w * (a.px - b.px).norm();
      den += w;
    }
  }
  return num / den;
}

TEST(Repe, OnePanDegreeMatchesQuadrature) {
  const CameraParams p = CameraParams::create(12.0, 0.0, 224, 224);
  const CameraModel gt{p, Eigen::Matrix3d::Identity()};
  const CameraModel pred{p, compose({1.0, 0.0, 0.0})};
  const double oracle = repe_quadrature(pred, gt);
  EXPECT_NEAR(repe(pred, gt) / oracle, 1.0, 0.01);
  // Small-angle scale: one degree of arc at the focal length, in pixels.
  EXPECT_GT(oracle, 0.5 * 12.0 * kDegToRad / p.d_u());
  EXPECT_LT(oracle, 3.0 * 12.0 * kDegToRad / p.d_u());
}

TEST(Repe, MixedErrorMatchesQuadrature) {
  const CameraModel gt{CameraParams::create(5.0, -0.05, 224, 224), compose({4, -6, 3})};
  const CameraModel pred{CameraParams::create(5.3, -0.03, 224, 224), compose({5, -5, 2})};
  EXPECT_NEAR(repe(pred, gt) / repe_quadrature(pred, gt), 1.0, 0.01);
}

TEST(Repe, SymmetricWhenCapsCoverSamples) {
  const CameraParams p = CameraParams::create(3.0, 0.0, 224, 224);
  const CameraModel a{p, compose({0.5, 0.0, 0.0})};
  const CameraModel b{p, compose({0.0, 0.3, 0.0})};
  EXPECT_NEAR(repe(a, b), repe(b, a), 0.02 * repe(a, b));
}

TEST(Repe, NoMutualVisibility) {
  const CameraParams p = CameraParams::create(6.0, 0.0, 224, 224, 30.0 * kDegToRad);
  const CameraModel a{p, Eigen::Matrix3d::Identity()};
  const CameraModel b{p, compose({180.0, 0.0, 0.0})};
  try {
    repe(a, b);
    FAIL() << "expected no-visible-samples error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoVisibleSamples);
  }
}

TEST(Pck, Examples) {
  const Detections gt = grid_points(13);
  EXPECT_EQ(pck(gt, gt), 1.0);
  // x = 0 keeps the 5.6 px displacement exact in floating point.
  Detections edge = gt;
  for (Detection& d : edge) d.px.x() = 0.0;
  EXPECT_EQ(pck(shifted(edge, {5.6, 0.0}), edge), 1.0);
  EXPECT_EQ(pck(shifted(edge, {std::nextafter(5.6, 6.0), 0.0}), edge), 0.0);
  EXPECT_EQ(pck(shifted(gt, {0.0, 10.0}), gt), 0.0);
  EXPECT_EQ(pck({}, gt), 0.0);
}

TEST(MetricsProperty, PckMonotoneInThreshold) {
  std::mt19937_64 rng(62);
  const Detections gt = grid_points(13);
  Detections det = gt;
  for (Detection& d : det) d.px += Eigen::Vector2d(testing::uniform(rng, -8, 8), testing::uniform(rng, -8, 8));
  double last = 0.0;
  for (double t = 0.0; t <= 15.0; t += 0.25) {
    const double v = pck(det, gt, t);
    EXPECT_GE(v, last);
    last = v;
  }
  EXPECT_EQ(last, 1.0);
}

TEST(MetricsProperty, RelabelingInvariance) {
  std::mt19937_64 rng(63);
  const Detections gt = grid_points(6);
  Detections det = gt;
  for (Detection& d : det) d.px += Eigen::Vector2d(testing::uniform(rng, -7, 7), testing::uniform(rng, -7, 7));
  Detections gt2 = gt, det2 = det;
  for (Detection& d : gt2) d.label = kUsedLabels[12 - index_of(d.label) % 13];
  for (Detection& d : det2) d.label = kUsedLabels[12 - index_of(d.label) % 13];
  EXPECT_EQ(pck(det, gt), pck(det2, gt2));
  EXPECT_DOUBLE_EQ(object_keypoint_similarity(det, gt), object_keypoint_similarity(det2, gt2));
}

TEST(Oks, Examples) {
  const Detections gt = grid_points(13);
  std::vector<ImageKeypoints> exact = {{gt, gt}};
  const ApAr a = oks_ap_ar(exact);
  EXPECT_DOUBLE_EQ(a.ap, 1.0);
  EXPECT_DOUBLE_EQ(a.ar, 1.0);

  const Detections off = shifted(gt, {5.6, 0.0});
  EXPECT_NEAR(object_keypoint_similarity(off, gt), std::exp(-0.5), 1e-12);
  std::vector<ImageKeypoints> far = {{off, gt}};
  const ApAr b = oks_ap_ar(far);
  EXPECT_DOUBLE_EQ(b.ap50, 1.0);
  EXPECT_DOUBLE_EQ(b.ap75, 0.0);
  EXPECT_DOUBLE_EQ(b.ar50, 1.0);
  EXPECT_DOUBLE_EQ(b.ar75, 0.0);
  EXPECT_NEAR(b.ap, 0.3, 1e-12);  // thresholds 0.50, 0.55, 0.60

  std::vector<ImageKeypoints> empty = {{{}, gt}};
  EXPECT_EQ(oks_ap_ar(empty).ap, 0.0);
}

TEST(Oks, ApNotAboveAp50) {
  std::mt19937_64 rng(64);
  std::vector<ImageKeypoints> images;
  for (int i = 0; i < 50; ++i) {
    const Detections gt = grid_points(13);
    Detections det = gt;
    const double s = testing::uniform(rng, 0, 8);
    for (Detection& d : det) {
      d.px += Eigen::Vector2d(testing::uniform(rng, -s, s), testing::uniform(rng, -s, s));
      d.score = testing::uniform(rng, 0.2, 1.0);
    }
    images.push_back({det, gt});
  }
  const ApAr r = oks_ap_ar(images);
  EXPECT_LE(r.ap, r.ap50);
  EXPECT_LE(r.ap75, r.ap50);
  EXPECT_LE(r.ar, r.ar50);
}

TEST(Psnr, Examples) {
  const Image a = natural_image();
  EXPECT_EQ(psnr(a, a), kPsnrCapDb);
  Image b(64, 48, {100, 100, 100});
  Image c(64, 48, {101, 101, 101});
  EXPECT_NEAR(psnr(b, c), 20.0 * std::log10(255.0), 1e-9);
  EXPECT_NEAR(psnr(b, c), 48.13, 0.005);
  EXPECT_THROW(psnr(b, Image(10, 10)), Error);
}

TEST(Psnr, MaskSelectsPixels) {
  Image a(4, 4, {0, 0, 0});
  Image b = a;
  b.set(0, 0, {255, 255, 255});
  Mask m(16, 1);
  m[0] = 0;
  EXPECT_EQ(psnr(a, b, m), kPsnrCapDb);
  EXPECT_THROW(psnr(a, b, Mask(16, 0)), Error);
}

TEST(Ssim, Examples) {
  const Image a = natural_image();
  EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
  Image inv = a;
  for (std::uint8_t& v : inv.data()) v = static_cast<std::uint8_t>(255 - v);
  EXPECT_LT(ssim(a, inv), 0.1);
  EXPECT_THROW(ssim(Image(8, 8), Image(8, 8)), Error);
}

ImageEvaluation random_evaluation(std::mt19937_64& rng, int index) {
  const CameraParams p = CameraParams::create(testing::uniform(rng, 4, 8), testing::uniform(rng, -0.1, 0.1), 224, 224);
  const EulerPTR e = testing::random_euler(rng);
  const GroundTruth gt = make_ground_truth(p, e);
  ImageEvaluation im{.id = "img_" + std::to_string(index),
                     .gt = {p, gt.rotation},
                     .gt_euler = gt.euler,
                     .gt_keypoints = gt.keypoints};
  Rng det_rng(rng());
  im.detections = oracle_detect(gt, 3.0, 0.1, det_rng);
  for (Detection& d : im.detections) d.score = std::floor(testing::uniform(rng, 1, 4)) / 4.0;
  if (index % 7 != 3) {
    im.pred = CameraModel{CameraParams::create(p.f_mm() + 0.1, p.k1(), 224, 224),
                          compose({e.pan_deg + 1, e.tilt_deg, e.roll_deg - 1})};
    im.psnr_db = testing::uniform(rng, 20, 40);
    im.ssim = testing::uniform(rng, 0.5, 1);
  }
  return im;
}

void expect_reports_equal(const EvalReport& a, const EvalReport& b) {
  EXPECT_EQ(a.total, b.total);
  EXPECT_EQ(a.successes, b.successes);
  EXPECT_NEAR(a.angle_mae.pan, b.angle_mae.pan, 1e-12);
  EXPECT_NEAR(a.angle_mae.tilt, b.angle_mae.tilt, 1e-12);
  EXPECT_NEAR(a.angle_mae.roll, b.angle_mae.roll, 1e-12);
  EXPECT_NEAR(a.f_mae_mm, b.f_mae_mm, 1e-12);
  EXPECT_NEAR(*a.repe_px, *b.repe_px, 1e-12);
  EXPECT_NEAR(a.keypoints.pck, b.keypoints.pck, 1e-12);
  EXPECT_NEAR(a.keypoints.ap_ar.ap, b.keypoints.ap_ar.ap, 1e-12);
  EXPECT_NEAR(a.keypoints.ap_ar.ar, b.keypoints.ap_ar.ar, 1e-12);
  EXPECT_NEAR(*a.keypoints.mean_distance_all, *b.keypoints.mean_distance_all, 1e-12);
  EXPECT_NEAR(*a.psnr_db, *b.psnr_db, 1e-12);
  EXPECT_NEAR(*a.ssim, *b.ssim, 1e-12);
}

TEST(MetricsProperty, PermutationInvariance) {
  std::mt19937_64 rng(65);
  std::vector<ImageEvaluation> images;
  for (int i = 0; i < 40; ++i) images.push_back(random_evaluation(rng, i));
  MetricAccumulator a;
  for (const ImageEvaluation& im : images) a.add(im, 200);
  std::shuffle(images.begin(), images.end(), rng);
  MetricAccumulator b;
  for (const ImageEvaluation& im : images) b.add(im, 200);
  expect_reports_equal(a.report(), b.report());
}

TEST(MetricsProperty, MergeIsAssociative) {
  std::mt19937_64 rng(66);
  MetricAccumulator parts[3];
  MetricAccumulator serial;
  for (int i = 0; i < 30; ++i) {
    const ImageEvaluation im = random_evaluation(rng, i);
    parts[i % 3].add(im, 200);
    serial.add(im, 200);
  }
  MetricAccumulator left = parts[0];
  left.merge(parts[1]);
  left.merge(parts[2]);
  MetricAccumulator right_tail = parts[1];
  right_tail.merge(parts[2]);
  MetricAccumulator right = parts[0];
  right.merge(right_tail);
  expect_reports_equal(left.report(), right.report());
  expect_reports_equal(left.report(), serial.report());
}

TEST(MetricAccumulator, NoiselessOracleGivesIdealReport) {
  Rng rng(67);
  const SamplingConfig cfg;
  MetricAccumulator acc;
  for (int i = 0; i < 100; ++i) {
    const SampledCamera s = sample_params(rng, cfg);
    const GroundTruth gt = make_ground_truth(s.params, s.euler);
    ImageEvaluation im{.id = std::to_string(i),
                       .gt = {gt.params, gt.rotation},
                       .gt_euler = gt.euler,
                       .gt_keypoints = gt.keypoints};
    im.detections = oracle_detect(gt, 0.0, 0.0, rng);
    const RotationEstimate est = estimate_rotation(im.detections, gt.params);
    im.pred = CameraModel{gt.params, est.rotation.matrix()};
    acc.add(im);
  }
  const EvalReport r = acc.report();
  EXPECT_EQ(r.executable_rate, 100.0);
  EXPECT_LT(std::max({r.angle_mae.pan, r.angle_mae.tilt, r.angle_mae.roll}), 1e-5);
  EXPECT_LT(*r.repe_px, 1e-5);
  EXPECT_EQ(r.keypoints.pck, 1.0);
  EXPECT_NEAR(r.keypoints.ap_ar.ap, 1.0, 1e-5);
  EXPECT_NEAR(r.keypoints.ap_ar.ar, 1.0, 1e-5);
}

TEST(MetricAccumulator, FailuresLowerExecutableRate) {
  std::mt19937_64 rng(68);
  MetricAccumulator acc;
  for (int i = 0; i < 14; ++i) acc.add(random_evaluation(rng, i), 100);
  const EvalReport r = acc.report();
  EXPECT_EQ(r.total, 14);
  EXPECT_EQ(r.successes, 12);
  EXPECT_NEAR(r.executable_rate, 100.0 * 12 / 14, 1e-12);
  EXPECT_GE(r.keypoints.pck, 0.0);
  EXPECT_LE(r.keypoints.pck, 1.0);
}

}  // namespace
}  // namespace mwcalib
