#include "mwcalib/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "mwcalib/error.hpp"

namespace mwcalib {

namespace {

const Detection* find_label(const Detections& dets, Label label) {
  const Detection* best = nullptr;
  for (const Detection& d : dets) {
    if (d.label == label && (best == nullptr || d.score > best->score)) best = &d;
  }
  return best;
}

void check_same_size(const Image& a, const Image& b) {
  if (a.width() != b.width() || a.height() != b.height() || a.empty()) {
    std::ostringstream msg;
    msg << a.width() << "x" << a.height() << " vs " << b.width() << "x" << b.height();
    throw Error(ErrorCode::kDimensionMismatch, msg.str());
  }
}

double psnr_from_mse(double mse) {
  if (mse <= 0.0) return kPsnrCapDb;
  return std::min(kPsnrCapDb, 10.0 * std::log10(255.0 * 255.0 / mse));
}

// Valid-mode separable filter of a w x h plane with a 1D kernel.
std::vector<double> filter_valid(const std::vector<double>& src, int w, int h,
                                 const std::vector<double>& k) {
  const int n = static_cast<int>(k.size());
  const int ow = w - n + 1;
  const int oh = h - n + 1;
  std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += k[i] * src[static_cast<std::size_t>(y) * w + x + i];
      tmp[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += k[i] * tmp[static_cast<std::size_t>(y + i) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  return out;
}

ApAr summarize(const std::vector<std::pair<double, double>>& entries, int n_gt) {
  // entries: (score, oks), one per image that produced a detection.
  ApAr out;
  if (n_gt == 0 || entries.empty()) return out;
  std::vector<std::pair<double, double>> sorted = entries;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.first > b.first;
  });

  auto evaluate = [&](double threshold, double& ap, double& ar) {
    std::vector<double> recall;
    std::vector<double> precision;
    int tp = 0;
    int fp = 0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      (sorted[i].second >= threshold ? tp : fp)++;
      const bool block_end = i + 1 == sorted.size() || sorted[i + 1].first != sorted[i].first;
      if (block_end) {
        recall.push_back(static_cast<double>(tp) / n_gt);
        precision.push_back(static_cast<double>(tp) / (tp + fp));
      }
    }
    for (std::size_t k = precision.size(); k-- > 1;) {
      precision[k - 1] = std::max(precision[k - 1], precision[k]);
    }
    double sum = 0.0;
    for (int r = 0; r <= 100; ++r) {
      const double level = r / 100.0;
      const auto it = std::lower_bound(recall.begin(), recall.end(), level - 1e-12);
      if (it != recall.end()) sum += precision[static_cast<std::size_t>(it - recall.begin())];
    }
    ap = sum / 101.0;
    ar = recall.back();
  };

  double ap_sum = 0.0;
  double ar_sum = 0.0;
  for (int t = 0; t < 10; ++t) {
    const double threshold = 0.5 + 0.05 * t;
    double ap = 0.0;
    double ar = 0.0;
    evaluate(threshold, ap, ar);
    ap_sum += ap;
    ar_sum += ar;
    if (t == 0) {
      out.ap50 = ap;
      out.ar50 = ar;
    } else if (t == 5) {
      out.ap75 = ap;
      out.ar75 = ar;
    }
  }
  out.ap = ap_sum / 10.0;
  out.ar = ar_sum / 10.0;
  return out;
}

double mean_score(const Detections& dets) {
  double s = 0.0;
  for (const Detection& d : dets) s += d.score;
  return s / static_cast<double>(dets.size());
}

}  // namespace

AngleErrors angle_errors(const Eigen::Matrix3d& pred, const EulerPTR& gt) {
  const EulerPTR p = decompose(pred, gt).angles;
  return {std::abs(wrap_deg(p.pan_deg - gt.pan_deg)), std::abs(wrap_deg(p.tilt_deg - gt.tilt_deg)),
          std::abs(wrap_deg(p.roll_deg - gt.roll_deg))};
}

AngleErrors angle_mae(std::span<const EulerPTR> pred, std::span<const EulerPTR> gt) {
  if (pred.size() != gt.size()) {
    throw Error(ErrorCode::kLengthMismatch, "prediction and ground-truth lists differ in length");
  }
  AngleErrors sum;
  if (pred.empty()) return sum;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const AngleErrors e = angle_errors(compose(pred[i]), gt[i]);
    sum.pan += e.pan;
    sum.tilt += e.tilt;
    sum.roll += e.roll;
  }
  const double n = static_cast<double>(pred.size());
  return {sum.pan / n, sum.tilt / n, sum.roll / n};
}

double repe(const CameraModel& pred, const CameraModel& gt, int n_samples) {
  if (n_samples <= 0) throw Error(ErrorCode::kInvalidArgument, "n_samples must be positive");
  const double cos_cap = std::cos(gt.params.eta_max());
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  const Eigen::Matrix3d to_world = gt.rotation.transpose();
  double sum = 0.0;
  int count = 0;
  for (int i = 0; i < n_samples; ++i) {
    const double z = 1.0 - (1.0 - cos_cap) * (i + 0.5) / n_samples;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    const Eigen::Vector3d world = to_world * Eigen::Vector3d(r * std::cos(phi), r * std::sin(phi), z);
    const Projection pg = project(world, gt.params, {gt.rotation});
    const Projection pp = project(world, pred.params, {pred.rotation});
    if (!pg.visible || !pp.visible) continue;
    sum += (pg.px - pp.px).norm();
    ++count;
  }
  if (count == 0) {
    throw Error(ErrorCode::kNoVisibleSamples, "no sample is visible in both camera models");
  }
  return sum / count;
}

double pck(const Detections& detections, const Detections& gt, double threshold_px) {
  if (gt.empty()) return 1.0;
  int correct = 0;
  for (const Detection& g : gt) {
    const Detection* d = find_label(detections, g.label);
    if (d != nullptr && (d->px - g.px).norm() <= threshold_px) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(gt.size());
}

double object_keypoint_similarity(const Detections& detections, const Detections& gt, double sk_px) {
  if (gt.empty()) return 0.0;
  double sum = 0.0;
  for (const Detection& g : gt) {
    const Detection* d = find_label(detections, g.label);
    if (d == nullptr) continue;
    sum += std::exp(-(d->px - g.px).squaredNorm() / (2.0 * sk_px * sk_px));
  }
  return sum / static_cast<double>(gt.size());
}

ApAr oks_ap_ar(std::span<const ImageKeypoints> images, double sk_px) {
  std::vector<std::pair<double, double>> entries;
  int n_gt = 0;
  for (const ImageKeypoints& im : images) {
    if (im.gt.empty()) continue;
    ++n_gt;
    if (im.detections.empty()) continue;
    entries.emplace_back(mean_score(im.detections),
                         object_keypoint_similarity(im.detections, im.gt, sk_px));
  }
  return summarize(entries, n_gt);
}

double psnr(const Image& a, const Image& b) {
  check_same_size(a, b);
  double se = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    const double d = static_cast<double>(a.data()[i]) - b.data()[i];
    se += d * d;
  }
  return psnr_from_mse(se / static_cast<double>(a.data().size()));
}

double psnr(const Image& a, const Image& b, const Mask& mask) {
  check_same_size(a, b);
  if (mask.size() != static_cast<std::size_t>(a.width()) * a.height()) {
    throw Error(ErrorCode::kDimensionMismatch, "mask does not match image size");
  }
  double se = 0.0;
  std::size_t n = 0;
  for (std::size_t p = 0; p < mask.size(); ++p) {
    if (!mask[p]) continue;
    for (std::size_t c = 0; c < 3; ++c) {
      const double d = static_cast<double>(a.data()[3 * p + c]) - b.data()[3 * p + c];
      se += d * d;
    }
    n += 3;
  }
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "mask selects no pixels");
  return psnr_from_mse(se / static_cast<double>(n));
}

double ssim(const Image& a, const Image& b) {
  check_same_size(a, b);
  constexpr int kWin = 11;
  constexpr double kSigma = 1.5;
  const double c1 = std::pow(0.01 * 255.0, 2);
  const double c2 = std::pow(0.03 * 255.0, 2);
  const int w = a.width();
  const int h = a.height();
  if (w < kWin || h < kWin) {
    throw Error(ErrorCode::kDimensionMismatch, "SSIM needs images of at least 11x11 pixels");
  }
  std::vector<double> k(kWin);
  double ksum = 0.0;
  for (int i = 0; i < kWin; ++i) {
    const double x = i - kWin / 2;
    k[i] = std::exp(-x * x / (2.0 * kSigma * kSigma));
    ksum += k[i];
  }
  for (double& v : k) v /= ksum;

  const std::size_t n = static_cast<std::size_t>(w) * h;
  double total = 0.0;
  for (int c = 0; c < 3; ++c) {
    std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
    for (std::size_t p = 0; p < n; ++p) {
      x[p] = a.data()[3 * p + c];
      y[p] = b.data()[3 * p + c];
      xx[p] = x[p] * x[p];
      yy[p] = y[p] * y[p];
      xy[p] = x[p] * y[p];
    }
    const auto mx = filter_valid(x, w, h, k);
    const auto my = filter_valid(y, w, h, k);
    const auto sxx = filter_valid(xx, w, h, k);
    const auto syy = filter_valid(yy, w, h, k);
    const auto sxy = filter_valid(xy, w, h, k);
    double acc = 0.0;
    for (std::size_t p = 0; p < mx.size(); ++p) {
      const double vx = sxx[p] - mx[p] * mx[p];
      const double vy = syy[p] - my[p] * my[p];
      const double cov = sxy[p] - mx[p] * my[p];
      acc += ((2.0 * mx[p] * my[p] + c1) * (2.0 * cov + c2)) /
             ((mx[p] * mx[p] + my[p] * my[p] + c1) * (vx + vy + c2));
    }
    total += acc / static_cast<double>(mx.size());
  }
  return total / 3.0;
}

ImageRow MetricAccumulator::add(const ImageEvaluation& im, int repe_samples) {
  ImageRow row;
  row.id = im.id;
  ++total_;

  // Keypoint metrics are scored for every image; a failed calibration still
  // has (possibly empty) detections.
  gt_points_ += static_cast<int>(im.gt_keypoints.size());
  for (const Detection& g : im.gt_keypoints) {
    const Detection* d = find_label(im.detections, g.label);
    if (d == nullptr) continue;
    const double dist = (d->px - g.px).norm();
    if (dist <= kKeypointThresholdPx) ++correct_points_;
    dist_sum_[index_of(g.label)] += dist;
    dist_count_[index_of(g.label)] += 1;
  }
  row.pck = pck(im.detections, im.gt_keypoints);
  row.oks = object_keypoint_similarity(im.detections, im.gt_keypoints);
  keypoints_.push_back({im.detections, im.gt_keypoints});

  if (im.psnr_db && im.ssim) {
    psnr_sum_ += *im.psnr_db;
    ssim_sum_ += *im.ssim;
    ++image_quality_count_;
  }

  if (!im.pred) return row;
  ++successes_;
  row.success = true;
  row.angle = angle_errors(im.pred->rotation, im.gt_euler);
  row.f_err_mm = std::abs(im.pred->params.f_mm() - im.gt.params.f_mm());
  row.k1_err = std::abs(im.pred->params.k1() - im.gt.params.k1());
  sums_.pan += row.angle.pan;
  sums_.tilt += row.angle.tilt;
  sums_.roll += row.angle.roll;
  sums_.f += row.f_err_mm;
  sums_.k1 += row.k1_err;
  try {
    row.repe_px = repe(*im.pred, im.gt, repe_samples);
    sums_.repe += *row.repe_px;
    ++repe_count_;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoVisibleSamples) throw;
    ++repe_failures_;
  }
  return row;
}

void MetricAccumulator::merge(const MetricAccumulator& o) {
  total_ += o.total_;
  successes_ += o.successes_;
  repe_count_ += o.repe_count_;
  repe_failures_ += o.repe_failures_;
  gt_points_ += o.gt_points_;
  correct_points_ += o.correct_points_;
  sums_.pan += o.sums_.pan;
  sums_.tilt += o.sums_.tilt;
  sums_.roll += o.sums_.roll;
  sums_.f += o.sums_.f;
  sums_.k1 += o.sums_.k1;
  sums_.repe += o.sums_.repe;
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    dist_sum_[i] += o.dist_sum_[i];
    dist_count_[i] += o.dist_count_[i];
  }
  keypoints_.insert(keypoints_.end(), o.keypoints_.begin(), o.keypoints_.end());
  psnr_sum_ += o.psnr_sum_;
  ssim_sum_ += o.ssim_sum_;
  image_quality_count_ += o.image_quality_count_;
}

EvalReport MetricAccumulator::report() const {
  EvalReport r;
  r.total = total_;
  r.successes = successes_;
  r.executable_rate = total_ == 0 ? 0.0 : 100.0 * successes_ / total_;
  if (successes_ > 0) {
    const double n = successes_;
    r.angle_mae = {sums_.pan / n, sums_.tilt / n, sums_.roll / n};
    r.f_mae_mm = sums_.f / n;
    r.k1_mae = sums_.k1 / n;
  }
  if (repe_count_ > 0) r.repe_px = sums_.repe / repe_count_;
  r.repe_failures = repe_failures_;

  KeypointReport& kp = r.keypoints;
  kp.ap_ar = oks_ap_ar(keypoints_);
  kp.pck = gt_points_ == 0 ? 0.0 : static_cast<double>(correct_points_) / gt_points_;
  double vp_sum = 0.0, adp_sum = 0.0;
  int vp_n = 0, adp_n = 0;
  for (Label l : kAllLabels) {
    const std::size_t i = index_of(l);
    if (dist_count_[i] == 0) continue;
    kp.mean_distance[i] = dist_sum_[i] / dist_count_[i];
    (is_vanishing_point(l) ? vp_sum : adp_sum) += dist_sum_[i];
    (is_vanishing_point(l) ? vp_n : adp_n) += dist_count_[i];
  }
  if (vp_n > 0) kp.mean_distance_vp = vp_sum / vp_n;
  if (adp_n > 0) kp.mean_distance_adp = adp_sum / adp_n;
  if (vp_n + adp_n > 0) kp.mean_distance_all = (vp_sum + adp_sum) / (vp_n + adp_n);

  if (image_quality_count_ > 0) {
    r.psnr_db = psnr_sum_ / image_quality_count_;
    r.ssim = ssim_sum_ / image_quality_count_;
  }
  return r;
}

}  // namespace mwcalib
