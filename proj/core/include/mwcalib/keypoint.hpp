#pragma once

#include <vector>

#include <Eigen/Core>

#include "mwcalib/manhattan_frame.hpp"

namespace mwcalib {

// A labeled image point in input-image pixels. Ground-truth keypoints carry
// score 1.
struct Detection {
  Label label = Label::kFront;
  Eigen::Vector2d px = Eigen::Vector2d::Zero();
  double score = 1.0;
};

using Detections = std::vector<Detection>;

LabelSet label_set(const Detections& detections);

}  // namespace mwcalib
