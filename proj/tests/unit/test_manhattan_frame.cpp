#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include <Eigen/LU>

#include "mwcalib/error.hpp"
#include "mwcalib/manhattan_frame.hpp"

namespace mwcalib {
namespace {

const double kInvSqrt3 = 1.0 / std::sqrt(3.0);

TEST(DirectionOf, Examples) {
  EXPECT_EQ(direction_of(Label::kFront), Eigen::Vector3d(0, 0, 1));
  EXPECT_TRUE(direction_of(Label::kBRB).isApprox(Eigen::Vector3d(1, 1, -1) * kInvSqrt3, 1e-15));
  EXPECT_EQ(direction_of(Label::kTop), Eigen::Vector3d(0, -1, 0));
  EXPECT_TRUE(direction_of(Label::kFLT).isApprox(Eigen::Vector3d(-1, -1, 1) * kInvSqrt3, 1e-15));
}

TEST(DirectionOf, UnitAndAdpComponents) {
  for (Label l : kAllLabels) {
    const Eigen::Vector3d d = direction_of(l);
    EXPECT_NEAR(d.norm(), 1.0, 1e-15) << label_name(l);
    if (!is_vanishing_point(l)) {
      for (int k = 0; k < 3; ++k) EXPECT_NEAR(std::abs(d[k]), kInvSqrt3, 1e-15);
    }
  }
}

TEST(PanoramaCoord, TableValues) {
  const double w = 1024.0;
  const double h = 512.0;
  const std::map<Label, Eigen::Vector2d> table = {
      {Label::kFront, {w / 2, h / 2}},          {Label::kBack, {0, h / 2}},
      {Label::kLeft, {w / 4, h / 2}},           {Label::kRight, {3 * w / 4, h / 2}},
      {Label::kTop, {0, 0}},                    {Label::kBottom, {0, h}},
      {Label::kFLT, {3 * w / 8, h / 4}},        {Label::kFRT, {5 * w / 8, h / 4}},
      {Label::kFLB, {3 * w / 8, 3 * h / 4}},    {Label::kFRB, {5 * w / 8, 3 * h / 4}},
      {Label::kBLT, {w / 8, h / 4}},            {Label::kBRT, {7 * w / 8, h / 4}},
      {Label::kBLB, {w / 8, 3 * h / 4}},        {Label::kBRB, {7 * w / 8, 3 * h / 4}},
  };
  ASSERT_EQ(table.size(), kNumLabels);
  for (const auto& [label, expected] : table) {
    EXPECT_EQ(panorama_coord(label, w, h), expected) << label_name(label);
  }
}

TEST(Labels, NamesRoundTrip) {
  for (Label l : kAllLabels) {
    EXPECT_EQ(parse_label(label_name(l)), l);
  }
  EXPECT_EQ(parse_label("flt"), Label::kFLT);
  EXPECT_EQ(parse_label("FRONT"), Label::kFront);
  EXPECT_FALSE(parse_label("middle").has_value());
  EXPECT_EQ(kUsedLabels.size(), 13u);
  for (Label l : kUsedLabels) EXPECT_NE(l, Label::kBack);
}

TEST(AlignDirections, Examples) {
  const AlignmentResult a = align_directions({Label::kBack, Label::kTop});
  EXPECT_TRUE(a.applied);
  EXPECT_EQ(a.labels, (LabelSet{Label::kFront, Label::kTop}));

  const AlignmentResult b = align_directions({Label::kRight, Label::kBottom});
  EXPECT_TRUE(b.applied);
  EXPECT_EQ(b.labels, (LabelSet{Label::kLeft, Label::kBottom}));

  const AlignmentResult c = align_directions({Label::kFront, Label::kRight});
  EXPECT_FALSE(c.applied);
  EXPECT_EQ(c.labels, (LabelSet{Label::kFront, Label::kRight}));
}

TEST(RotateY180, PairsFromTable) {
  const std::map<Label, Label> pairs = {
      {Label::kFront, Label::kBack}, {Label::kLeft, Label::kRight}, {Label::kFLT, Label::kBRT},
      {Label::kFLB, Label::kBRB},    {Label::kFRT, Label::kBLT},    {Label::kFRB, Label::kBLB}};
  for (const auto& [a, b] : pairs) {
    EXPECT_EQ(rotate_y180(a), b);
    EXPECT_EQ(rotate_y180(b), a);
  }
  EXPECT_EQ(rotate_y180(Label::kTop), Label::kTop);
  EXPECT_EQ(rotate_y180(Label::kBottom), Label::kBottom);
}

TEST(ManhattanProperty, RelabelingIsAnInvolutionMatchingTheRotation) {
  const Eigen::Matrix3d y180 = Eigen::Vector3d(-1, 1, -1).asDiagonal();
  for (Label l : kAllLabels) {
    EXPECT_EQ(rotate_y180(rotate_y180(l)), l);
    EXPECT_TRUE((y180 * direction_of(l)).isApprox(direction_of(rotate_y180(l)), 1e-15));
  }
}

TEST(ManhattanProperty, AlignmentIsIdempotent) {
  for (std::uint32_t bits = 0; bits < (1u << kNumLabels); ++bits) {
    LabelSet s;
    for (std::size_t i = 0; i < kNumLabels; ++i) {
      if (bits & (1u << i)) s.insert(kAllLabels[i]);
    }
    const AlignmentResult once = align_directions(s);
    const AlignmentResult twice = align_directions(once.labels);
    ASSERT_EQ(twice.labels, once.labels) << bits;
    ASSERT_FALSE(twice.applied) << bits;
  }
}

TEST(ManhattanProperty, AntipodesAreNegatedDirections) {
  int pairs = 0;
  for (Label l : kAllLabels) {
    EXPECT_EQ(direction_of(antipode(l)), -direction_of(l));
    EXPECT_EQ(antipode(antipode(l)), l);
    EXPECT_EQ(axis_of(antipode(l)), axis_of(l));
    if (index_of(l) < index_of(antipode(l))) ++pairs;
  }
  EXPECT_EQ(pairs, 7);
}

TEST(CountUniqueAxes, Examples) {
  EXPECT_EQ(count_unique_axes({Label::kFront, Label::kBack}), 1);
  EXPECT_EQ(count_unique_axes({}), 0);
  EXPECT_EQ(count_unique_axes({Label::kFront, Label::kTop, Label::kFLT}), 3);
}

TEST(ManhattanProperty, UniqueAxesMatchBruteForce) {
  for (std::uint32_t bits = 0; bits < (1u << kUsedLabels.size()); ++bits) {
    LabelSet s;
    std::vector<Eigen::Vector3d> dirs;
    for (std::size_t i = 0; i < kUsedLabels.size(); ++i) {
      if (bits & (1u << i)) {
        s.insert(kUsedLabels[i]);
        dirs.push_back(direction_of(kUsedLabels[i]));
      }
    }
    int classes = 0;
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      bool seen = false;
      for (std::size_t j = 0; j < i; ++j) {
        if (std::abs(std::abs(dirs[i].dot(dirs[j])) - 1.0) < 1e-12) seen = true;
      }
      if (!seen) ++classes;
    }
    const int n = count_unique_axes(s);
    ASSERT_EQ(n, classes) << bits;
    ASSERT_LE(n, 7);
  }
}

TEST(MinAxisAngle, TableValues) {
  EXPECT_NEAR(min_axis_angle(*builtin_arrangement("ADP-8")), 54.7, 0.05);
  EXPECT_NEAR(min_axis_angle(*builtin_arrangement("C4-based-12")), 45.0, 0.05);
  EXPECT_NEAR(min_axis_angle(*builtin_arrangement("C2-based-12")), 45.0, 0.05);
}

TEST(MinAxisAngle, AdpIsArccosOfInverseSqrt3) {
  const double expected_rad = std::acos(kInvSqrt3);
  EXPECT_NEAR(min_axis_angle(*builtin_arrangement("ADP-8")) * std::numbers::pi / 180.0, expected_rad, 1e-9);
}

TEST(MinAxisAngle, DegenerateArrangement) {
  const std::vector<Eigen::Vector3d> one_axis = {Eigen::Vector3d::UnitZ(), -Eigen::Vector3d::UnitZ()};
  try {
    min_axis_angle(one_axis);
    FAIL() << "expected degenerate-arrangement error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateArrangement);
  }
}

TEST(BuiltinArrangements, CountsAndNorms) {
  const auto all = builtin_arrangements();
  ASSERT_EQ(all.size(), 3u);
  EXPECT_EQ(builtin_arrangement("ADP-8")->auxiliary.size(), 8u);
  EXPECT_EQ(builtin_arrangement("C4-based-12")->auxiliary.size(), 12u);
  EXPECT_EQ(builtin_arrangement("C2-based-12")->auxiliary.size(), 12u);
  for (const Arrangement& a : all) {
    for (const Eigen::Vector3d& v : a.auxiliary) EXPECT_NEAR(v.norm(), 1.0, 1e-15);
    EXPECT_EQ(a.with_vanishing_points().size(), a.auxiliary.size() + 6);
  }
  EXPECT_FALSE(builtin_arrangement("C3-based-24").has_value());
}

TEST(OctahedralGroup, TwentyFourDistinctRotations) {
  const auto group = octahedral_group();
  ASSERT_EQ(group.size(), 24u);
  for (std::size_t i = 0; i < group.size(); ++i) {
    EXPECT_NEAR(group[i].determinant(), 1.0, 1e-12);
    for (std::size_t j = 0; j < i; ++j) EXPECT_GT((group[i] - group[j]).norm(), 0.5);
  }
}

TEST(VerifyOctahedralSymmetry, Examples) {
  EXPECT_TRUE(verify_octahedral_symmetry(builtin_arrangement("ADP-8")->with_vanishing_points()));
  EXPECT_TRUE(verify_octahedral_symmetry(builtin_arrangement("C2-based-12")->with_vanishing_points()));
  std::vector<Eigen::Vector3d> vps = vanishing_point_directions();
  EXPECT_TRUE(verify_octahedral_symmetry(vps));
  vps.pop_back();
  EXPECT_FALSE(verify_octahedral_symmetry(vps));
}

}  // namespace
}  // namespace mwcalib
