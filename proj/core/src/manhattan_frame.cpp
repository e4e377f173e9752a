#include "mwcalib/manhattan_frame.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Geometry>

#include "mwcalib/error.hpp"

namespace mwcalib {

namespace {

struct LabelInfo {
  std::string_view name;
  Eigen::Vector3d raw;  // unnormalized direction
  double pano_x;        // fraction of W
  double pano_y;        // fraction of H
  Label antipode;
  Label y180;
  int axis;
};

const std::array<LabelInfo, kNumLabels>& table() {
  using L = Label;
  static const std::array<LabelInfo, kNumLabels> t = {{
      {"front", {0, 0, 1}, 0.5, 0.5, L::kBack, L::kBack, 0},
      {"back", {0, 0, -1}, 0.0, 0.5, L::kFront, L::kFront, 0},
      {"left", {-1, 0, 0}, 0.25, 0.5, L::kRight, L::kRight, 1},
      {"right", {1, 0, 0}, 0.75, 0.5, L::kLeft, L::kLeft, 1},
      {"top", {0, -1, 0}, 0.0, 0.0, L::kBottom, L::kTop, 2},
      {"bottom", {0, 1, 0}, 0.0, 1.0, L::kTop, L::kBottom, 2},
      {"FLT", {-1, -1, 1}, 3.0 / 8, 0.25, L::kBRB, L::kBRT, 3},
      {"FRT", {1, -1, 1}, 5.0 / 8, 0.25, L::kBLB, L::kBLT, 4},
      {"FLB", {-1, 1, 1}, 3.0 / 8, 0.75, L::kBRT, L::kBRB, 5},
      {"FRB", {1, 1, 1}, 5.0 / 8, 0.75, L::kBLT, L::kBLB, 6},
      {"BLT", {-1, -1, -1}, 1.0 / 8, 0.25, L::kFRB, L::kFRT, 6},
      {"BRT", {1, -1, -1}, 7.0 / 8, 0.25, L::kFLB, L::kFLT, 5},
      {"BLB", {-1, 1, -1}, 1.0 / 8, 0.75, L::kFRT, L::kFRB, 4},
      {"BRB", {1, 1, -1}, 7.0 / 8, 0.75, L::kFLT, L::kFLB, 3},
  }};
  return t;
}

const LabelInfo& info(Label label) { return table()[index_of(label)]; }

bool same_direction(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double tol) {
  return (a - b).lpNorm<Eigen::Infinity>() <= tol;
}

}  // namespace

std::string_view label_name(Label label) { return info(label).name; }

std::optional<Label> parse_label(std::string_view name) {
  for (Label l : kAllLabels) {
    const std::string_view ref = label_name(l);
    if (ref.size() == name.size() &&
        std::equal(ref.begin(), ref.end(), name.begin(), [](char a, char b) {
          return std::tolower(static_cast<unsigned char>(a)) ==
                 std::tolower(static_cast<unsigned char>(b));
        })) {
      return l;
    }
  }
  return std::nullopt;
}

bool is_vanishing_point(Label label) { return index_of(label) < 6; }

Eigen::Vector3d direction_of(Label label) {
  const Eigen::Vector3d& raw = info(label).raw;
  return is_vanishing_point(label) ? raw : Eigen::Vector3d(raw / std::sqrt(3.0));
}

Eigen::Vector2d panorama_coord(Label label, double width, double height) {
  const LabelInfo& i = info(label);
  return {i.pano_x * width, i.pano_y * height};
}

Label antipode(Label label) { return info(label).antipode; }
Label rotate_y180(Label label) { return info(label).y180; }
int axis_of(Label label) { return info(label).axis; }

std::size_t LabelSet::size() const { return static_cast<std::size_t>(std::popcount(bits_)); }

std::vector<Label> LabelSet::labels() const {
  std::vector<Label> out;
  for (Label l : kAllLabels) {
    if (contains(l)) out.push_back(l);
  }
  return out;
}

bool alignment_required(const LabelSet& s) {
  const bool front = s.contains(Label::kFront);
  const bool back_without_front = s.contains(Label::kBack) && !front;
  const bool right_alone = s.contains(Label::kRight) && !front && !s.contains(Label::kLeft);
  return back_without_front || right_alone;
}

AlignmentResult align_directions(const LabelSet& labels) {
  if (!alignment_required(labels)) {
    return {labels, false};
  }
  LabelSet out;
  for (Label l : labels.labels()) {
    out.insert(rotate_y180(l));
  }
  return {out, true};
}

int count_unique_axes(const LabelSet& labels) {
  std::uint8_t axes = 0;
  for (Label l : labels.labels()) {
    axes |= static_cast<std::uint8_t>(1u << axis_of(l));
  }
  return std::popcount(axes);
}

std::vector<Eigen::Vector3d> vanishing_point_directions() {
  std::vector<Eigen::Vector3d> out;
  for (Label l : kAllLabels) {
    if (is_vanishing_point(l)) out.push_back(direction_of(l));
  }
  return out;
}

std::vector<Eigen::Vector3d> Arrangement::with_vanishing_points() const {
  std::vector<Eigen::Vector3d> out = vanishing_point_directions();
  out.insert(out.end(), auxiliary.begin(), auxiliary.end());
  return out;
}

std::vector<Arrangement> builtin_arrangements() {
  Arrangement adp{"ADP-8", {}};
  for (Label l : kAllLabels) {
    if (!is_vanishing_point(l)) adp.auxiliary.push_back(direction_of(l));
  }

  // Bisectors of two coordinate axes == midpoints of the cube edges.
  std::vector<Eigen::Vector3d> edges;
  const double h = 1.0 / std::sqrt(2.0);
  for (int zero_axis = 0; zero_axis < 3; ++zero_axis) {
    for (double a : {h, -h}) {
      for (double b : {h, -h}) {
        Eigen::Vector3d v = Eigen::Vector3d::Zero();
        v[(zero_axis + 1) % 3] = a;
        v[(zero_axis + 2) % 3] = b;
        edges.push_back(v);
      }
    }
  }
  return {adp, Arrangement{"C4-based-12", edges}, Arrangement{"C2-based-12", edges}};
}

std::optional<Arrangement> builtin_arrangement(std::string_view name) {
  for (Arrangement& a : builtin_arrangements()) {
    if (a.name == name) return std::move(a);
  }
  return std::nullopt;
}

double min_axis_angle(std::span<const Eigen::Vector3d> dirs) {
  constexpr double kSameAxis = 1e-9;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    for (std::size_t j = i + 1; j < dirs.size(); ++j) {
      const double c = std::clamp(std::abs(dirs[i].normalized().dot(dirs[j].normalized())), 0.0, 1.0);
      // acos loses precision near 1; use the cross product for the angle.
      const double s = dirs[i].normalized().cross(dirs[j].normalized()).norm();
      const double angle = std::atan2(s, c);
      if (angle > kSameAxis) best = std::min(best, angle);
    }
  }
  if (!std::isfinite(best)) {
    throw Error(ErrorCode::kDegenerateArrangement, "arrangement spans fewer than two axes");
  }
  return best * 180.0 / std::numbers::pi;
}

double min_axis_angle(const Arrangement& arrangement) {
  const std::vector<Eigen::Vector3d> all = arrangement.with_vanishing_points();
  return min_axis_angle(std::span<const Eigen::Vector3d>(all));
}

std::vector<Eigen::Matrix3d> octahedral_group() {
  Eigen::Matrix3d gx;
  gx << 1, 0, 0, 0, 0, -1, 0, 1, 0;
  Eigen::Matrix3d gy;
  gy << 0, 0, 1, 0, 1, 0, -1, 0, 0;

  std::vector<Eigen::Matrix3d> group{Eigen::Matrix3d::Identity()};
  for (std::size_t k = 0; k < group.size(); ++k) {
    for (const Eigen::Matrix3d& gen : {gx, gy}) {
      const Eigen::Matrix3d cand = gen * group[k];
      const bool known = std::any_of(group.begin(), group.end(), [&](const Eigen::Matrix3d& m) {
        return (m - cand).cwiseAbs().maxCoeff() < 1e-12;
      });
      if (!known) group.push_back(cand);
    }
  }
  return group;
}

bool verify_octahedral_symmetry(std::span<const Eigen::Vector3d> dirs) {
  constexpr double kTol = 1e-9;
  for (const Eigen::Matrix3d& g : octahedral_group()) {
    for (const Eigen::Vector3d& d : dirs) {
      const Eigen::Vector3d image = g * d;
      const bool found = std::any_of(dirs.begin(), dirs.end(), [&](const Eigen::Vector3d& e) {
        return same_direction(image, e, kTol);
      });
      if (!found) return false;
    }
  }
  return true;
}

}  // namespace mwcalib
