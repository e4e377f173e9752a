#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace mwcalib {

// Six vanishing points and eight auxiliary diagonal points (cube corners).
enum class Label : std::uint8_t {
  kFront, kBack, kLeft, kRight, kTop, kBottom,
  kFLT, kFRT, kFLB, kFRB, kBLT, kBRT, kBLB, kBRB,
};

inline constexpr std::size_t kNumLabels = 14;

inline constexpr std::array<Label, kNumLabels> kAllLabels = {
    Label::kFront, Label::kBack, Label::kLeft, Label::kRight, Label::kTop,
    Label::kBottom, Label::kFLT, Label::kFRT, Label::kFLB, Label::kFRB,
    Label::kBLT, Label::kBRT, Label::kBLB, Label::kBRB};

// The 13 labels predicted by the keypoint estimator (back is dropped after
// direction alignment).
inline constexpr std::array<Label, 13> kUsedLabels = {
    Label::kFront, Label::kLeft, Label::kRight, Label::kTop, Label::kBottom,
    Label::kFLT, Label::kFRT, Label::kFLB, Label::kFRB,
    Label::kBLT, Label::kBRT, Label::kBLB, Label::kBRB};

std::string_view label_name(Label label);
// Case-insensitive; accepts "front", "FLT", "flt", ...
std::optional<Label> parse_label(std::string_view name);

constexpr std::size_t index_of(Label label) { return static_cast<std::size_t>(label); }
bool is_vanishing_point(Label label);

// Unit direction in Manhattan coordinates (X right, Y down, Z along the road).
Eigen::Vector3d direction_of(Label label);

// Label coordinate on a W x H equirectangular panorama.
Eigen::Vector2d panorama_coord(Label label, double width, double height);

Label antipode(Label label);
// Relabeling induced by a 180 degree rotation about Y_M.
Label rotate_y180(Label label);
// Undirected axis class in [0, 7).
int axis_of(Label label);

class LabelSet {
 public:
  LabelSet() = default;
  LabelSet(std::initializer_list<Label> labels) {
    for (Label l : labels) insert(l);
  }

  void insert(Label l) { bits_ |= bit(l); }
  void erase(Label l) { bits_ &= static_cast<std::uint16_t>(~bit(l)); }
  bool contains(Label l) const { return (bits_ & bit(l)) != 0; }
  bool empty() const { return bits_ == 0; }
  std::size_t size() const;
  std::vector<Label> labels() const;
  std::uint16_t bits() const { return bits_; }

  friend bool operator==(const LabelSet&, const LabelSet&) = default;

 private:
  static std::uint16_t bit(Label l) { return static_cast<std::uint16_t>(1u << index_of(l)); }
  std::uint16_t bits_ = 0;
};

struct AlignmentResult {
  LabelSet labels;
  bool applied = false;
};

// Relabels by the Y_M 180 degree rotation iff (1) back is present without
// front, or (2) right is present without front and left.
AlignmentResult align_directions(const LabelSet& labels);
bool alignment_required(const LabelSet& labels);

int count_unique_axes(const LabelSet& labels);

// Named set of auxiliary unit directions; the six vanishing points are added
// implicitly by with_vanishing_points().
struct Arrangement {
  std::string name;
  std::vector<Eigen::Vector3d> auxiliary;

  std::vector<Eigen::Vector3d> with_vanishing_points() const;
};

std::vector<Eigen::Vector3d> vanishing_point_directions();

// ADP-8, C4-based-12 and C2-based-12. The last two are the same 12 edge
// midpoint directions and are kept under both names.
std::vector<Arrangement> builtin_arrangements();
std::optional<Arrangement> builtin_arrangement(std::string_view name);

// Minimum angle in degrees between distinct undirected axes of the VP plus
// auxiliary set. Throws kDegenerateArrangement with fewer than two axes.
double min_axis_angle(const Arrangement& arrangement);
double min_axis_angle(std::span<const Eigen::Vector3d> directions);

// The 24 proper rotations of the octahedral group, generated from 90 degree
// turns about X_M and Y_M.
std::vector<Eigen::Matrix3d> octahedral_group();

// True iff the direction set maps onto itself under every octahedral
// rotation (tolerance 1e-9).
bool verify_octahedral_symmetry(std::span<const Eigen::Vector3d> directions);

}  // namespace mwcalib
