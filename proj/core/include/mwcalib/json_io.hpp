#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "mwcalib/camera_model.hpp"
#include "mwcalib/keypoint.hpp"
#include "mwcalib/manhattan_frame.hpp"
#include "mwcalib/metrics.hpp"
#include "mwcalib/rotation_estimation.hpp"
#include "mwcalib/so3.hpp"
#include "mwcalib/synthesis.hpp"

namespace mwcalib {

// Insertion-ordered so that serialized output is stable byte for byte.
using Json = nlohmann::ordered_json;

// Parse / write helpers. Failures raise kIo or kParse naming the file.
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& value);
std::string dump_json(const Json& value);

// {"f_mm", "k1", "image_w", "image_h", "d_u", "d_v", "c_u", "c_v"} plus
// "eta_cap_deg" when not the default. On read the derived pitch and principal
// point are optional but must agree with image_w / image_h.
Json to_json(const CameraParams& params);
CameraParams params_from_json(const Json& j);

// {"pan", "tilt", "roll"} in degrees.
Json to_json(const EulerPTR& euler);
EulerPTR euler_from_json(const Json& j);

Json to_json(const Eigen::Matrix3d& m);
Eigen::Matrix3d matrix_from_json(const Json& j);

// [{"label", "u", "v", "score"}]; score defaults to 1.
Json to_json(const Detections& detections, bool with_score = true);
Detections detections_from_json(const Json& j);

// Sidecar written next to each generated image.
Json to_json(const GroundTruth& gt);
GroundTruth ground_truth_from_json(const Json& j);

Json to_json(const RotationDiagnostics& d);
Json to_json(const RotationEstimate& estimate);

Json to_json(const SamplingConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
SamplingConfig sampling_config_from_json(const Json& j);

Json to_json(const AngleErrors& e);
Json to_json(const EvalReport& report);

// Either a bare list of unit 3-vectors or {"name", "points"}.
Arrangement arrangement_from_json(const Json& j, std::string_view fallback_name);

}  // namespace mwcalib
