#include "mwcalib/json_io.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <utility>

#include "mwcalib/error.hpp"

namespace mwcalib {

namespace {

[[noreturn]] void parse_error(const std::string& what) { throw Error(ErrorCode::kParse, what); }

const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) parse_error(std::string("expected an object with key '") + key + "'");
  const auto it = j.find(key);
  if (it == j.end()) parse_error(std::string("missing key '") + key + "'");
  return *it;
}

double number(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number()) parse_error(std::string("key '") + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) parse_error(std::string("key '") + key + "' is not finite");
  return d;
}

int integer(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number_integer()) parse_error(std::string("key '") + key + "' must be an integer");
  return v.get<int>();
}

Eigen::Vector3d vector3(const Json& j) {
  if (!j.is_array() || j.size() != 3) parse_error("expected a 3-vector");
  Eigen::Vector3d v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) parse_error("3-vector entries must be numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

constexpr double kDeg = 180.0 / std::numbers::pi;

const char* angle_name(EulerAngle a) {
  switch (a) {
    case EulerAngle::kPan: return "pan";
    case EulerAngle::kTilt: return "tilt";
    case EulerAngle::kRoll: return "roll";
  }
  return "?";
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

std::string dump_json(const Json& value) { return value.dump(2) + "\n"; }

void write_json_file(const std::filesystem::path& path, const Json& value) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << dump_json(value);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

Json to_json(const CameraParams& p) {
  Json j;
  j["f_mm"] = p.f_mm();
  j["k1"] = p.k1();
  j["image_w"] = p.image_w();
  j["image_h"] = p.image_h();
  j["d_u"] = p.d_u();
  j["d_v"] = p.d_v();
  j["c_u"] = p.c_u();
  j["c_v"] = p.c_v();
  if (p.eta_cap() != kDefaultEtaCap) j["eta_cap_deg"] = p.eta_cap() * kDeg;
  return j;
}

CameraParams params_from_json(const Json& j) {
  const double eta_cap = j.contains("eta_cap_deg") ? number(j, "eta_cap_deg") / kDeg : kDefaultEtaCap;
  CameraParams p = CameraParams::create(number(j, "f_mm"), number(j, "k1"), integer(j, "image_w"),
                                        integer(j, "image_h"), eta_cap);
  const std::pair<const char*, double> derived[] = {
      {"d_u", p.d_u()}, {"d_v", p.d_v()}, {"c_u", p.c_u()}, {"c_v", p.c_v()}};
  for (const auto& [key, value] : derived) {
    if (j.contains(key) && std::abs(number(j, key) - value) > 1e-9) {
      std::ostringstream msg;
      msg << "'" << key << "' = " << number(j, key) << " disagrees with the derived value " << value;
      throw Error(ErrorCode::kInvalidArgument, msg.str());
    }
  }
  return p;
}

Json to_json(const EulerPTR& e) {
  return Json{{"pan", e.pan_deg}, {"tilt", e.tilt_deg}, {"roll", e.roll_deg}};
}

EulerPTR euler_from_json(const Json& j) {
  return {number(j, "pan"), number(j, "tilt"), number(j, "roll")};
}

Json to_json(const Eigen::Matrix3d& m) {
  Json rows = Json::array();
  for (int r = 0; r < 3; ++r) rows.push_back(Json::array({m(r, 0), m(r, 1), m(r, 2)}));
  return rows;
}

Eigen::Matrix3d matrix_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) parse_error("rotation_matrix must be 3x3");
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) m.row(r) = vector3(j[r]).transpose();
  return m;
}

Json to_json(const Detections& dets, bool with_score) {
  Json arr = Json::array();
  for (const Detection& d : dets) {
    Json item;
    item["label"] = std::string(label_name(d.label));
    item["u"] = d.px.x();
    item["v"] = d.px.y();
    if (with_score) item["score"] = d.score;
    arr.push_back(std::move(item));
  }
  return arr;
}

Detections detections_from_json(const Json& j) {
  if (!j.is_array()) parse_error("detections must be a list");
  Detections out;
  for (const Json& item : j) {
    const Json& name = field(item, "label");
    if (!name.is_string()) parse_error("label must be a string");
    const auto label = parse_label(name.get<std::string>());
    if (!label) parse_error("unknown label '" + name.get<std::string>() + "'");
    Detection d{*label, {number(item, "u"), number(item, "v")}, 1.0};
    if (item.contains("score")) d.score = number(item, "score");
    out.push_back(d);
  }
  return out;
}

Json to_json(const GroundTruth& gt) {
  Json j;
  j["params"] = to_json(gt.params);
  j["euler_ptr_deg"] = to_json(gt.euler);
  j["rotation_matrix"] = to_json(gt.rotation);
  j["alignment_applied"] = gt.alignment_applied;
  j["keypoints"] = to_json(gt.keypoints, false);
  return j;
}

GroundTruth ground_truth_from_json(const Json& j) {
  GroundTruth gt{params_from_json(field(j, "params")), euler_from_json(field(j, "euler_ptr_deg")),
                 Eigen::Matrix3d::Identity(), detections_from_json(field(j, "keypoints")), false};
  gt.rotation = j.contains("rotation_matrix") ? matrix_from_json(j["rotation_matrix"])
                                              : compose(gt.euler);
  if (j.contains("alignment_applied")) gt.alignment_applied = j["alignment_applied"].get<bool>();
  return gt;
}

Json to_json(const RotationDiagnostics& d) {
  Json j;
  j["num_detections"] = d.num_detections;
  j["unique_axes"] = d.unique_axes;
  j["condition_number"] = d.condition_number;
  j["degenerate_case"] = std::string(to_string(d.degenerate_case));
  j["zeroed_angle"] = d.zeroed_angle ? Json(angle_name(*d.zeroed_angle)) : Json(nullptr);
  j["procrustes_fallback"] = d.procrustes_fallback;
  j["gimbal_degenerate"] = d.gimbal_degenerate;
  j["undetermined"] = d.undetermined;
  return j;
}

Json to_json(const RotationEstimate& est) {
  Json j;
  j["euler_ptr_deg"] = to_json(est.euler);
  const Eigen::Vector3d g = est.rotation.gibbs();
  j["rodrigues"] = std::isfinite(g.squaredNorm()) ? Json::array({g.x(), g.y(), g.z()})
                                                  : Json(nullptr);
  const QuaternionXYZW& q = est.rotation.quaternion();
  j["quaternion_xyzw"] = Json::array({q[0], q[1], q[2], q[3]});
  j["rotation_matrix"] = to_json(est.rotation.matrix());
  j["diagnostics"] = to_json(est.diagnostics);
  return j;
}

Json to_json(const SamplingConfig& c) {
  Json j;
  j["image_w"] = c.image_w;
  j["image_h"] = c.image_h;
  j["eta_cap_deg"] = c.eta_cap * kDeg;
  j["f_mm"] = Json::array({c.f_min_mm, c.f_max_mm});
  j["k1"] = Json::array({c.k1_min, c.k1_max});
  j["pan_deg"] = Json::array({c.pan_min_deg, c.pan_max_deg});
  j["tilt_deg"] = Json::array({c.tilt_min_deg, c.tilt_max_deg});
  j["roll_deg"] = Json::array({c.roll_min_deg, c.roll_max_deg});
  return j;
}

SamplingConfig sampling_config_from_json(const Json& j) {
  if (!j.is_object()) parse_error("sampling config must be an object");
  SamplingConfig c;
  auto range = [&](const char* key, double& lo, double& hi) {
    if (!j.contains(key)) return;
    const Json& r = j[key];
    if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number()) {
      parse_error(std::string("'") + key + "' must be [min, max]");
    }
    lo = r[0].get<double>();
    hi = r[1].get<double>();
  };
  static const std::set<std::string> known = {"image_w", "image_h", "eta_cap_deg", "f_mm",
                                              "k1", "pan_deg", "tilt_deg", "roll_deg"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) parse_error("unknown sampling key '" + key + "'");
  }
  if (j.contains("image_w")) c.image_w = integer(j, "image_w");
  if (j.contains("image_h")) c.image_h = integer(j, "image_h");
  if (j.contains("eta_cap_deg")) c.eta_cap = number(j, "eta_cap_deg") / kDeg;
  range("f_mm", c.f_min_mm, c.f_max_mm);
  range("k1", c.k1_min, c.k1_max);
  range("pan_deg", c.pan_min_deg, c.pan_max_deg);
  range("tilt_deg", c.tilt_min_deg, c.tilt_max_deg);
  range("roll_deg", c.roll_min_deg, c.roll_max_deg);
  c.validate();
  return c;
}

Json to_json(const AngleErrors& e) {
  return Json{{"pan", e.pan}, {"tilt", e.tilt}, {"roll", e.roll}};
}

Json to_json(const EvalReport& r) {
  Json j;
  j["total"] = r.total;
  j["successes"] = r.successes;
  j["executable_rate"] = r.executable_rate;
  j["mae_deg"] = to_json(r.angle_mae);
  j["f_mae_mm"] = r.f_mae_mm;
  j["k1_mae"] = r.k1_mae;
  j["repe_definition"] = "REPE (repo definition)";
  j["repe_px"] = optional_number(r.repe_px);
  j["repe_failures"] = r.repe_failures;
  const KeypointReport& k = r.keypoints;
  Json kp;
  kp["ap"] = k.ap_ar.ap;
  kp["ap50"] = k.ap_ar.ap50;
  kp["ap75"] = k.ap_ar.ap75;
  kp["ar"] = k.ap_ar.ar;
  kp["ar50"] = k.ap_ar.ar50;
  kp["ar75"] = k.ap_ar.ar75;
  kp["pck"] = k.pck;
  Json dist;
  for (Label l : kAllLabels) dist[std::string(label_name(l))] = optional_number(k.mean_distance[index_of(l)]);
  kp["mean_distance_px"] = std::move(dist);
  kp["mean_distance_vp_px"] = optional_number(k.mean_distance_vp);
  kp["mean_distance_adp_px"] = optional_number(k.mean_distance_adp);
  kp["mean_distance_all_px"] = optional_number(k.mean_distance_all);
  j["keypoints"] = std::move(kp);
  j["psnr_db"] = optional_number(r.psnr_db);
  j["ssim"] = optional_number(r.ssim);
  return j;
}

Arrangement arrangement_from_json(const Json& j, std::string_view fallback_name) {
  Arrangement a{std::string(fallback_name), {}};
  const Json* points = &j;
  if (j.is_object()) {
    if (j.contains("name")) a.name = j["name"].get<std::string>();
    points = &field(j, "points");
  }
  if (!points->is_array()) parse_error("arrangement must be a list of 3-vectors");
  for (const Json& p : *points) {
    const Eigen::Vector3d v = vector3(p);
    if (std::abs(v.norm() - 1.0) > 1e-6) {
      std::ostringstream msg;
      msg << "arrangement point (" << v.transpose() << ") is not a unit vector";
      throw Error(ErrorCode::kInvalidArgument, msg.str());
    }
    a.auxiliary.push_back(v);
  }
  return a;
}

}  // namespace mwcalib
