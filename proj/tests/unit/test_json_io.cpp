#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "mwcalib/error.hpp"
#include "mwcalib/json_io.hpp"

namespace mwcalib {
namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kInvalidArgument;
}

TEST(JsonIo, ParamsRoundTrip) {
  const CameraParams p = CameraParams::create(5.25, -0.0375, 320, 240);
  const Json j = to_json(p);
  EXPECT_EQ(params_from_json(j), p);
  EXPECT_DOUBLE_EQ(j["d_u"].get<double>(), 0.1);
  EXPECT_DOUBLE_EQ(j["c_u"].get<double>(), 160.0);
  EXPECT_FALSE(j.contains("eta_cap_deg"));
}

TEST(JsonIo, ParamsRejectInconsistentPitch) {
  Json j = to_json(CameraParams::create(5.0, 0.0, 224, 224));
  j["d_v"] = 0.2;
  EXPECT_EQ(code_of([&] { params_from_json(j); }), ErrorCode::kInvalidArgument);
  Json center = to_json(CameraParams::create(5.0, 0.0, 224, 224));
  center["c_u"] = 100.0;
  EXPECT_EQ(code_of([&] { params_from_json(center); }), ErrorCode::kInvalidArgument);
  Json missing = {{"f_mm", 5.0}};
  EXPECT_EQ(code_of([&] { params_from_json(missing); }), ErrorCode::kParse);
}

TEST(JsonIo, EulerAndMatrixRoundTrip) {
  const EulerPTR e{12.5, -3.25, 40.0};
  EXPECT_EQ(euler_from_json(to_json(e)), e);
  const Eigen::Matrix3d r = compose(e);
  EXPECT_EQ(matrix_from_json(to_json(r)), r);
}

TEST(JsonIo, DetectionsDefaultScore) {
  const Json j = Json::parse(R"([{"label": "FRT", "u": 10.5, "v": 20.25}])");
  const Detections d = detections_from_json(j);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].label, Label::kFRT);
  EXPECT_EQ(d[0].px, Eigen::Vector2d(10.5, 20.25));
  EXPECT_EQ(d[0].score, 1.0);
  const Json bad = Json::parse(R"([{"label": "nowhere", "u": 1, "v": 2}])");
  EXPECT_EQ(code_of([&] { detections_from_json(bad); }), ErrorCode::kParse);
}

TEST(JsonIo, GroundTruthRoundTrip) {
  const GroundTruth gt = make_ground_truth(CameraParams::create(6.0, 0.02, 224, 224), {170.0, 5.0, -3.0});
  const GroundTruth back = ground_truth_from_json(to_json(gt));
  EXPECT_EQ(back.params, gt.params);
  EXPECT_EQ(back.euler, gt.euler);
  EXPECT_EQ(back.rotation, gt.rotation);
  EXPECT_EQ(back.alignment_applied, gt.alignment_applied);
  ASSERT_EQ(back.keypoints.size(), gt.keypoints.size());
  for (std::size_t i = 0; i < gt.keypoints.size(); ++i) {
    EXPECT_EQ(back.keypoints[i].label, gt.keypoints[i].label);
    EXPECT_EQ(back.keypoints[i].px, gt.keypoints[i].px);
  }
}

TEST(JsonIo, SamplingConfigPartialAndUnknown) {
  const SamplingConfig c = sampling_config_from_json(Json::parse(R"({"pan_deg": [-10, 10]})"));
  EXPECT_EQ(c.pan_min_deg, -10.0);
  EXPECT_EQ(c.tilt_max_deg, SamplingConfig{}.tilt_max_deg);
  EXPECT_EQ(code_of([] { sampling_config_from_json(Json::parse(R"({"yaw": [0, 1]})")); }),
            ErrorCode::kParse);
  EXPECT_EQ(code_of([] { sampling_config_from_json(Json::parse(R"({"k1": [0.1, -0.1]})")); }),
            ErrorCode::kEmptyRange);
  const SamplingConfig d;
  const SamplingConfig back = sampling_config_from_json(to_json(d));
  EXPECT_DOUBLE_EQ(back.f_min_mm, d.f_min_mm);
  EXPECT_DOUBLE_EQ(back.eta_cap, d.eta_cap);
}

TEST(JsonIo, ArrangementForms) {
  const Json list = Json::parse("[[1, 0, 0], [0, 0.6, 0.8]]");
  const Arrangement a = arrangement_from_json(list, "custom");
  EXPECT_EQ(a.name, "custom");
  EXPECT_EQ(a.auxiliary.size(), 2u);
  const Json named = {{"name", "pair"}, {"points", list}};
  EXPECT_EQ(arrangement_from_json(named, "x").name, "pair");
  EXPECT_THROW(arrangement_from_json(Json::parse("[[1, 1, 0]]"), "x"), Error);
}

TEST(JsonIo, EstimateSchema) {
  const GroundTruth gt = make_ground_truth(CameraParams::create(6.0, 0.0, 224, 224), {10, 5, 0});
  const Json j = to_json(estimate_rotation(gt.keypoints, gt.params));
  for (const char* key : {"euler_ptr_deg", "rodrigues", "quaternion_xyzw", "rotation_matrix", "diagnostics"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["diagnostics"]["degenerate_case"], "none");
}

TEST(JsonIo, ReportNamesRepeDefinition) {
  const Json j = to_json(EvalReport{});
  EXPECT_EQ(j["repe_definition"], "REPE (repo definition)");
  EXPECT_TRUE(j["keypoints"].contains("pck"));
}

TEST(JsonIo, FileErrorsNameThePath) {
  const auto dir = std::filesystem::temp_directory_path() / "mwcalib_json_io_test";
  std::filesystem::create_directories(dir);
  const auto bad = dir / "broken.json";
  std::ofstream(bad) << "{ not json";
  try {
    read_json_file(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
    EXPECT_NE(std::string(e.what()).find("broken.json"), std::string::npos);
  }
  EXPECT_EQ(code_of([&] { read_json_file(dir / "missing.json"); }), ErrorCode::kIo);
  const auto good = dir / "good.json";
  write_json_file(good, Json{{"a", 1}});
  EXPECT_EQ(read_json_file(good)["a"], 1);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace mwcalib
