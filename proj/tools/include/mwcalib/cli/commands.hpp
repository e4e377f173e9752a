#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mwcalib/json_io.hpp"
#include "mwcalib/synthesis.hpp"

namespace mwcalib::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitTotalFailure = 3;

// Bad flags, unreadable config or missing inputs; maps to kExitConfig.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace fs = std::filesystem;

struct GenerateOptions {
  std::optional<fs::path> pano_dir;
  int procedural_panoramas = 4;
  int procedural_height = 256;
  int count = 10;
  std::uint64_t seed = 0;
  fs::path out;
  int jobs = 1;
  SamplingConfig sampling;
};

struct CalibrateOptions {
  // Batch mode: a generated dataset directory (sidecars give intrinsics and,
  // without another source, oracle detections).
  std::optional<fs::path> gt_dir;
  std::optional<fs::path> detections_dir;
  std::optional<fs::path> heatmap_dir;
  // Single-image mode.
  std::optional<fs::path> detections_file;
  std::optional<fs::path> params_file;
  double noise_sigma_px = 0.0;
  double dropout = 0.0;
  double min_score = 0.0;
  std::uint64_t seed = 0;
  std::optional<fs::path> out;
  int jobs = 1;
};

struct RectifyOptions {
  fs::path image;
  fs::path params_file;
  Face face = Face::kFront;
  std::optional<EulerPTR> euler;
  // A calibrate output or generate sidecar carrying rotation_matrix.
  std::optional<fs::path> rotation_file;
  double fov_deg = 90.0;
  int size = 256;
  fs::path out;
  std::optional<fs::path> mask_out;
};

struct EvaluateOptions {
  fs::path pred_dir;
  fs::path gt_dir;
  fs::path out;
  std::optional<fs::path> csv;
  // Fisheye images (<id>.png); enables rectification PSNR / SSIM.
  std::optional<fs::path> image_dir;
  int repe_samples = kDefaultRepeSamples;
  int jobs = 1;
};

struct AnalyzeOptions {
  std::vector<std::string> names;
  std::vector<fs::path> files;
  std::optional<fs::path> out;
};

struct SimulateOptions {
  std::vector<double> sigmas = {0.0, 1.0, 3.1, 5.0};
  std::vector<double> dropouts = {0.0};
  int count = 1000;
  std::uint64_t seed = 0;
  int jobs = 1;
  int repe_samples = kDefaultRepeSamples;
  SamplingConfig sampling;
  std::optional<fs::path> out;
};

int cmd_generate(const GenerateOptions& options, std::ostream& log);
int cmd_calibrate(const CalibrateOptions& options, std::ostream& log);
int cmd_rectify(const RectifyOptions& options, std::ostream& log);
int cmd_evaluate(const EvaluateOptions& options, std::ostream& log);
int cmd_analyze_arrangement(const AnalyzeOptions& options, std::ostream& log);
int cmd_simulate(const SimulateOptions& options, std::ostream& log);

// Ids of a generated dataset: manifest order when present, otherwise sorted
// sidecar stems.
std::vector<std::string> dataset_ids(const fs::path& dir);

}  // namespace mwcalib::cli
