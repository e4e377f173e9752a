#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif
#include "mwcalib/cli/commands.hpp"
#include "mwcalib/error.hpp"
#include "mwcalib/parallel.hpp"

namespace {

using mwcalib::Json;
using namespace mwcalib::cli;

// A config-file key applied only when the matching flag was not given.
struct Binding {
  CLI::App* command;
  CLI::Option* option;
  std::string key;
  std::function<void(const Json&)> set;
};

class Bindings {
 public:
  // Adds a flag that can also be supplied as `key` in the --config file.
  template <typename T>
  CLI::Option* add(CLI::App* command, const std::string& flag, T& target, std::string key,
                   const std::string& description = "") {
    CLI::Option* option = command->add_option(flag, target, description);
    list_.push_back({command, option, std::move(key), [&target](const Json& j) { target = j.get<T>(); }});
    return option;
  }

  const std::vector<Binding>& list() const { return list_; }

 private:
  std::vector<Binding> list_;
};

std::optional<fs::path> opt_path(const std::string& s) {
  return s.empty() ? std::nullopt : std::optional<fs::path>(s);
}

int exit_code_for(const mwcalib::Error& e) {
  using mwcalib::ErrorCode;
  switch (e.code()) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kDomain:
    case ErrorCode::kEmptyRange:
    case ErrorCode::kIo:
    case ErrorCode::kParse:
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kLengthMismatch:
    case ErrorCode::kDegenerateArrangement:
      return kExitConfig;
    default:
      return kExitTotalFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fisheye camera calibration from Manhattan-world keypoints"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "JSON file with default option values")->check(CLI::ExistingFile);

  Bindings bind;
  std::string sampling_key = "sampling";
  std::uint64_t seed = 0;
  int jobs = mwcalib::default_jobs();
  std::string out;

  // generate
  GenerateOptions gen;
  std::string gen_pano_dir;
  auto* generate = app.add_subcommand("generate", "Render fisheye images and ground-truth sidecars");
  bind.add(generate, "--pano-dir", gen_pano_dir, "pano_dir",
           "Directory of 2:1 equirectangular PNG/JPEG panoramas");
  bind.add(generate, "--procedural", gen.procedural_panoramas, "procedural_panoramas",
           "Procedural panoramas used without --pano-dir");
  bind.add(generate, "--procedural-height", gen.procedural_height, "procedural_height");
  bind.add(generate, "--count", gen.count, "count", "Number of images");

  // calibrate
  CalibrateOptions cal;
  std::string cal_gt, cal_det_dir, cal_hm_dir, cal_det_file, cal_params;
  auto* calibrate = app.add_subcommand("calibrate", "Estimate camera rotation from keypoint detections");
  bind.add(calibrate, "--gt-dir", cal_gt, "gt_dir", "Dataset written by generate");
  bind.add(calibrate, "--detections-dir", cal_det_dir, "detections_dir",
           "Per-image detection JSON (<id>.json)");
  bind.add(calibrate, "--heatmap-dir", cal_hm_dir, "heatmap_dir", "Per-image raw heatmaps (<id>.bin)");
  calibrate->add_option("--detections", cal_det_file, "Single detection file")->check(CLI::ExistingFile);
  bind.add(calibrate, "--params", cal_params, "params", "Intrinsics override");
  bind.add(calibrate, "--noise", cal.noise_sigma_px, "noise_sigma_px", "Oracle detection noise sigma [px]");
  bind.add(calibrate, "--dropout", cal.dropout, "dropout", "Oracle detection dropout");
  bind.add(calibrate, "--min-score", cal.min_score, "min_score");

  // rectify
  RectifyOptions rect;
  std::string rect_image, rect_params, rect_face = "front", rect_rotation, rect_mask;
  std::vector<double> rect_euler;
  auto* rectify = app.add_subcommand("rectify", "Perspective view of one Manhattan face");
  rectify->add_option("--image", rect_image, "Fisheye image")->required()->check(CLI::ExistingFile);
  rectify->add_option("--params", rect_params, "Intrinsics JSON (or sidecar / calibrate output)")
      ->required()
      ->check(CLI::ExistingFile);
  rectify->add_option("--face", rect_face, "front, left, right, top or bottom");
  rectify->add_option("--euler", rect_euler, "pan,tilt,roll in degrees")->delimiter(',')->expected(3);
  rectify->add_option("--rotation", rect_rotation, "JSON file with rotation_matrix")
      ->check(CLI::ExistingFile);
  rectify->add_option("--fov", rect.fov_deg, "Output field of view [deg]");
  rectify->add_option("--size", rect.size, "Output size [px]");
  rectify->add_option("--mask-out", rect_mask, "Write the validity mask as PNG");

  // evaluate
  EvaluateOptions ev;
  std::string ev_pred, ev_gt, ev_csv, ev_images;
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against ground truth");
  bind.add(evaluate, "--pred-dir", ev_pred, "pred_dir");
  bind.add(evaluate, "--gt-dir", ev_gt, "gt_dir");
  evaluate->add_option("--csv", ev_csv, "Per-image rows");
  bind.add(evaluate, "--image-dir", ev_images, "image_dir", "Fisheye images for rectification PSNR/SSIM");
  bind.add(evaluate, "--repe-samples", ev.repe_samples, "repe_samples");

  // analyze-arrangement
  AnalyzeOptions an;
  std::vector<std::string> an_files;
  auto* analyze = app.add_subcommand("analyze-arrangement", "Minimum axis angle of point arrangements");
  analyze->add_option("--name", an.names, "Builtin arrangement (ADP-8, C4-based-12, C2-based-12)");
  analyze->add_option("--file", an_files, "JSON list of unit 3-vectors")->check(CLI::ExistingFile);

  // simulate
  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo noise sweep over the oracle pipeline");
  bind.add(simulate, "--sigmas", sim.sigmas, "sigmas", "Noise sigmas [px]")->delimiter(',');
  bind.add(simulate, "--dropouts", sim.dropouts, "dropouts", "Dropout levels")->delimiter(',');
  bind.add(simulate, "--count", sim.count, "count", "Images per row");
  bind.add(simulate, "--repe-samples", sim.repe_samples, "repe_samples");

  for (CLI::App* sub : {generate, calibrate, rectify, evaluate, analyze, simulate}) {
    bind.add(sub, "--seed", seed, "seed", "Master seed");
    bind.add(sub, "--jobs", jobs, "jobs", "Worker threads");
    bind.add(sub, "--out", out, "out", "Output path");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    mwcalib::SamplingConfig sampling;
    if (!config_path.empty()) {
      const Json config = mwcalib::read_json_file(config_path);
      if (!config.is_object()) throw ConfigError("--config must hold a JSON object");
      for (const Binding& b : bind.list()) {
        if (b.option->count() == 0 && b.command->parsed() && config.contains(b.key)) {
          try {
            b.set(config[b.key]);
          } catch (const Json::exception& e) {
            throw ConfigError("config key '" + b.key + "': " + e.what());
          }
        }
      }
      if (config.contains(sampling_key)) {
        sampling = mwcalib::sampling_config_from_json(config[sampling_key]);
      }
    }
    if (jobs < 1) throw ConfigError("--jobs must be >= 1");

    if (generate->parsed()) {
      gen.pano_dir = opt_path(gen_pano_dir);
      gen.seed = seed;
      gen.jobs = jobs;
      gen.out = out;
      gen.sampling = sampling;
      return cmd_generate(gen, std::cout);
    }
    if (calibrate->parsed()) {
      cal.gt_dir = opt_path(cal_gt);
      cal.detections_dir = opt_path(cal_det_dir);
      cal.heatmap_dir = opt_path(cal_hm_dir);
      cal.detections_file = opt_path(cal_det_file);
      cal.params_file = opt_path(cal_params);
      cal.seed = seed;
      cal.jobs = jobs;
      cal.out = opt_path(out);
      return cmd_calibrate(cal, std::cout);
    }
    if (rectify->parsed()) {
      rect.image = rect_image;
      rect.params_file = rect_params;
      const auto face = mwcalib::parse_face(rect_face);
      if (!face) throw ConfigError("unknown face '" + rect_face + "'");
      rect.face = *face;
      if (!rect_euler.empty()) rect.euler = mwcalib::EulerPTR{rect_euler[0], rect_euler[1], rect_euler[2]};
      rect.rotation_file = opt_path(rect_rotation);
      rect.mask_out = opt_path(rect_mask);
      rect.out = out;
      return cmd_rectify(rect, std::cout);
    }
    if (evaluate->parsed()) {
      ev.pred_dir = ev_pred;
      ev.gt_dir = ev_gt;
      ev.out = out;
      ev.csv = opt_path(ev_csv);
      ev.image_dir = opt_path(ev_images);
      ev.jobs = jobs;
      return cmd_evaluate(ev, std::cout);
    }
    if (analyze->parsed()) {
      for (const std::string& f : an_files) an.files.emplace_back(f);
      an.out = opt_path(out);
      return cmd_analyze_arrangement(an, std::cout);
    }
    if (simulate->parsed()) {
      sim.seed = seed;
      sim.jobs = jobs;
      sim.sampling = sampling;
      sim.out = opt_path(out);
      return cmd_simulate(sim, std::cout);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const mwcalib::Error& e) {
    std::cerr << "error [" << mwcalib::to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitTotalFailure;
  }
  return kExitConfig;
}
