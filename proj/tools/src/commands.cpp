#include "mwcalib/cli/commands.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "mwcalib/error.hpp"
#include "mwcalib/heatmap.hpp"
#include "mwcalib/manhattan_frame.hpp"
#include "mwcalib/metrics.hpp"
#include "mwcalib/parallel.hpp"
#include "mwcalib/rotation_estimation.hpp"

namespace mwcalib::cli {

namespace {

constexpr const char* kManifestName = "manifest.json";
constexpr const char* kCalibrateSummaryName = "calibrate_summary.json";
constexpr std::uint64_t kPanoramaStream = 0x70616e6fULL;
constexpr std::uint64_t kDetectionStream = 0x64657465ULL;

std::string image_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "img_%06zu", index);
  return buf;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = fs::path(path) += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out << text;
    if (!out) throw Error(ErrorCode::kIo, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_json_atomic(const fs::path& path, const Json& j) { write_text_atomic(path, dump_json(j)); }

std::vector<fs::path> list_panoramas(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("panorama directory not found: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string ext = lower(entry.path().extension().string());
    if (entry.is_regular_file() && (ext == ".png" || ext == ".jpg" || ext == ".jpeg")) {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw ConfigError("no PNG/JPEG panoramas in " + dir.string());
  return out;
}

Detections load_detections(const fs::path& path) {
  const Json j = read_json_file(path);
  if (j.is_object() && j.contains("detections")) return detections_from_json(j["detections"]);
  return detections_from_json(j);
}

// Accepts a bare params object or any document with a "params" member.
CameraParams load_params(const fs::path& path) {
  const Json j = read_json_file(path);
  return params_from_json(j.contains("params") ? j["params"] : j);
}

Json error_json(const std::exception& e) {
  Json j;
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    j["code"] = std::string(to_string(err->code()));
  } else {
    j["code"] = std::string(to_string(ErrorCode::kParse));
  }
  j["message"] = e.what();
  return j;
}

std::string fmt(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string fmt(const std::optional<double>& v, int precision = 4) {
  return v ? fmt(*v, precision) : std::string("n/a");
}

}  // namespace

std::vector<std::string> dataset_ids(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("dataset directory not found: " + dir.string());
  std::vector<std::string> ids;
  const fs::path manifest = dir / kManifestName;
  if (fs::exists(manifest)) {
    const Json j = read_json_file(manifest);
    for (const Json& e : j.at("entries")) ids.push_back(e.at("id").get<std::string>());
    return ids;
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json" && entry.path().filename() != kCalibrateSummaryName) {
      ids.push_back(entry.path().stem().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

int cmd_generate(const GenerateOptions& o, std::ostream& log) {
  if (o.count < 0) throw ConfigError("--count must be >= 0");
  if (o.out.empty()) throw ConfigError("--out is required");
  o.sampling.validate();

  std::vector<Image> panoramas;
  Json pano_names = Json::array();
  if (o.pano_dir) {
    for (const fs::path& p : list_panoramas(*o.pano_dir)) {
      Image img = read_image(p);
      if (img.width() != 2 * img.height()) {
        throw ConfigError(p.string() + ": equirectangular panoramas must be 2H x H, got " +
                          std::to_string(img.width()) + "x" + std::to_string(img.height()));
      }
      panoramas.push_back(std::move(img));
      pano_names.push_back(p.filename().string());
    }
  } else {
    if (o.procedural_panoramas <= 0 || o.procedural_height < 8) {
      throw ConfigError("procedural panoramas need a positive count and height >= 8");
    }
    for (int k = 0; k < o.procedural_panoramas; ++k) {
      panoramas.push_back(procedural_panorama(o.procedural_height,
                                              derive_seed(o.seed ^ kPanoramaStream, k)));
      char name[32];
      std::snprintf(name, sizeof name, "procedural_%02d", k);
      pano_names.push_back(name);
    }
  }

  Json head;
  head["seed"] = o.seed;
  head["count"] = o.count;
  head["panoramas"] = pano_names;
  head["sampling"] = to_json(o.sampling);
  if (!o.pano_dir) head["procedural_height"] = o.procedural_height;

  fs::create_directories(o.out);
  const fs::path manifest_path = o.out / kManifestName;
  if (fs::exists(manifest_path)) {
    const Json old = read_json_file(manifest_path);
    for (const char* key : {"seed", "panoramas", "sampling", "procedural_height"}) {
      const bool has_old = old.contains(key);
      if (has_old != head.contains(key) || (has_old && old[key] != head[key])) {
        throw ConfigError(o.out.string() + " holds a run with a different '" + key + "'");
      }
    }
  }

  std::atomic<int> skipped{0};
  parallel_for(static_cast<std::size_t>(o.count), o.jobs, [&](std::size_t i) {
    const std::string id = image_id(i);
    const fs::path png = o.out / (id + ".png");
    const fs::path sidecar = o.out / (id + ".json");
    if (fs::exists(png) && fs::exists(sidecar)) {
      ++skipped;
      return;
    }
    const std::uint64_t image_seed = derive_seed(o.seed, i);
    Rng rng(image_seed);
    const SampledCamera cam = sample_params(rng, o.sampling);
    const GroundTruth gt = make_ground_truth(cam.params, cam.euler);
    const std::size_t pano = i % panoramas.size();
    const RemapResult view = render_fisheye(panoramas[pano], cam.params, compose(cam.euler));

    const fs::path png_tmp = o.out / (id + ".tmp.png");
    write_image(png_tmp, view.image);
    fs::rename(png_tmp, png);

    Json j;
    j["id"] = id;
    j["image"] = id + ".png";
    j["panorama"] = pano_names[pano];
    j["seed"] = image_seed;
    j["sampled_euler_ptr_deg"] = to_json(cam.euler);
    const Json gt_json = to_json(gt);
    for (const auto& [key, value] : gt_json.items()) j[key] = value;
    write_json_atomic(sidecar, j);
  });

  Json manifest = head;
  Json entries = Json::array();
  for (int i = 0; i < o.count; ++i) {
    const std::string id = image_id(static_cast<std::size_t>(i));
    entries.push_back(Json{{"id", id}, {"image", id + ".png"}, {"sidecar", id + ".json"}});
  }
  manifest["entries"] = std::move(entries);
  write_json_atomic(manifest_path, manifest);

  log << "generated " << (o.count - skipped.load()) << " images (" << skipped.load()
      << " already present) in " << o.out.string() << "\n";
  return kExitOk;
}

namespace {

Json calibrate_one(const std::string& id, const CameraParams& params, const Detections& dets,
                   double min_score) {
  Json j;
  j["id"] = id;
  try {
    const RotationEstimate est = estimate_rotation(dets, params, {min_score});
    j["ok"] = true;
    j["params"] = to_json(params);
    const Json est_json = to_json(est);
    for (const auto& [key, value] : est_json.items()) j[key] = value;
  } catch (const Error& e) {
    j["ok"] = false;
    j["error"] = error_json(e);
  }
  j["detections"] = to_json(dets);
  return j;
}

}  // namespace

int cmd_calibrate(const CalibrateOptions& o, std::ostream& log) {
  if (o.detections_file) {
    if (!o.params_file) throw ConfigError("--detections needs --params");
    const CameraParams params = load_params(*o.params_file);
    const Detections dets = load_detections(*o.detections_file);
    const Json result = calibrate_one(o.detections_file->stem().string(), params, dets, o.min_score);
    if (o.out) {
      write_json_file(*o.out, result);
    } else {
      log << dump_json(result);
    }
    return result["ok"].get<bool>() ? kExitOk : kExitTotalFailure;
  }

  if (!o.gt_dir) throw ConfigError("calibrate needs --gt-dir or --detections");
  if (!o.out) throw ConfigError("--out is required in batch mode");
  if (o.detections_dir && o.heatmap_dir) {
    throw ConfigError("--detections-dir and --heatmap-dir are exclusive");
  }
  if (!(o.noise_sigma_px >= 0.0) || !(o.dropout >= 0.0 && o.dropout <= 1.0)) {
    throw ConfigError("--noise must be >= 0 and --dropout in [0, 1]");
  }
  const std::optional<CameraParams> params_override =
      o.params_file ? std::optional(load_params(*o.params_file)) : std::nullopt;

  const std::vector<std::string> ids = dataset_ids(*o.gt_dir);
  if (ids.empty()) throw ConfigError("no images in " + o.gt_dir->string());
  fs::create_directories(*o.out);

  std::vector<Json> results(ids.size());
  parallel_for(ids.size(), o.jobs, [&](std::size_t i) {
    const std::string& id = ids[i];
    try {
      const GroundTruth gt = ground_truth_from_json(read_json_file(*o.gt_dir / (id + ".json")));
      const CameraParams params = params_override.value_or(gt.params);
      Detections dets;
      if (o.detections_dir) {
        dets = load_detections(*o.detections_dir / (id + ".json"));
      } else if (o.heatmap_dir) {
        dets = decode_all(read_heatmap_file(*o.heatmap_dir / (id + ".bin")));
      } else {
        Rng rng(derive_seed(o.seed ^ kDetectionStream, i));
        dets = oracle_detect(gt, o.noise_sigma_px, o.dropout, rng);
      }
      results[i] = calibrate_one(id, params, dets, o.min_score);
    } catch (const std::exception& e) {
      results[i] = Json{{"id", id}, {"ok", false}, {"error", error_json(e)}};
    }
    write_json_atomic(*o.out / (id + ".json"), results[i]);
  });

  int successes = 0;
  Json failures = Json::array();
  for (const Json& r : results) {
    if (r["ok"].get<bool>()) {
      ++successes;
    } else {
      failures.push_back(Json{{"id", r["id"]}, {"error", r["error"]}});
    }
  }
  Json summary;
  summary["total"] = ids.size();
  summary["successes"] = successes;
  summary["executable_rate"] = 100.0 * successes / static_cast<double>(ids.size());
  summary["failures"] = failures;
  write_json_atomic(*o.out / kCalibrateSummaryName, summary);

  log << "calibrated " << successes << "/" << ids.size() << " images";
  for (const Json& f : failures) {
    log << "\n  " << f["id"].get<std::string>() << ": " << f["error"]["message"].get<std::string>();
  }
  log << "\n";
  return successes == 0 ? kExitTotalFailure : kExitOk;
}

int cmd_rectify(const RectifyOptions& o, std::ostream& log) {
  if (o.out.empty()) throw ConfigError("--out is required");
  if (o.size <= 0 || !(o.fov_deg > 0.0 && o.fov_deg < 180.0)) {
    throw ConfigError("--size must be positive and --fov in (0, 180)");
  }
  const Json params_doc = read_json_file(o.params_file);
  const CameraParams params =
      params_from_json(params_doc.contains("params") ? params_doc["params"] : params_doc);

  Eigen::Matrix3d rotation;
  if (o.euler) {
    rotation = compose(*o.euler);
  } else if (o.rotation_file) {
    const Json j = read_json_file(*o.rotation_file);
    if (!j.contains("rotation_matrix")) {
      throw ConfigError(o.rotation_file->string() + " has no rotation_matrix");
    }
    rotation = matrix_from_json(j["rotation_matrix"]);
  } else if (params_doc.contains("rotation_matrix")) {
    rotation = matrix_from_json(params_doc["rotation_matrix"]);
  } else {
    throw ConfigError("no rotation given: use --euler, --rotation or a params file with rotation_matrix");
  }

  const Image fisheye = read_image(o.image);
  const RemapResult r = recover_image(fisheye, params, rotation, o.face, o.fov_deg, o.size);
  write_image(o.out, r.image);
  if (o.mask_out) {
    Image mask(o.size, o.size);
    for (int y = 0; y < o.size; ++y) {
      for (int x = 0; x < o.size; ++x) {
        if (r.mask[static_cast<std::size_t>(y) * o.size + x]) {
          std::fill_n(mask.pixel(x, y), 3, std::uint8_t{255});
        }
      }
    }
    write_image(*o.mask_out, mask);
  }
  const auto valid = std::count(r.mask.begin(), r.mask.end(), std::uint8_t{1});
  log << "rectified face " << face_name(o.face) << " -> " << o.out.string() << " ("
      << fmt(100.0 * static_cast<double>(valid) / static_cast<double>(r.mask.size()), 1)
      << "% valid)\n";
  return kExitOk;
}

namespace {

constexpr double kQualityFovDeg = 90.0;
constexpr int kQualitySize = 128;

ImageEvaluation load_evaluation(const std::string& id, const EvaluateOptions& o) {
  const GroundTruth gt = ground_truth_from_json(read_json_file(o.gt_dir / (id + ".json")));
  ImageEvaluation ev{.id = id,
                     .gt = {gt.params, gt.rotation},
                     .gt_euler = gt.euler,
                     .gt_keypoints = gt.keypoints};

  const fs::path pred_path = o.pred_dir / (id + ".json");
  if (!fs::exists(pred_path)) return ev;
  try {
    const Json j = read_json_file(pred_path);
    if (j.contains("detections")) ev.detections = detections_from_json(j["detections"]);
    if (j.value("ok", false)) {
      ev.pred = CameraModel{params_from_json(j.at("params")), matrix_from_json(j.at("rotation_matrix"))};
    }
  } catch (const std::exception&) {
    ev.pred.reset();
    return ev;
  }

  if (o.image_dir && ev.pred) {
    const Image fisheye = read_image(*o.image_dir / (id + ".png"));
    try {
      const RemapResult ref = recover_image(fisheye, ev.gt.params, ev.gt.rotation, Face::kFront,
                                            kQualityFovDeg, kQualitySize);
      const RemapResult got = recover_image(fisheye, ev.pred->params, ev.pred->rotation,
                                            Face::kFront, kQualityFovDeg, kQualitySize);
      Mask both(ref.mask.size());
      for (std::size_t k = 0; k < both.size(); ++k) both[k] = ref.mask[k] && got.mask[k];
      ev.psnr_db = psnr(ref.image, got.image, both);
      ev.ssim = ssim(ref.image, got.image);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kFaceOutOfFov && e.code() != ErrorCode::kInvalidArgument) throw;
    }
  }
  return ev;
}

}  // namespace

int cmd_evaluate(const EvaluateOptions& o, std::ostream& log) {
  if (o.out.empty()) throw ConfigError("--out is required");
  if (!fs::is_directory(o.pred_dir)) throw ConfigError("prediction directory not found: " + o.pred_dir.string());
  if (o.repe_samples <= 0) throw ConfigError("--repe-samples must be positive");
  const std::vector<std::string> ids = dataset_ids(o.gt_dir);
  if (ids.empty()) throw ConfigError("no ground truth in " + o.gt_dir.string());

  std::vector<MetricAccumulator> parts(ids.size());
  std::vector<ImageRow> rows(ids.size());
  parallel_for(ids.size(), o.jobs, [&](std::size_t i) {
    rows[i] = parts[i].add(load_evaluation(ids[i], o), o.repe_samples);
  });
  MetricAccumulator total;
  for (const MetricAccumulator& p : parts) total.merge(p);
  const EvalReport report = total.report();
  write_json_file(o.out, to_json(report));

  if (o.csv) {
    std::ostringstream csv;
    csv << "id,success,pan_err_deg,tilt_err_deg,roll_err_deg,f_err_mm,k1_err,repe_px,pck,oks\n";
    csv.precision(10);
    for (const ImageRow& r : rows) {
      csv << r.id << "," << (r.success ? 1 : 0) << ",";
      if (r.success) {
        csv << r.angle.pan << "," << r.angle.tilt << "," << r.angle.roll << "," << r.f_err_mm << ","
            << r.k1_err << ",";
      } else {
        csv << ",,,,,";
      }
      if (r.repe_px) csv << *r.repe_px;
      csv << "," << r.pck << "," << r.oks << "\n";
    }
    write_text_atomic(*o.csv, csv.str());
  }

  log << "images " << report.total << ", executable rate " << fmt(report.executable_rate, 1) << "%\n"
      << "MAE pan/tilt/roll [deg] " << fmt(report.angle_mae.pan) << " / " << fmt(report.angle_mae.tilt)
      << " / " << fmt(report.angle_mae.roll) << "\n"
      << "REPE (repo definition) [px] " << fmt(report.repe_px) << "\n"
      << "PCK " << fmt(report.keypoints.pck) << ", AP " << fmt(report.keypoints.ap_ar.ap) << ", AR "
      << fmt(report.keypoints.ap_ar.ar) << "\n";
  if (report.psnr_db) {
    log << "PSNR [dB] " << fmt(report.psnr_db, 2) << ", SSIM " << fmt(report.ssim) << "\n";
  }
  return kExitOk;
}

int cmd_analyze_arrangement(const AnalyzeOptions& o, std::ostream& log) {
  std::vector<Arrangement> arrangements;
  if (o.names.empty() && o.files.empty()) arrangements = builtin_arrangements();
  for (const std::string& name : o.names) {
    const auto a = builtin_arrangement(name);
    if (!a) throw ConfigError("unknown builtin arrangement '" + name + "'");
    arrangements.push_back(*a);
  }
  for (const fs::path& f : o.files) {
    arrangements.push_back(arrangement_from_json(read_json_file(f), f.stem().string()));
  }

  Json out = Json::array();
  char line[128];
  std::snprintf(line, sizeof line, "%-16s %6s %20s %11s\n", "arrangement", "points",
                "min_axis_angle_deg", "octahedral");
  log << line;
  for (const Arrangement& a : arrangements) {
    const double angle = min_axis_angle(a);
    const bool symmetric = verify_octahedral_symmetry(a.with_vanishing_points());
    std::snprintf(line, sizeof line, "%-16s %6zu %20.1f %11s\n", a.name.c_str(), a.auxiliary.size(),
                  angle, symmetric ? "yes" : "no");
    log << line;
    out.push_back(Json{{"name", a.name},
                       {"points", a.auxiliary.size()},
                       {"min_axis_angle_deg", angle},
                       {"octahedral_symmetric", symmetric}});
  }
  if (o.out) write_json_file(*o.out, Json{{"arrangements", out}});
  return kExitOk;
}

int cmd_simulate(const SimulateOptions& o, std::ostream& log) {
  if (o.count <= 0) throw ConfigError("--count must be positive");
  if (o.sigmas.empty() || o.dropouts.empty()) throw ConfigError("need at least one sigma and dropout");
  for (double s : o.sigmas) {
    if (!(s >= 0.0)) throw ConfigError("noise sigmas must be >= 0");
  }
  for (double d : o.dropouts) {
    if (!(d >= 0.0 && d <= 1.0)) throw ConfigError("dropouts must lie in [0, 1]");
  }
  if (o.repe_samples <= 0) throw ConfigError("--repe-samples must be positive");
  o.sampling.validate();

  const auto n = static_cast<std::size_t>(o.count);
  std::vector<std::optional<GroundTruth>> truths(n);
  parallel_for(n, o.jobs, [&](std::size_t i) {
    Rng rng(derive_seed(o.seed, i));
    const SampledCamera cam = sample_params(rng, o.sampling);
    truths[i].emplace(make_ground_truth(cam.params, cam.euler));
  });

  Json rows = Json::array();
  char line[160];
  std::snprintf(line, sizeof line, "%8s %8s %9s %9s %9s %9s %8s %7s %7s\n", "sigma_px", "dropout",
                "pan_mae", "tilt_mae", "roll_mae", "repe_px", "exec_%", "pck", "ap");
  log << line;
  for (double sigma : o.sigmas) {
    for (double dropout : o.dropouts) {
      std::vector<MetricAccumulator> parts(n);
      parallel_for(n, o.jobs, [&](std::size_t i) {
        const GroundTruth& gt = *truths[i];
        // Noise streams are shared across rows (common random numbers).
        Rng rng(derive_seed(o.seed ^ kDetectionStream, i));
        ImageEvaluation ev{.id = image_id(i),
                           .gt = {gt.params, gt.rotation},
                           .gt_euler = gt.euler,
                           .gt_keypoints = gt.keypoints,
                           .detections = oracle_detect(gt, sigma, dropout, rng)};
        try {
          const RotationEstimate est = estimate_rotation(ev.detections, gt.params);
          ev.pred = CameraModel{gt.params, est.rotation.matrix()};
        } catch (const Error&) {
          ev.pred.reset();
        }
        parts[i].add(ev, o.repe_samples);
      });
      MetricAccumulator total;
      for (const MetricAccumulator& p : parts) total.merge(p);
      const EvalReport r = total.report();
      std::snprintf(line, sizeof line, "%8.2f %8.2f %9.4f %9.4f %9.4f %9s %8.1f %7.4f %7.4f\n", sigma,
                    dropout, r.angle_mae.pan, r.angle_mae.tilt, r.angle_mae.roll,
                    fmt(r.repe_px).c_str(), r.executable_rate, r.keypoints.pck, r.keypoints.ap_ar.ap);
      log << line;
      rows.push_back(Json{{"sigma_px", sigma}, {"dropout", dropout}, {"report", to_json(r)}});
    }
  }

  if (o.out) {
    Json j;
    j["seed"] = o.seed;
    j["count"] = o.count;
    j["sampling"] = to_json(o.sampling);
    j["rendering"] = "geometric only";
    j["rows"] = std::move(rows);
    write_json_file(*o.out, j);
  }
  return kExitOk;
}

}  // namespace mwcalib::cli
