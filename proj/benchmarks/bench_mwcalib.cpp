#include <benchmark/benchmark.h>

#include <random>

#include "mwcalib/heatmap.hpp"
#include "mwcalib/metrics.hpp"
#include "mwcalib/rotation_estimation.hpp"
#include "mwcalib/synthesis.hpp"

namespace {

using namespace mwcalib;

void BM_RenderFisheye(benchmark::State& state) {
  const Image pano = procedural_panorama(512, 1);
  const int size = static_cast<int>(state.range(0));
  const CameraParams p = CameraParams::create(5.0, -0.02, size, size);
  const Eigen::Matrix3d r = compose({20.0, -10.0, 5.0});
  for (auto _ : state) {
    benchmark::DoNotOptimize(render_fisheye(pano, p, r));
  }
  state.SetItemsProcessed(state.iterations() * size * size);
}
BENCHMARK(BM_RenderFisheye)->Arg(224)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_EstimateRotation(benchmark::State& state) {
  Rng rng(2);
  const SamplingConfig cfg;
  std::vector<GroundTruth> truths;
  for (int i = 0; i < 64; ++i) {
    const SampledCamera s = sample_params(rng, cfg);
    truths.push_back(make_ground_truth(s.params, s.euler));
  }
  std::vector<Detections> dets;
  for (const GroundTruth& gt : truths) dets.push_back(oracle_detect(gt, 3.1, 0.0, rng));
  std::size_t i = 0;
  for (auto _ : state) {
    const std::size_t k = i++ % truths.size();
    benchmark::DoNotOptimize(estimate_rotation(dets[k], truths[k].params));
  }
}
BENCHMARK(BM_EstimateRotation);

void BM_DecodeDark(benchmark::State& state) {
  const HeatmapGeometry geo;
  const Heatmap hm = encode({101.3, 87.9}, kDefaultHeatmapSigma, geo);
  DecodeOptions opt;
  opt.blur = state.range(0) != 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(decode_dark(hm, opt));
  }
}
BENCHMARK(BM_DecodeDark)->Arg(0)->Arg(1);

void BM_Repe(benchmark::State& state) {
  const CameraModel gt{CameraParams::create(5.0, -0.05, 224, 224), compose({4, -6, 3})};
  const CameraModel pred{CameraParams::create(5.3, -0.03, 224, 224), compose({5, -5, 2})};
  for (auto _ : state) {
    benchmark::DoNotOptimize(repe(pred, gt));
  }
}
BENCHMARK(BM_Repe);

}  // namespace
BENCHMARK_MAIN();
