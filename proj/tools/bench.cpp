#include <algorithm>
#include <chrono>
#include <cmath>

#include "cli.hpp"
#include "qld/demod.hpp"
#include "qld/error.hpp"
#include "qld/synth.hpp"

namespace qld::cli {

BenchReport run_bench(const BenchParams& params) {
  if (params.width == 0 || params.height == 0) throw ConfigError("bench dimensions must be non-zero");
  if (!(params.fps > 0.0) || !(params.seconds > 0.0))
    throw ConfigError("bench fps and seconds must be positive");
  if (params.frequencies == 0) throw ConfigError("bench needs at least one frequency");

  constexpr double kBaseFrequency = 13.0;
  std::vector<DemodConfig> configs;
  for (unsigned k = 0; k < params.frequencies; ++k) {
    DemodConfig c{kBaseFrequency + k, params.fps, Normalization::TwoOverN, 0.0};
    c.validate();
    configs.push_back(c);
  }

  // A short ring of noisy beacon frames, rendered before timing starts.
  constexpr std::uint32_t kRing = 8;
  BeaconSceneParams scene;
  scene.width = params.width;
  scene.height = params.height;
  scene.frame_rate = params.fps;
  scene.frame_count = kRing;
  scene.frequency = kBaseFrequency;
  scene.beacon = {0, 0, std::min<std::int64_t>(3, params.width), std::min<std::int64_t>(3, params.height)};
  scene.beacon_amplitude = 300.0;
  scene.beacon_mean = 1000.0;
  scene.ambient = 500.0;
  scene.noise = NoiseSpec::uniform(0.0, 1275.0, 1);
  const auto spec = make_beacon_scene(scene);
  std::vector<Frame> ring;
  for (std::uint32_t n = 0; n < kRing; ++n) ring.push_back(render_frame(spec, n));

  std::vector<PhasorAccumulator> accs;
  for (const auto& c : configs) accs.emplace_back(params.width, params.height, c);
  LanePool pool(params.lanes);

  const auto frames = static_cast<std::uint64_t>(std::max(1.0, std::round(params.fps * params.seconds)));
  const std::uint64_t cycle = configs.front().frames_per_cycle();

  BenchReport report;
  report.frames = frames;
  report.frequencies = params.frequencies;
  double sink = 0.0;
  const auto start = std::chrono::steady_clock::now();
  for (std::uint64_t i = 0; i < frames; ++i) {
    const auto& pixels = ring[i % kRing].pixels;
    for (auto& acc : accs) acc.push(pixels, &pool);
    if ((i + 1) % cycle == 0) {
      for (const auto& acc : accs) sink += acc.finalize().amplitude.front();
      ++report.finalizes;
    }
  }
  const auto stop = std::chrono::steady_clock::now();
  report.elapsed_s = std::chrono::duration<double>(stop - start).count();
  if (sink < 0.0) report.finalizes = 0;  // keeps finalize from being optimized away

  const double elapsed = std::max(report.elapsed_s, 1e-9);
  report.frames_per_second = static_cast<double>(frames) / elapsed;
  report.demods_per_second = report.frames_per_second * params.frequencies;
  report.ms_per_frame_per_frequency = 1e3 * elapsed / (static_cast<double>(frames) * params.frequencies);
  report.pass = report.frames_per_second >= params.target_fps;
  return report;
}

}  // namespace qld::cli
