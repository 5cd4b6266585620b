#pragma once

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "qld/core.hpp"

namespace qld {

// Fixed set of worker threads that run one task per lane and block until all
// lanes finish. Lane 0 runs on the calling thread.
class LanePool {
 public:
  explicit LanePool(unsigned lanes);
  ~LanePool();

  LanePool(const LanePool&) = delete;
  LanePool& operator=(const LanePool&) = delete;

  unsigned lanes() const { return lanes_; }
  void run(const std::function<void(unsigned lane)>& task);

 private:
  void worker(unsigned lane);

  unsigned lanes_;
  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  const std::function<void(unsigned)>* task_ = nullptr;
  std::uint64_t generation_ = 0;
  unsigned pending_ = 0;
  bool stop_ = false;
};

// Per-pixel running in-phase / quadrature sums for one demodulation
// frequency.
//
// Each pixel's sums are accumulated strictly in frame order; a LanePool only
// splits the frame into disjoint pixel ranges, so results are bitwise
// identical at any lane count.
class PhasorAccumulator {
 public:
  PhasorAccumulator(std::uint32_t width, std::uint32_t height, DemodConfig config);

  // Adds frame.index == frames_seen(). Throws DataError on a shape mismatch
  // or an out-of-order index.
  void push(const Frame& frame, LanePool* pool = nullptr);

  // Adds the next frame from raw row-major pixels; the index is implied.
  void push(std::span<const double> pixels, LanePool* pool = nullptr);

  AmplitudeImage finalize() const;

  std::uint32_t width() const { return width_; }
  std::uint32_t height() const { return height_; }
  std::uint64_t frames_seen() const { return frames_seen_; }
  const DemodConfig& config() const { return config_; }
  std::span<const double> x_sum() const { return x_sum_; }
  std::span<const double> y_sum() const { return y_sum_; }

 private:
  void accumulate(std::span<const double> pixels, LanePool* pool);

  std::uint32_t width_;
  std::uint32_t height_;
  DemodConfig config_;
  std::vector<double> x_sum_;
  std::vector<double> y_sum_;
  std::uint64_t frames_seen_ = 0;
};

// Same accumulation restricted to a subset of pixels. Used where only a
// region matters (frequency scans).
class RegionAccumulator {
 public:
  RegionAccumulator(std::vector<std::size_t> pixels, DemodConfig config);

  void push(std::span<const double> frame_pixels);
  // Mean amplitude over the region, normalized per the config.
  double mean_amplitude() const;

  std::uint64_t frames_seen() const { return frames_seen_; }

 private:
  std::vector<std::size_t> pixels_;
  DemodConfig config_;
  std::vector<double> x_sum_;
  std::vector<double> y_sum_;
  std::uint64_t frames_seen_ = 0;
};

struct EngineOptions {
  unsigned lanes = 1;
};

// Demodulates a stream at every config in a single pass over its frames.
// Throws ConfigError on an empty config list or frame-rate mismatch and
// DataError on an empty stream.
std::vector<AmplitudeImage> demodulate_stream(FrameSource& stream,
                                              std::span<const DemodConfig> configs,
                                              const EngineOptions& options = {});

struct SnapshotEntry {
  std::uint64_t frames_used = 0;
  AmplitudeImage image;
};

struct SnapshotSeries {
  std::uint64_t cadence = 0;
  std::vector<SnapshotEntry> entries;
  // Set when the cadence exceeded the stream length and the only entry is
  // the final state.
  bool cadence_exceeds_stream = false;
};

// Finalizes one shared accumulator every `cadence` frames. cadence == 0
// selects one modulation cycle.
SnapshotSeries snapshots(FrameSource& stream, const DemodConfig& config, std::uint64_t cadence = 0,
                         const EngineOptions& options = {});

struct ScanResult {
  std::vector<double> frequencies;
  std::vector<double> response;
};

// Mean TwoOverN amplitude over `region` at every grid frequency
// f_min, f_min + step, ... <= f_max, in one pass over the stream.
ScanResult frequency_scan(FrameSource& stream, std::span<const std::size_t> region, double f_min,
                          double f_max, double step);

}  // namespace qld
