#include "qld/demod.hpp"

#include <cmath>
#include <sstream>

#include "qld/error.hpp"

namespace qld {

LanePool::LanePool(unsigned lanes) : lanes_(lanes == 0 ? 1 : lanes) {
  for (unsigned lane = 1; lane < lanes_; ++lane) threads_.emplace_back([this, lane] { worker(lane); });
}

LanePool::~LanePool() {
  {
    std::lock_guard lock(mu_);
    stop_ = true;
  }
  start_cv_.notify_all();
  for (auto& t : threads_) t.join();
}

void LanePool::run(const std::function<void(unsigned)>& task) {
  if (lanes_ == 1) {
    task(0);
    return;
  }
  {
    std::lock_guard lock(mu_);
    task_ = &task;
    pending_ = lanes_ - 1;
    ++generation_;
  }
  start_cv_.notify_all();
  task(0);
  std::unique_lock lock(mu_);
  done_cv_.wait(lock, [this] { return pending_ == 0; });
  task_ = nullptr;
}

void LanePool::worker(unsigned lane) {
  std::uint64_t seen = 0;
  for (;;) {
    const std::function<void(unsigned)>* task = nullptr;
    {
      std::unique_lock lock(mu_);
      start_cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
      task = task_;
    }
    (*task)(lane);
    {
      std::lock_guard lock(mu_);
      --pending_;
    }
    done_cv_.notify_one();
  }
}

namespace {

void mac_range(const double* in, double* xs, double* ys, std::size_t begin, std::size_t end,
               double c, double s) {
  for (std::size_t p = begin; p < end; ++p) {
    const double v = in[p];
    xs[p] += v * c;
    ys[p] += v * s;
  }
}

double normalization_factor(const DemodConfig& config, std::uint64_t frames) {
  if (config.normalization == Normalization::RawSums) return 1.0;
  return frames == 0 ? 0.0 : 2.0 / static_cast<double>(frames);
}

}  // namespace

PhasorAccumulator::PhasorAccumulator(std::uint32_t width, std::uint32_t height, DemodConfig config)
    : width_(width),
      height_(height),
      config_(config),
      x_sum_(std::size_t{width} * height, 0.0),
      y_sum_(std::size_t{width} * height, 0.0) {
  config_.validate();
  if (width == 0 || height == 0) throw ConfigError("accumulator dimensions must be non-zero");
}

void PhasorAccumulator::push(const Frame& frame, LanePool* pool) {
  if (frame.width != width_ || frame.height != height_ ||
      frame.pixels.size() != x_sum_.size()) {
    std::ostringstream msg;
    msg << "frame " << frame.index << " is " << frame.width << "x" << frame.height
        << " but the accumulator is " << width_ << "x" << height_;
    throw DataError(msg.str());
  }
  if (frame.index != frames_seen_) {
    std::ostringstream msg;
    msg << "out-of-order frame: expected index " << frames_seen_ << ", received " << frame.index;
    throw DataError(msg.str());
  }
  accumulate(frame.pixels, pool);
}

void PhasorAccumulator::push(std::span<const double> pixels, LanePool* pool) {
  if (pixels.size() != x_sum_.size()) {
    std::ostringstream msg;
    msg << "frame has " << pixels.size() << " pixels but the accumulator is " << width_ << "x"
        << height_;
    throw DataError(msg.str());
  }
  accumulate(pixels, pool);
}

void PhasorAccumulator::accumulate(std::span<const double> pixels, LanePool* pool) {
  const double phase = sample_phase(config_, frames_seen_);
  const double c = std::cos(phase);
  const double s = std::sin(phase);
  const std::size_t n = x_sum_.size();
  const double* in = pixels.data();
  double* xs = x_sum_.data();
  double* ys = y_sum_.data();
  if (pool == nullptr || pool->lanes() == 1) {
    mac_range(in, xs, ys, 0, n, c, s);
  } else {
    const unsigned lanes = pool->lanes();
    pool->run([&](unsigned lane) {
      const std::size_t begin = n * lane / lanes;
      const std::size_t end = n * (lane + 1) / lanes;
      mac_range(in, xs, ys, begin, end, c, s);
    });
  }
  ++frames_seen_;
}

AmplitudeImage PhasorAccumulator::finalize() const {
  AmplitudeImage img;
  img.width = width_;
  img.height = height_;
  img.frames_used = frames_seen_;
  img.config = config_;
  const std::size_t n = x_sum_.size();
  img.amplitude.assign(n, 0.0);
  img.phase.assign(n, 0.0);
  const double k = normalization_factor(config_, frames_seen_);
  for (std::size_t p = 0; p < n; ++p) {
    const double x = x_sum_[p];
    const double y = y_sum_[p];
    const double a = k * std::sqrt(x * x + y * y);
    img.amplitude[p] = a;
    img.phase[p] = a > 0.0 ? std::atan2(y, x) : 0.0;
  }
  return img;
}

RegionAccumulator::RegionAccumulator(std::vector<std::size_t> pixels, DemodConfig config)
    : pixels_(std::move(pixels)),
      config_(config),
      x_sum_(pixels_.size(), 0.0),
      y_sum_(pixels_.size(), 0.0) {
  config_.validate();
  if (pixels_.empty()) throw ConfigError("region is empty");
}

void RegionAccumulator::push(std::span<const double> frame_pixels) {
  const double phase = sample_phase(config_, frames_seen_);
  const double c = std::cos(phase);
  const double s = std::sin(phase);
  for (std::size_t i = 0; i < pixels_.size(); ++i) {
    const double v = frame_pixels[pixels_[i]];
    x_sum_[i] += v * c;
    y_sum_[i] += v * s;
  }
  ++frames_seen_;
}

double RegionAccumulator::mean_amplitude() const {
  const double k = normalization_factor(config_, frames_seen_);
  double total = 0.0;
  for (std::size_t i = 0; i < pixels_.size(); ++i)
    total += k * std::sqrt(x_sum_[i] * x_sum_[i] + y_sum_[i] * y_sum_[i]);
  return total / static_cast<double>(pixels_.size());
}

namespace {

void check_rate(const StreamHeader& header, const DemodConfig& config) {
  if (config.frame_rate != header.frame_rate) {
    std::ostringstream msg;
    msg << "config frame_rate " << config.frame_rate << " fps does not match the stream's "
        << header.frame_rate << " fps";
    throw ConfigError(msg.str());
  }
}

}  // namespace

std::vector<AmplitudeImage> demodulate_stream(FrameSource& stream,
                                              std::span<const DemodConfig> configs,
                                              const EngineOptions& options) {
  if (configs.empty()) throw ConfigError("at least one demodulation config is required");
  const auto& header = stream.header();
  for (const auto& c : configs) {
    c.validate();
    check_rate(header, c);
  }

  std::vector<PhasorAccumulator> accs;
  accs.reserve(configs.size());
  for (const auto& c : configs) accs.emplace_back(header.width, header.height, c);

  LanePool pool(options.lanes);
  Frame frame;
  std::uint64_t count = 0;
  while (stream.next(frame)) {
    for (auto& acc : accs) acc.push(frame, &pool);
    ++count;
  }
  if (count == 0) throw DataError("stream contains no frames");

  std::vector<AmplitudeImage> out;
  out.reserve(accs.size());
  for (const auto& acc : accs) out.push_back(acc.finalize());
  return out;
}

SnapshotSeries snapshots(FrameSource& stream, const DemodConfig& config, std::uint64_t cadence,
                         const EngineOptions& options) {
  config.validate();
  const auto& header = stream.header();
  check_rate(header, config);

  SnapshotSeries series;
  series.cadence = cadence == 0 ? config.frames_per_cycle() : cadence;

  PhasorAccumulator acc(header.width, header.height, config);
  LanePool pool(options.lanes);
  Frame frame;
  while (stream.next(frame)) {
    acc.push(frame, &pool);
    if (acc.frames_seen() % series.cadence == 0)
      series.entries.push_back({acc.frames_seen(), acc.finalize()});
  }
  if (acc.frames_seen() == 0) throw DataError("stream contains no frames");
  if (series.entries.empty()) {
    series.cadence_exceeds_stream = true;
    series.entries.push_back({acc.frames_seen(), acc.finalize()});
  }
  return series;
}

ScanResult frequency_scan(FrameSource& stream, std::span<const std::size_t> region, double f_min,
                          double f_max, double step) {
  const auto& header = stream.header();
  if (region.empty()) throw ConfigError("scan region is empty");
  for (auto p : region)
    if (p >= header.pixels_per_frame())
      throw ConfigError("scan region pixel " + std::to_string(p) + " lies outside the frame");
  if (!(step > 0.0)) throw ConfigError("scan step must be positive");
  if (!(f_min > 0.0 && f_min < f_max && f_max < header.frame_rate / 2.0)) {
    std::ostringstream msg;
    msg << "scan range must satisfy 0 < f_min < f_max < " << header.frame_rate / 2.0
        << " Hz (Nyquist), got [" << f_min << ", " << f_max << "]";
    throw ConfigError(msg.str());
  }

  ScanResult result;
  const auto count = static_cast<std::size_t>(std::floor((f_max - f_min) / step + 1e-9)) + 1;
  std::vector<RegionAccumulator> accs;
  accs.reserve(count);
  std::vector<std::size_t> pixels(region.begin(), region.end());
  for (std::size_t k = 0; k < count; ++k) {
    const double f = f_min + static_cast<double>(k) * step;
    result.frequencies.push_back(f);
    accs.emplace_back(pixels, DemodConfig{f, header.frame_rate, Normalization::TwoOverN, 0.0});
  }

  Frame frame;
  std::uint64_t frames = 0;
  while (stream.next(frame)) {
    if (frame.pixels.size() != header.pixels_per_frame())
      throw DataError("frame " + std::to_string(frame.index) + " does not match the stream size");
    for (auto& acc : accs) acc.push(frame.pixels);
    ++frames;
  }
  if (frames == 0) throw DataError("stream contains no frames");
  for (const auto& acc : accs) result.response.push_back(acc.mean_amplitude());
  return result;
}

}  // namespace qld
