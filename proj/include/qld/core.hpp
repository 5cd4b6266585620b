#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qld {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// One intensity sample of the scene. Pixels are row-major.
struct Frame {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint64_t index = 0;
  std::vector<double> pixels;

  Frame() = default;
  Frame(std::uint32_t w, std::uint32_t h, std::uint64_t n, double fill = 0.0)
      : width(w), height(h), index(n), pixels(std::size_t{w} * h, fill) {}

  std::size_t size() const { return pixels.size(); }
  double& at(std::uint32_t x, std::uint32_t y) { return pixels[std::size_t{y} * width + x]; }
  double at(std::uint32_t x, std::uint32_t y) const { return pixels[std::size_t{y} * width + x]; }

  // Throws DataError when pixels.size() != width*height or a value is
  // negative or not finite.
  void validate() const;
};

struct StreamHeader {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t frame_count = 0;
  double frame_rate = 0.0;
  std::uint16_t bit_depth = 16;
  std::optional<double> exposure_time;  // metadata only

  std::size_t pixels_per_frame() const { return std::size_t{width} * height; }
  void validate() const;
};

enum class Normalization { RawSums, TwoOverN };

std::string to_string(Normalization n);
Normalization parse_normalization(const std::string& s);

struct DemodConfig {
  double frequency = 0.0;   // Hz
  double frame_rate = 0.0;  // frames per second
  Normalization normalization = Normalization::TwoOverN;
  double phase_origin = 0.0;  // radians

  // Frequency must be positive and strictly below frame_rate / 2.
  void validate() const;

  // Frames per modulation cycle, rounded to the nearest integer (>= 1).
  std::uint64_t frames_per_cycle() const;
};

// Reference phase of frame n, 2*pi*f*n/fs + origin, reduced to (-pi, pi].
// The cycle count is reduced modulo one before any trigonometry so that the
// result stays accurate for large n.
double sample_phase(const DemodConfig& config, std::uint64_t n);

// Reduces an angle to (-pi, pi].
double wrap_phase(double radians);

// Non-owning read-only view of a 2-D real image.
struct ImageView {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::span<const double> values;

  double at(std::uint32_t x, std::uint32_t y) const { return values[std::size_t{y} * width + x]; }
};

struct AmplitudeImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<double> amplitude;
  std::vector<double> phase;  // 0 where amplitude == 0
  std::uint64_t frames_used = 0;
  DemodConfig config;

  ImageView view() const { return {width, height, amplitude}; }
};

inline ImageView view_of(const Frame& f) { return {f.width, f.height, f.pixels}; }

// Ordered producer of frames. Implementations hand out frames with indices
// 0, 1, 2, ... and never revisit one.
class FrameSource {
 public:
  virtual ~FrameSource() = default;

  virtual const StreamHeader& header() const = 0;

  // Fills `frame` with the next frame and returns true, or returns false at
  // the end of the stream. `frame` may be reused between calls.
  virtual bool next(Frame& frame) = 0;
};

// In-memory stack of frames.
class MemoryStream : public FrameSource {
 public:
  MemoryStream(StreamHeader header, std::vector<Frame> frames);

  const StreamHeader& header() const override { return header_; }
  bool next(Frame& frame) override;

  void rewind() { cursor_ = 0; }
  const std::vector<Frame>& frames() const { return frames_; }

 private:
  StreamHeader header_;
  std::vector<Frame> frames_;
  std::size_t cursor_ = 0;
};

}  // namespace qld
