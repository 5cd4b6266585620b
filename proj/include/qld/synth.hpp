#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qld/core.hpp"
#include "qld/geometry.hpp"

namespace qld {

// Dense 2-D pattern, row-major.
struct Pattern {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<double> values;

  Pattern() = default;
  Pattern(std::uint32_t w, std::uint32_t h, double fill = 0.0)
      : width(w), height(h), values(std::size_t{w} * h, fill) {}

  double& at(std::uint32_t x, std::uint32_t y) { return values[std::size_t{y} * width + x]; }
  double at(std::uint32_t x, std::uint32_t y) const { return values[std::size_t{y} * width + x]; }
  ImageView view() const { return {width, height, values}; }
};

// A source whose pixels oscillate as offset + base * cos(2 pi f t + phase).
// frequency == 0 describes a static (unmodulated) structure: base is added
// as-is on every frame.
struct SourceLayer {
  Pattern base_image;
  double frequency = 0.0;
  double phase = 0.0;
  double offset = 0.0;
};

enum class NoiseKind { None, UniformAdditive, GaussianAdditive };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::None;
  double a = 0.0;  // lo, or mean
  double b = 0.0;  // hi, or sigma
  std::uint64_t seed = 0;

  static NoiseSpec none() { return {}; }
  static NoiseSpec uniform(double lo, double hi, std::uint64_t seed) {
    return {NoiseKind::UniformAdditive, lo, hi, seed};
  }
  static NoiseSpec gaussian(double mean, double sigma, std::uint64_t seed) {
    return {NoiseKind::GaussianAdditive, mean, sigma, seed};
  }

  bool active() const;
  void validate() const;
  // Draw for (frame n, pixel p); a pure function of (seed, n, p).
  double sample(std::uint64_t n, std::uint64_t p) const;
};

struct SceneSpec {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  double frame_rate = 0.0;
  std::uint32_t frame_count = 0;
  std::vector<SourceLayer> layers;
  NoiseSpec noise;
  struct Clamp {
    double min;
    double max;
  };
  std::optional<Clamp> clamp;

  void validate() const;
  StreamHeader header(std::uint16_t bit_depth = 16) const;
};

// Renders frame n of the scene. Throws ConfigError for n >= frame_count.
Frame render_frame(const SceneSpec& spec, std::uint64_t n);

// Writes frame n into `out` (resized as needed).
void render_frame_into(const SceneSpec& spec, std::uint64_t n, Frame& out);

// Two 8-bit images modulated at 13 Hz and 17 Hz, sampled at 221 fps for
// reps * 221 frames, each with an offset of 255, plus uniform noise on
// [0, 1275] drawn from `seed`.
SceneSpec make_fig2_scene(const Pattern& image_a, const Pattern& image_b, std::uint32_t reps = 5,
                          std::uint64_t seed = 0);

struct BeaconSceneParams {
  std::uint32_t width = 64;
  std::uint32_t height = 64;
  double frame_rate = 390.0;
  std::uint32_t frame_count = 3900;
  double frequency = 13.0;
  Rect beacon{30, 30, 3, 3};
  // Cosine amplitude (half of peak-to-peak) inside the rect. The default is
  // a 30% peak-to-peak swing around beacon_mean.
  double beacon_amplitude = 15.0;
  double beacon_mean = 100.0;  // static level inside the rect
  double ambient = 0.0;            // uniform static level everywhere
  std::optional<Rect> glare;       // static, unmodulated bright structure
  double glare_level = 0.0;
  NoiseSpec noise;
};

SceneSpec make_beacon_scene(const BeaconSceneParams& params);

// Built-in 8-bit patterns for the two-image demonstration.
//  Disk: a disk with a radial gradient (60 at the rim, 255 at the centre)
//        plus an isolated 3x3 dot of 255 at disk_pattern_dot(); zero elsewhere.
//  Bars: vertical bars of width/8 pixels, every other bar lit, with levels
//        stepping from 100 upwards; zero elsewhere.
enum class TestPattern { Disk, Bars };

Pattern make_test_pattern(TestPattern kind, std::uint32_t width, std::uint32_t height);

// Location of the isolated dot in the Disk pattern.
Rect disk_pattern_dot(std::uint32_t width, std::uint32_t height);

// Frame source that renders a scene on demand.
class SceneStream : public FrameSource {
 public:
  explicit SceneStream(SceneSpec spec, std::uint16_t bit_depth = 16);

  const StreamHeader& header() const override { return header_; }
  bool next(Frame& frame) override;

  const SceneSpec& spec() const { return spec_; }

 private:
  SceneSpec spec_;
  StreamHeader header_;
  std::uint64_t cursor_ = 0;
};

}  // namespace qld
