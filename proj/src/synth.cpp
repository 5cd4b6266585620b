#include "qld/synth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qld/error.hpp"
#include "qld/rng.hpp"

namespace qld {

bool NoiseSpec::active() const {
  switch (kind) {
    case NoiseKind::None:
      return false;
    case NoiseKind::UniformAdditive:
      return a != 0.0 || b != 0.0;
    case NoiseKind::GaussianAdditive:
      return a != 0.0 || b != 0.0;
  }
  return false;
}

void NoiseSpec::validate() const {
  if (!std::isfinite(a) || !std::isfinite(b)) throw ConfigError("noise parameters must be finite");
  if (kind == NoiseKind::UniformAdditive && !(a <= b))
    throw ConfigError("uniform noise requires lo <= hi");
  if (kind == NoiseKind::GaussianAdditive && !(b >= 0.0))
    throw ConfigError("gaussian noise requires sigma >= 0");
}

double NoiseSpec::sample(std::uint64_t n, std::uint64_t p) const {
  switch (kind) {
    case NoiseKind::None:
      return 0.0;
    case NoiseKind::UniformAdditive: {
      const auto u = counter_uniforms(seed, n, p);
      return a + (b - a) * u.u0;
    }
    case NoiseKind::GaussianAdditive: {
      // Box-Muller on one counter block; 1 - u0 lies in (0, 1].
      const auto u = counter_uniforms(seed, n, p);
      const double r = std::sqrt(-2.0 * std::log(1.0 - u.u0));
      return a + b * r * std::cos(kTwoPi * u.u1);
    }
  }
  return 0.0;
}

void SceneSpec::validate() const {
  if (width == 0 || height == 0) throw ConfigError("scene dimensions must be non-zero");
  if (!(frame_rate > 0.0) || !std::isfinite(frame_rate))
    throw ConfigError("scene frame_rate must be positive");
  if (frame_count < 1) throw ConfigError("scene frame_count must be >= 1");
  noise.validate();
  if (layers.empty() && !noise.active())
    throw ConfigError("scene needs at least one layer or non-zero noise");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.base_image.width != width || l.base_image.height != height ||
        l.base_image.values.size() != std::size_t{width} * height) {
      std::ostringstream msg;
      msg << "layer " << i << " base image is " << l.base_image.width << "x"
          << l.base_image.height << ", scene is " << width << "x" << height;
      throw ConfigError(msg.str());
    }
    if (!(l.frequency >= 0.0) || !(l.frequency < frame_rate / 2.0)) {
      std::ostringstream msg;
      msg << "layer " << i << " frequency " << l.frequency << " Hz must lie in [0, "
          << frame_rate / 2.0 << ") Hz";
      throw ConfigError(msg.str());
    }
    for (double v : l.base_image.values)
      if (!(v >= 0.0) || !std::isfinite(v))
        throw ConfigError("layer " + std::to_string(i) + " base image has a negative value");
  }
  if (clamp && !(clamp->min < clamp->max)) throw ConfigError("clamp requires min < max");
}

StreamHeader SceneSpec::header(std::uint16_t bit_depth) const {
  StreamHeader h;
  h.width = width;
  h.height = height;
  h.frame_count = frame_count;
  h.frame_rate = frame_rate;
  h.bit_depth = bit_depth;
  return h;
}

void render_frame_into(const SceneSpec& spec, std::uint64_t n, Frame& out) {
  if (n >= spec.frame_count) {
    std::ostringstream msg;
    msg << "frame " << n << " out of range (scene has " << spec.frame_count << " frames)";
    throw ConfigError(msg.str());
  }
  const std::size_t npix = std::size_t{spec.width} * spec.height;
  out.width = spec.width;
  out.height = spec.height;
  out.index = n;
  out.pixels.assign(npix, 0.0);

  for (const auto& layer : spec.layers) {
    double gain = 1.0;
    if (layer.frequency > 0.0) {
      const double cycles =
          std::fmod(layer.frequency * static_cast<double>(n), spec.frame_rate) / spec.frame_rate;
      gain = std::cos(kTwoPi * cycles + layer.phase);
    }
    const double* base = layer.base_image.values.data();
    double* px = out.pixels.data();
    for (std::size_t p = 0; p < npix; ++p) px[p] += layer.offset + base[p] * gain;
  }
  if (spec.noise.active()) {
    for (std::size_t p = 0; p < npix; ++p) out.pixels[p] += spec.noise.sample(n, p);
  }
  if (spec.clamp) {
    for (auto& v : out.pixels) v = std::clamp(v, spec.clamp->min, spec.clamp->max);
  }
}

Frame render_frame(const SceneSpec& spec, std::uint64_t n) {
  Frame f;
  render_frame_into(spec, n, f);
  return f;
}

namespace {

void require_8bit(const Pattern& p, const char* name) {
  if (p.values.size() != std::size_t{p.width} * p.height)
    throw ConfigError(std::string(name) + ": pattern size does not match its dimensions");
  for (double v : p.values) {
    if (!(v >= 0.0 && v <= 255.0) || v != std::floor(v)) {
      std::ostringstream msg;
      msg << name << ": value " << v << " is outside the 8-bit range 0-255";
      throw ConfigError(msg.str());
    }
  }
}

}  // namespace

SceneSpec make_fig2_scene(const Pattern& image_a, const Pattern& image_b, std::uint32_t reps,
                          std::uint64_t seed) {
  if (image_a.width != image_b.width || image_a.height != image_b.height) {
    std::ostringstream msg;
    msg << "image A is " << image_a.width << "x" << image_a.height << " but image B is "
        << image_b.width << "x" << image_b.height;
    throw ConfigError(msg.str());
  }
  if (image_a.width == 0 || image_a.height == 0) throw ConfigError("images must be non-empty");
  if (reps < 1) throw ConfigError("reps must be >= 1");
  require_8bit(image_a, "image A");
  require_8bit(image_b, "image B");

  constexpr double kFrameRate = 13.0 * 17.0;  // both tones complete whole cycles
  SceneSpec spec;
  spec.width = image_a.width;
  spec.height = image_a.height;
  spec.frame_rate = kFrameRate;
  spec.frame_count = reps * 221u;
  spec.layers.push_back({image_a, 13.0, 0.0, 255.0});
  spec.layers.push_back({image_b, 17.0, 0.0, 255.0});
  spec.noise = NoiseSpec::uniform(0.0, 5.0 * 255.0, seed);
  return spec;
}

SceneSpec make_beacon_scene(const BeaconSceneParams& params) {
  if (!params.beacon.inside(params.width, params.height))
    throw ConfigError("beacon rect " + to_string(params.beacon) + " is outside the " +
                      std::to_string(params.width) + "x" + std::to_string(params.height) +
                      " scene");
  if (params.glare && !params.glare->inside(params.width, params.height))
    throw ConfigError("glare rect " + to_string(*params.glare) + " is outside the scene");
  if (params.beacon_amplitude < 0.0 || params.beacon_mean < 0.0 || params.ambient < 0.0 ||
      params.glare_level < 0.0)
    throw ConfigError("beacon scene levels must be non-negative");

  SceneSpec spec;
  spec.width = params.width;
  spec.height = params.height;
  spec.frame_rate = params.frame_rate;
  spec.frame_count = params.frame_count;
  spec.noise = params.noise;

  auto rect_pattern = [&](const Rect& r, double level) {
    Pattern p(params.width, params.height);
    for (auto idx : pixel_indices(r, params.width)) p.values[idx] = level;
    return p;
  };

  spec.layers.push_back({rect_pattern(params.beacon, params.beacon_amplitude), params.frequency,
                         0.0, 0.0});
  Pattern statics = rect_pattern(params.beacon, params.beacon_mean);
  if (params.glare) {
    for (auto idx : pixel_indices(*params.glare, params.width))
      statics.values[idx] += params.glare_level;
  }
  spec.layers.push_back({std::move(statics), 0.0, 0.0, params.ambient});
  spec.validate();
  return spec;
}

Rect disk_pattern_dot(std::uint32_t width, std::uint32_t height) {
  return {static_cast<std::int64_t>(width) * 3 / 4, static_cast<std::int64_t>(height) / 5, 3, 3};
}

Pattern make_test_pattern(TestPattern kind, std::uint32_t width, std::uint32_t height) {
  if (width < 16 || height < 16) throw ConfigError("test patterns need at least 16x16 pixels");
  Pattern p(width, height);
  if (kind == TestPattern::Disk) {
    const double cx = 0.4 * width;
    const double cy = 0.55 * height;
    const double radius = 0.3 * std::min(width, height);
    for (std::uint32_t y = 0; y < height; ++y) {
      for (std::uint32_t x = 0; x < width; ++x) {
        const double r = std::hypot(x + 0.5 - cx, y + 0.5 - cy);
        if (r < radius) p.at(x, y) = std::round(60.0 + 195.0 * (1.0 - r / radius));
      }
    }
    for (auto idx : pixel_indices(disk_pattern_dot(width, height), width)) p.values[idx] = 255.0;
  } else {
    const std::uint32_t bar = std::max<std::uint32_t>(1, width / 8);
    for (std::uint32_t y = height / 8; y < height - height / 8; ++y) {
      for (std::uint32_t x = 0; x < width; ++x) {
        const std::uint32_t k = x / bar;
        if (k % 2 == 1) p.at(x, y) = std::min(255.0, 100.0 + 40.0 * (k / 2));
      }
    }
  }
  return p;
}

SceneStream::SceneStream(SceneSpec spec, std::uint16_t bit_depth)
    : spec_(std::move(spec)), header_(spec_.header(bit_depth)) {
  spec_.validate();
}

bool SceneStream::next(Frame& frame) {
  if (cursor_ >= spec_.frame_count) return false;
  render_frame_into(spec_, cursor_++, frame);
  return true;
}

}  // namespace qld
