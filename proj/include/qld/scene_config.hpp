#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "qld/synth.hpp"

namespace qld {

// Human-readable scene description, one `key = value` per line, '#' starts
// a comment. Global keys come first; each `[layer]` header opens a layer.
//
//   width = 64
//   height = 64
//   frame_rate = 390
//   frame_count = 3900
//   noise = uniform 0 1275        # or: none | gaussian <mean> <sigma>
//   clamp = 0 65535               # optional
//   bit_depth = 16                # optional, 8 or 16
//
//   [layer]
//   frequency = 13                # 0 for a static structure
//   phase = 0                     # optional, radians
//   offset = 0                    # optional, added to every pixel
//   pattern = rect 30 30 3 3 300  # repeatable; contributions add up
//   pattern = constant 5
//   pattern = pgm beacon.pgm 1.5  # path relative to the config file
//
// The noise seed is not part of the file; it is supplied by the caller.
struct PatternOp {
  enum class Kind { Constant, Rect, Pgm } kind = Kind::Constant;
  double value = 0.0;  // level, or scale for Pgm
  Rect rect;
  std::string path;
};

struct LayerConfig {
  double frequency = 0.0;
  double phase = 0.0;
  double offset = 0.0;
  std::vector<PatternOp> patterns;
};

struct SceneConfig {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  double frame_rate = 0.0;
  std::uint32_t frame_count = 0;
  NoiseKind noise = NoiseKind::None;
  double noise_a = 0.0;
  double noise_b = 0.0;
  std::optional<SceneSpec::Clamp> clamp;
  std::uint16_t bit_depth = 16;
  std::vector<LayerConfig> layers;
  std::filesystem::path base_dir;  // resolves relative pattern paths

  SceneSpec build(std::uint64_t seed) const;
  std::string to_text() const;
};

// Throws ConfigError with the 1-based line number on malformed input and
// names any missing required key.
SceneConfig parse_scene_config(std::istream& in, const std::filesystem::path& base_dir = {});
SceneConfig load_scene_config(const std::filesystem::path& path);

}  // namespace qld
