#include "qld/scene_config.hpp"

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "qld/error.hpp"
#include "qld/frame_io.hpp"

namespace qld {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw ConfigError("scene config line " + std::to_string(line) + ": " + what);
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

double to_double(const std::string& s, std::size_t line, const std::string& key) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (...) {
  }
  fail(line, "'" + key + "' expects a number, got '" + s + "'");
}

std::uint32_t to_u32(const std::string& s, std::size_t line, const std::string& key) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used == s.size() && v >= 0 && v <= 0xFFFFFFFFLL) return static_cast<std::uint32_t>(v);
  } catch (...) {
  }
  fail(line, "'" + key + "' expects a non-negative integer, got '" + s + "'");
}

PatternOp parse_pattern(const std::string& value, std::size_t line) {
  const auto w = words(value);
  if (w.empty()) fail(line, "empty pattern");
  PatternOp op;
  if (w[0] == "constant" && w.size() == 2) {
    op.kind = PatternOp::Kind::Constant;
    op.value = to_double(w[1], line, "pattern");
  } else if (w[0] == "rect" && w.size() == 6) {
    op.kind = PatternOp::Kind::Rect;
    op.rect = {static_cast<std::int64_t>(to_double(w[1], line, "pattern")),
               static_cast<std::int64_t>(to_double(w[2], line, "pattern")),
               static_cast<std::int64_t>(to_double(w[3], line, "pattern")),
               static_cast<std::int64_t>(to_double(w[4], line, "pattern"))};
    op.value = to_double(w[5], line, "pattern");
  } else if (w[0] == "pgm" && (w.size() == 2 || w.size() == 3)) {
    op.kind = PatternOp::Kind::Pgm;
    op.path = w[1];
    op.value = w.size() == 3 ? to_double(w[2], line, "pattern") : 1.0;
  } else {
    fail(line, "unrecognised pattern '" + value +
                   "' (expected constant <v>, rect <x> <y> <w> <h> <v> or pgm <path> [scale])");
  }
  return op;
}

}  // namespace

SceneConfig parse_scene_config(std::istream& in, const std::filesystem::path& base_dir) {
  SceneConfig cfg;
  cfg.base_dir = base_dir;
  std::set<std::string> seen_global;
  std::set<std::string> seen_layer;
  std::size_t layer_line = 0;
  std::string raw;
  std::size_t line = 0;

  auto close_layer = [&] {
    if (cfg.layers.empty()) return;
    if (!seen_layer.count("frequency"))
      fail(layer_line, "layer is missing required key 'frequency'");
    if (cfg.layers.back().patterns.empty())
      fail(layer_line, "layer is missing required key 'pattern'");
  };

  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const auto text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    if (text == "[layer]") {
      close_layer();
      cfg.layers.emplace_back();
      seen_layer.clear();
      layer_line = line;
      continue;
    }
    if (text.front() == '[') fail(line, "unknown section '" + text + "'");
    const auto eq = text.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value'");
    const auto key = trim(text.substr(0, eq));
    const auto value = trim(text.substr(eq + 1));
    if (key.empty() || value.empty()) fail(line, "expected 'key = value'");

    if (!cfg.layers.empty()) {
      auto& layer = cfg.layers.back();
      if (key != "pattern" && !seen_layer.insert(key).second)
        fail(line, "duplicate key '" + key + "'");
      if (key == "frequency")
        layer.frequency = to_double(value, line, key);
      else if (key == "phase")
        layer.phase = to_double(value, line, key);
      else if (key == "offset")
        layer.offset = to_double(value, line, key);
      else if (key == "pattern")
        layer.patterns.push_back(parse_pattern(value, line));
      else
        fail(line, "unknown layer key '" + key + "'");
      continue;
    }

    if (!seen_global.insert(key).second) fail(line, "duplicate key '" + key + "'");
    if (key == "width") {
      cfg.width = to_u32(value, line, key);
    } else if (key == "height") {
      cfg.height = to_u32(value, line, key);
    } else if (key == "frame_rate") {
      cfg.frame_rate = to_double(value, line, key);
    } else if (key == "frame_count") {
      cfg.frame_count = to_u32(value, line, key);
    } else if (key == "bit_depth") {
      const auto bd = to_u32(value, line, key);
      if (bd != 8 && bd != 16) fail(line, "bit_depth must be 8 or 16");
      cfg.bit_depth = static_cast<std::uint16_t>(bd);
    } else if (key == "clamp") {
      const auto w = words(value);
      if (w.size() != 2) fail(line, "clamp expects '<min> <max>'");
      cfg.clamp = SceneSpec::Clamp{to_double(w[0], line, key), to_double(w[1], line, key)};
    } else if (key == "noise") {
      const auto w = words(value);
      if (w.size() == 1 && w[0] == "none") {
        cfg.noise = NoiseKind::None;
      } else if (w.size() == 3 && w[0] == "uniform") {
        cfg.noise = NoiseKind::UniformAdditive;
      } else if (w.size() == 3 && w[0] == "gaussian") {
        cfg.noise = NoiseKind::GaussianAdditive;
      } else {
        fail(line, "noise expects 'none', 'uniform <lo> <hi>' or 'gaussian <mean> <sigma>'");
      }
      if (w.size() == 3) {
        cfg.noise_a = to_double(w[1], line, key);
        cfg.noise_b = to_double(w[2], line, key);
      }
    } else {
      fail(line, "unknown key '" + key + "'");
    }
  }
  close_layer();

  for (const char* key : {"width", "height", "frame_rate", "frame_count"})
    if (!seen_global.count(key)) throw ConfigError(std::string("missing required key '") + key + "'");
  return cfg;
}

SceneConfig load_scene_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scene config '" + path.string() + "'");
  return parse_scene_config(in, path.parent_path());
}

SceneSpec SceneConfig::build(std::uint64_t seed) const {
  SceneSpec spec;
  spec.width = width;
  spec.height = height;
  spec.frame_rate = frame_rate;
  spec.frame_count = frame_count;
  spec.clamp = clamp;
  spec.noise = {noise, noise_a, noise_b, seed};

  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& lc = layers[i];
    Pattern p(width, height);
    for (const auto& op : lc.patterns) {
      switch (op.kind) {
        case PatternOp::Kind::Constant:
          for (auto& v : p.values) v += op.value;
          break;
        case PatternOp::Kind::Rect:
          if (!op.rect.inside(width, height))
            throw ConfigError("layer " + std::to_string(i) + ": rect " + to_string(op.rect) +
                              " is outside the scene");
          for (auto idx : pixel_indices(op.rect, width)) p.values[idx] += op.value;
          break;
        case PatternOp::Kind::Pgm: {
          const auto img = read_pgm(base_dir / op.path);
          if (img.width != width || img.height != height)
            throw ConfigError("layer " + std::to_string(i) + ": " + op.path + " is " +
                              std::to_string(img.width) + "x" + std::to_string(img.height) +
                              ", scene is " + std::to_string(width) + "x" +
                              std::to_string(height));
          for (std::size_t k = 0; k < p.values.size(); ++k) p.values[k] += op.value * img.values[k];
          break;
        }
      }
    }
    spec.layers.push_back({std::move(p), lc.frequency, lc.phase, lc.offset});
  }
  spec.validate();
  return spec;
}

std::string SceneConfig::to_text() const {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "width = " << width << "\nheight = " << height << "\nframe_rate = " << frame_rate
      << "\nframe_count = " << frame_count << "\nbit_depth = " << bit_depth << "\nnoise = ";
  switch (noise) {
    case NoiseKind::None:
      out << "none";
      break;
    case NoiseKind::UniformAdditive:
      out << "uniform " << noise_a << ' ' << noise_b;
      break;
    case NoiseKind::GaussianAdditive:
      out << "gaussian " << noise_a << ' ' << noise_b;
      break;
  }
  out << '\n';
  if (clamp) out << "clamp = " << clamp->min << ' ' << clamp->max << '\n';
  for (const auto& l : layers) {
    out << "\n[layer]\nfrequency = " << l.frequency << "\nphase = " << l.phase
        << "\noffset = " << l.offset << '\n';
    for (const auto& op : l.patterns) {
      out << "pattern = ";
      switch (op.kind) {
        case PatternOp::Kind::Constant:
          out << "constant " << op.value;
          break;
        case PatternOp::Kind::Rect:
          out << "rect " << op.rect.x << ' ' << op.rect.y << ' ' << op.rect.w << ' ' << op.rect.h
              << ' ' << op.value;
          break;
        case PatternOp::Kind::Pgm:
          out << "pgm " << op.path << ' ' << op.value;
          break;
      }
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace qld
