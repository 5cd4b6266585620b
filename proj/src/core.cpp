#include "qld/core.hpp"

#include <cmath>
#include <sstream>

#include "qld/error.hpp"

namespace qld {

void Frame::validate() const {
  if (pixels.size() != std::size_t{width} * height) {
    std::ostringstream msg;
    msg << "frame " << index << ": " << pixels.size() << " pixels for a " << width << "x"
        << height << " frame";
    throw DataError(msg.str());
  }
  for (std::size_t p = 0; p < pixels.size(); ++p) {
    if (!(pixels[p] >= 0.0) || !std::isfinite(pixels[p])) {
      std::ostringstream msg;
      msg << "frame " << index << ": pixel " << p << " has invalid value " << pixels[p];
      throw DataError(msg.str());
    }
  }
}

void StreamHeader::validate() const {
  if (width == 0 || height == 0) throw ConfigError("stream dimensions must be non-zero");
  if (frame_count < 1) throw ConfigError("stream must contain at least one frame");
  if (!(frame_rate > 0.0) || !std::isfinite(frame_rate))
    throw ConfigError("frame_rate must be positive");
  if (bit_depth != 8 && bit_depth != 16)
    throw ConfigError("bit_depth must be 8 or 16, got " + std::to_string(bit_depth));
}

std::string to_string(Normalization n) {
  return n == Normalization::RawSums ? "raw" : "two-over-n";
}

Normalization parse_normalization(const std::string& s) {
  if (s == "raw") return Normalization::RawSums;
  if (s == "two-over-n") return Normalization::TwoOverN;
  throw ConfigError("unknown normalization '" + s + "' (expected raw or two-over-n)");
}

void DemodConfig::validate() const {
  if (!(frame_rate > 0.0) || !std::isfinite(frame_rate))
    throw ConfigError("frame_rate must be positive");
  if (!(frequency > 0.0) || !std::isfinite(frequency))
    throw ConfigError("demodulation frequency must be positive");
  if (!(frequency < frame_rate / 2.0)) {
    std::ostringstream msg;
    msg << "demodulation frequency " << frequency << " Hz is not below the Nyquist bound "
        << frame_rate / 2.0 << " Hz (frame_rate " << frame_rate << " fps)";
    throw ConfigError(msg.str());
  }
  if (!std::isfinite(phase_origin)) throw ConfigError("phase_origin must be finite");
}

std::uint64_t DemodConfig::frames_per_cycle() const {
  const double p = std::round(frame_rate / frequency);
  return p < 1.0 ? 1 : static_cast<std::uint64_t>(p);
}

double wrap_phase(double radians) {
  double r = std::remainder(radians, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  if (r > kPi) r -= kTwoPi;
  return r;
}

double sample_phase(const DemodConfig& config, std::uint64_t n) {
  // f*n is exact for integer-valued f and n < 2^53 / f, and fmod is exact,
  // so whole cycles vanish without rounding.
  const double cycles = std::fmod(config.frequency * static_cast<double>(n), config.frame_rate) /
                        config.frame_rate;
  return wrap_phase(kTwoPi * cycles + config.phase_origin);
}

MemoryStream::MemoryStream(StreamHeader header, std::vector<Frame> frames)
    : header_(header), frames_(std::move(frames)) {
  header_.frame_count = static_cast<std::uint32_t>(frames_.size());
}

bool MemoryStream::next(Frame& frame) {
  if (cursor_ >= frames_.size()) return false;
  frame = frames_[cursor_++];
  return true;
}

}  // namespace qld
