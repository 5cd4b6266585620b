#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <vector>

#include "qld/core.hpp"

namespace qld {

// QLDS container, version 1. All fields little-endian, no padding:
//
//   offset  size  field
//        0     4  magic "QLDS"
//        4     2  version (u16) = 1
//        6     4  width (u32)
//       10     4  height (u32)
//       14     4  frame_count (u32)
//       18     2  bit_depth (u16), 8 or 16
//       20     8  frame_rate (f64, IEEE-754)
//       28        frames, each width*height unsigned samples, row-major
namespace qlds {
inline constexpr std::array<char, 4> kMagic = {'Q', 'L', 'D', 'S'};
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 28;

std::array<std::uint8_t, kHeaderSize> encode_header(const StreamHeader& header);
// Throws ParseError with the offset of the offending field.
StreamHeader decode_header(std::span<const std::uint8_t> bytes);
std::uint64_t payload_size(const StreamHeader& header);
}  // namespace qlds

// Sequential container writer. Frames must be integer-valued and fit the
// declared bit depth; the writer checks the frame count on close().
class QldsWriter {
 public:
  QldsWriter(const std::filesystem::path& path, const StreamHeader& header);
  ~QldsWriter();

  QldsWriter(const QldsWriter&) = delete;
  QldsWriter& operator=(const QldsWriter&) = delete;

  void write(const Frame& frame);
  void close();

 private:
  std::filesystem::path path_;
  StreamHeader header_;
  std::ofstream out_;
  std::vector<std::uint8_t> buffer_;
  std::uint32_t written_ = 0;
  bool closed_ = false;
};

void write_stream(const std::filesystem::path& path, const StreamHeader& header,
                  std::span<const Frame> frames);
void write_stream(const std::filesystem::path& path, FrameSource& frames);

// Lazy reader: the header and file size are checked on open, frames are
// read one at a time.
class QldsReader : public FrameSource {
 public:
  explicit QldsReader(const std::filesystem::path& path);

  const StreamHeader& header() const override { return header_; }
  bool next(Frame& frame) override;

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  StreamHeader header_;
  std::vector<std::uint8_t> buffer_;
  std::uint32_t cursor_ = 0;
};

// Rounds every pixel to the nearest integer (ties to even). Values outside
// the container's range are left for QldsWriter to reject.
void quantize(Frame& frame);

struct PgmScaling {
  enum class Mode { FullRange, Fixed } mode = Mode::FullRange;
  double min = 0.0;
  double max = 0.0;

  static PgmScaling full_range() { return {}; }
  static PgmScaling fixed(double lo, double hi) { return {Mode::Fixed, lo, hi}; }
};

// Maps image values to 16-bit grey levels.
std::vector<std::uint16_t> scale_to_u16(const ImageView& image, const PgmScaling& scaling);

// Binary 16-bit PGM (P5, maxval 65535, big-endian samples).
void export_pgm(const ImageView& image, const std::filesystem::path& path,
                const PgmScaling& scaling = PgmScaling::full_range());

struct GrayImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t maxval = 0;
  std::vector<double> values;

  ImageView view() const { return {width, height, values}; }
};

// Reads P2 (ASCII) or P5 (binary, 8- or 16-bit) graymaps.
GrayImage read_pgm(const std::filesystem::path& path);

// Writes an 8-bit binary PGM; values must be integers in 0-255.
void write_pgm8(const ImageView& image, const std::filesystem::path& path);

}  // namespace qld
