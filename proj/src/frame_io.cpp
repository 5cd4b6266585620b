#include "qld/frame_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "qld/error.hpp"

namespace qld {

namespace {

template <typename T>
void put_le(std::uint8_t* dst, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) dst[i] = static_cast<std::uint8_t>(value >> (8 * i));
}

template <typename T>
T get_le(const std::uint8_t* src) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(T{src[i]} << (8 * i));
  return v;
}

std::string describe(const std::filesystem::path& path) { return "'" + path.string() + "'"; }

}  // namespace

namespace qlds {

std::array<std::uint8_t, kHeaderSize> encode_header(const StreamHeader& header) {
  std::array<std::uint8_t, kHeaderSize> out{};
  std::memcpy(out.data(), kMagic.data(), kMagic.size());
  put_le<std::uint16_t>(out.data() + 4, kVersion);
  put_le<std::uint32_t>(out.data() + 6, header.width);
  put_le<std::uint32_t>(out.data() + 10, header.height);
  put_le<std::uint32_t>(out.data() + 14, header.frame_count);
  put_le<std::uint16_t>(out.data() + 18, header.bit_depth);
  put_le<std::uint64_t>(out.data() + 20, std::bit_cast<std::uint64_t>(header.frame_rate));
  return out;
}

StreamHeader decode_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize)
    throw ParseError("truncated header: " + std::to_string(bytes.size()) + " of " +
                         std::to_string(kHeaderSize) + " bytes",
                     bytes.size());
  for (std::size_t i = 0; i < kMagic.size(); ++i)
    if (bytes[i] != static_cast<std::uint8_t>(kMagic[i])) throw ParseError("bad magic", i);
  const auto version = get_le<std::uint16_t>(bytes.data() + 4);
  if (version != kVersion)
    throw ParseError("unsupported version " + std::to_string(version), 4);

  StreamHeader h;
  h.width = get_le<std::uint32_t>(bytes.data() + 6);
  h.height = get_le<std::uint32_t>(bytes.data() + 10);
  h.frame_count = get_le<std::uint32_t>(bytes.data() + 14);
  h.bit_depth = get_le<std::uint16_t>(bytes.data() + 18);
  h.frame_rate = std::bit_cast<double>(get_le<std::uint64_t>(bytes.data() + 20));
  if (h.width == 0) throw ParseError("width is zero", 6);
  if (h.height == 0) throw ParseError("height is zero", 10);
  if (h.frame_count == 0) throw ParseError("frame_count is zero", 14);
  if (h.bit_depth != 8 && h.bit_depth != 16)
    throw ParseError("bit_depth " + std::to_string(h.bit_depth) + " is not 8 or 16", 18);
  if (!(h.frame_rate > 0.0) || !std::isfinite(h.frame_rate))
    throw ParseError("frame_rate is not a positive finite number", 20);
  return h;
}

std::uint64_t payload_size(const StreamHeader& header) {
  std::uint64_t size = header.bit_depth / 8u;
  for (std::uint64_t factor : {std::uint64_t{header.width}, std::uint64_t{header.height},
                               std::uint64_t{header.frame_count}}) {
    if (factor != 0 && size > std::numeric_limits<std::uint64_t>::max() / factor)
      return std::numeric_limits<std::uint64_t>::max();
    size *= factor;
  }
  return size;
}

}  // namespace qlds

QldsWriter::QldsWriter(const std::filesystem::path& path, const StreamHeader& header)
    : path_(path), header_(header) {
  header_.validate();
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw IoError("cannot open " + describe(path) + " for writing");
  const auto bytes = qlds::encode_header(header_);
  out_.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  buffer_.resize(header_.pixels_per_frame() * (header_.bit_depth / 8u));
}

QldsWriter::~QldsWriter() {
  if (!closed_) out_.close();
}

void QldsWriter::write(const Frame& frame) {
  if (written_ >= header_.frame_count)
    throw DataError("frame " + std::to_string(frame.index) + " exceeds the declared frame_count " +
                    std::to_string(header_.frame_count));
  if (frame.width != header_.width || frame.height != header_.height ||
      frame.pixels.size() != header_.pixels_per_frame()) {
    std::ostringstream msg;
    msg << "frame " << frame.index << " is " << frame.width << "x" << frame.height
        << ", stream is " << header_.width << "x" << header_.height;
    throw DataError(msg.str());
  }
  if (frame.index != written_) {
    std::ostringstream msg;
    msg << "out-of-order frame: expected index " << written_ << ", received " << frame.index;
    throw DataError(msg.str());
  }
  const double limit = header_.bit_depth == 8 ? 255.0 : 65535.0;
  const std::size_t bps = header_.bit_depth / 8u;
  for (std::size_t p = 0; p < frame.pixels.size(); ++p) {
    const double v = frame.pixels[p];
    if (!(v >= 0.0 && v <= limit) || v != std::floor(v)) {
      std::ostringstream msg;
      msg << "frame " << frame.index << ": pixel " << p << " value " << v << " does not fit "
          << header_.bit_depth << "-bit unsigned samples";
      throw DataError(msg.str());
    }
    const auto sample = static_cast<std::uint16_t>(v);
    if (bps == 1)
      buffer_[p] = static_cast<std::uint8_t>(sample);
    else
      put_le<std::uint16_t>(buffer_.data() + 2 * p, sample);
  }
  out_.write(reinterpret_cast<const char*>(buffer_.data()),
             static_cast<std::streamsize>(buffer_.size()));
  if (!out_) throw IoError("write failed on " + describe(path_));
  ++written_;
}

void QldsWriter::close() {
  if (closed_) return;
  closed_ = true;
  if (written_ != header_.frame_count)
    throw DataError("wrote " + std::to_string(written_) + " frames but the header declares " +
                    std::to_string(header_.frame_count));
  out_.flush();
  if (!out_) throw IoError("flush failed on " + describe(path_));
  out_.close();
}

void write_stream(const std::filesystem::path& path, const StreamHeader& header,
                  std::span<const Frame> frames) {
  if (frames.size() != header.frame_count)
    throw DataError("header declares " + std::to_string(header.frame_count) + " frames, got " +
                    std::to_string(frames.size()));
  QldsWriter writer(path, header);
  for (const auto& f : frames) writer.write(f);
  writer.close();
}

void write_stream(const std::filesystem::path& path, FrameSource& frames) {
  QldsWriter writer(path, frames.header());
  Frame f;
  while (frames.next(f)) writer.write(f);
  writer.close();
}

QldsReader::QldsReader(const std::filesystem::path& path) : path_(path) {
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec) throw IoError("cannot stat " + describe(path) + ": " + ec.message());
  in_.open(path, std::ios::binary);
  if (!in_) throw IoError("cannot open " + describe(path) + " for reading");

  std::array<std::uint8_t, qlds::kHeaderSize> bytes{};
  in_.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  const auto got = static_cast<std::size_t>(in_.gcount());
  header_ = qlds::decode_header(std::span<const std::uint8_t>(bytes.data(), got));

  const std::uint64_t payload = qlds::payload_size(header_);
  if (payload > std::numeric_limits<std::uint64_t>::max() - qlds::kHeaderSize)
    throw ParseError("declared payload size overflows", 6);
  const std::uint64_t expected = qlds::kHeaderSize + payload;
  if (size < expected)
    throw ParseError("truncated payload: header declares " + std::to_string(expected) +
                         " bytes, file has " + std::to_string(size),
                     size);
  if (size > expected)
    throw ParseError(std::to_string(size - expected) + " trailing bytes after the last frame",
                     expected);
  buffer_.resize(header_.pixels_per_frame() * (header_.bit_depth / 8u));
}

bool QldsReader::next(Frame& frame) {
  if (cursor_ >= header_.frame_count) return false;
  in_.read(reinterpret_cast<char*>(buffer_.data()), static_cast<std::streamsize>(buffer_.size()));
  if (static_cast<std::size_t>(in_.gcount()) != buffer_.size()) {
    const std::uint64_t offset = qlds::kHeaderSize + std::uint64_t{cursor_} * buffer_.size() +
                                 static_cast<std::uint64_t>(in_.gcount());
    throw ParseError("unexpected end of data in frame " + std::to_string(cursor_), offset);
  }
  const std::size_t n = header_.pixels_per_frame();
  frame.width = header_.width;
  frame.height = header_.height;
  frame.index = cursor_;
  frame.pixels.resize(n);
  if (header_.bit_depth == 8) {
    for (std::size_t p = 0; p < n; ++p) frame.pixels[p] = buffer_[p];
  } else {
    for (std::size_t p = 0; p < n; ++p)
      frame.pixels[p] = get_le<std::uint16_t>(buffer_.data() + 2 * p);
  }
  ++cursor_;
  return true;
}

void quantize(Frame& frame) {
  for (auto& v : frame.pixels) v = std::nearbyint(v);
}

std::vector<std::uint16_t> scale_to_u16(const ImageView& image, const PgmScaling& scaling) {
  if (image.width == 0 || image.height == 0 || image.values.empty())
    throw ConfigError("cannot export an empty image");
  double lo = scaling.min;
  double hi = scaling.max;
  if (scaling.mode == PgmScaling::Mode::Fixed) {
    if (!(lo < hi)) throw ConfigError("fixed scaling requires min < max");
  } else {
    const auto [mn, mx] = std::minmax_element(image.values.begin(), image.values.end());
    lo = *mn;
    hi = *mx;
  }
  std::vector<std::uint16_t> out(image.values.size(), 0);
  if (!(hi > lo)) return out;  // constant image maps to 0
  const double span = hi - lo;
  for (std::size_t p = 0; p < out.size(); ++p) {
    const double t = (std::clamp(image.values[p], lo, hi) - lo) / span;
    out[p] = static_cast<std::uint16_t>(std::lround(t * 65535.0));
  }
  return out;
}

void export_pgm(const ImageView& image, const std::filesystem::path& path,
                const PgmScaling& scaling) {
  const auto levels = scale_to_u16(image, scaling);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + describe(path) + " for writing");
  out << "P5\n" << image.width << ' ' << image.height << "\n65535\n";
  std::vector<char> bytes(levels.size() * 2);
  for (std::size_t p = 0; p < levels.size(); ++p) {
    bytes[2 * p] = static_cast<char>(levels[p] >> 8);
    bytes[2 * p + 1] = static_cast<char>(levels[p] & 0xFF);
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed on " + describe(path));
}

void write_pgm8(const ImageView& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + describe(path) + " for writing");
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  std::vector<char> bytes(image.values.size());
  for (std::size_t p = 0; p < bytes.size(); ++p) {
    const double v = image.values[p];
    if (!(v >= 0.0 && v <= 255.0) || v != std::floor(v))
      throw DataError("pixel " + std::to_string(p) + " does not fit an 8-bit graymap");
    bytes[p] = static_cast<char>(static_cast<std::uint8_t>(v));
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed on " + describe(path));
}

namespace {

// Next whitespace-delimited token of a PGM header, skipping '#' comments.
std::string pgm_token(std::istream& in, const std::filesystem::path& path) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  if (tok.empty()) throw DataError("truncated PGM header in " + describe(path));
  return tok;
}

std::uint32_t pgm_number(std::istream& in, const std::filesystem::path& path) {
  const auto tok = pgm_token(in, path);
  try {
    std::size_t used = 0;
    const auto v = std::stoul(tok, &used);
    if (used != tok.size() || v > std::numeric_limits<std::uint32_t>::max()) throw 0;
    return static_cast<std::uint32_t>(v);
  } catch (...) {
    throw DataError("malformed PGM header field '" + tok + "' in " + describe(path));
  }
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + describe(path) + " for reading");
  const auto magic = pgm_token(in, path);
  if (magic != "P5" && magic != "P2")
    throw DataError(describe(path) + " is not a PGM file (magic '" + magic + "')");
  GrayImage img;
  img.width = pgm_number(in, path);
  img.height = pgm_number(in, path);
  img.maxval = pgm_number(in, path);
  if (img.width == 0 || img.height == 0) throw DataError(describe(path) + " has zero size");
  if (img.maxval == 0 || img.maxval > 65535)
    throw DataError(describe(path) + " has invalid maxval " + std::to_string(img.maxval));
  const std::size_t n = std::size_t{img.width} * img.height;
  img.values.resize(n);
  if (magic == "P2") {
    for (std::size_t p = 0; p < n; ++p) {
      const auto v = pgm_number(in, path);
      if (v > img.maxval) throw DataError(describe(path) + ": sample exceeds maxval");
      img.values[p] = v;
    }
    return img;
  }
  const std::size_t bps = img.maxval < 256 ? 1 : 2;
  std::vector<unsigned char> bytes(n * bps);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != bytes.size())
    throw DataError("truncated PGM raster in " + describe(path));
  for (std::size_t p = 0; p < n; ++p) {
    const unsigned v = bps == 1 ? bytes[p] : (unsigned{bytes[2 * p]} << 8 | bytes[2 * p + 1]);
    if (v > img.maxval) throw DataError(describe(path) + ": sample exceeds maxval");
    img.values[p] = v;
  }
  return img;
}

}  // namespace qld
