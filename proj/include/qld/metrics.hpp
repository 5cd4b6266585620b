#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qld/core.hpp"
#include "qld/demod.hpp"
#include "qld/geometry.hpp"

namespace qld {

// Object rectangle plus the background blocks it is compared against.
struct RegionSpec {
  Rect object{0, 0, 3, 3};
  std::vector<Rect> background;

  // Eight blocks of the object's size tiling the ring around it: the outer
  // cells of a 3x3 grid whose centre cell is the object.
  static RegionSpec around(const Rect& object);

  // Throws ConfigError unless every rect is in bounds, the object is
  // disjoint from each background block and the background covers at
  // least two pixels.
  void validate(std::uint32_t width, std::uint32_t height) const;
};

struct CnrReport {
  double cnr = 0.0;
  double object_mean = 0.0;
  double background_mean = 0.0;
  double background_std = 0.0;  // population form
  std::size_t object_pixels = 0;
  std::size_t background_pixels = 0;
};

// (mean(object) - mean(background)) / rms(background - mean(background)).
// Throws DegenerateBackground when the background has zero variance.
CnrReport cnr(const ImageView& image, const RegionSpec& regions);

struct CurvePoint {
  double cycles = 0.0;
  std::uint64_t frames = 0;
  std::optional<CnrReport> report;  // empty when the snapshot is degenerate
  std::string status = "ok";
};

std::vector<CurvePoint> cnr_curve(const SnapshotSeries& series, const RegionSpec& regions);

std::vector<CurvePoint> cnr_curve(FrameSource& stream, const DemodConfig& config,
                                  const RegionSpec& regions, std::uint64_t cadence = 0,
                                  const EngineOptions& options = {});

// Header row plus one row per point:
// cycles,frames,cnr,object_mean,background_mean,background_std,status
void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve);

}  // namespace qld
