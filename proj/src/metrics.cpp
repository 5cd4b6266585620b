#include "qld/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "qld/error.hpp"

namespace qld {

RegionSpec RegionSpec::around(const Rect& object) {
  RegionSpec spec;
  spec.object = object;
  for (int row = -1; row <= 1; ++row) {
    for (int col = -1; col <= 1; ++col) {
      if (row == 0 && col == 0) continue;
      spec.background.push_back(
          {object.x + col * object.w, object.y + row * object.h, object.w, object.h});
    }
  }
  return spec;
}

void RegionSpec::validate(std::uint32_t width, std::uint32_t height) const {
  auto bounds = [&](const Rect& r, const std::string& name) {
    if (!r.inside(width, height))
      throw ConfigError(name + " rect " + to_string(r) + " is outside the " +
                        std::to_string(width) + "x" + std::to_string(height) + " image");
  };
  bounds(object, "object");
  std::int64_t area = 0;
  for (std::size_t i = 0; i < background.size(); ++i) {
    const auto name = "background block " + std::to_string(i);
    bounds(background[i], name);
    if (background[i].intersects(object))
      throw ConfigError(name + " " + to_string(background[i]) + " overlaps the object rect");
    area += background[i].area();
  }
  if (area < 2) throw ConfigError("background must cover at least two pixels");
}

CnrReport cnr(const ImageView& image, const RegionSpec& regions) {
  regions.validate(image.width, image.height);
  if (image.values.size() != std::size_t{image.width} * image.height)
    throw DataError("image buffer does not match its dimensions");

  CnrReport report;
  double obj_sum = 0.0;
  for (auto p : pixel_indices(regions.object, image.width)) obj_sum += image.values[p];
  report.object_pixels = static_cast<std::size_t>(regions.object.area());
  report.object_mean = obj_sum / static_cast<double>(report.object_pixels);

  // Union of the blocks, each pixel counted once.
  std::vector<char> mask(image.values.size(), 0);
  std::vector<std::size_t> back;
  for (const auto& r : regions.background)
    for (auto p : pixel_indices(r, image.width))
      if (!mask[p]) {
        mask[p] = 1;
        back.push_back(p);
      }
  report.background_pixels = back.size();
  const auto count = static_cast<double>(back.size());

  double back_sum = 0.0;
  bool flat = true;
  for (auto p : back) {
    back_sum += image.values[p];
    flat = flat && image.values[p] == image.values[back.front()];
  }
  report.background_mean = back_sum / count;

  double sq = 0.0;
  for (auto p : back) {
    const double d = image.values[p] - report.background_mean;
    sq += d * d;
  }
  report.background_std = std::sqrt(sq / count);
  // A flat background can still leave rounding residue in the mean.
  if (flat || !(report.background_std > 0.0)) throw DegenerateBackground();

  report.cnr = (report.object_mean - report.background_mean) / report.background_std;
  return report;
}

std::vector<CurvePoint> cnr_curve(const SnapshotSeries& series, const RegionSpec& regions) {
  std::vector<CurvePoint> curve;
  curve.reserve(series.entries.size());
  for (const auto& entry : series.entries) {
    CurvePoint pt;
    pt.frames = entry.frames_used;
    pt.cycles = static_cast<double>(entry.frames_used) * entry.image.config.frequency /
                entry.image.config.frame_rate;
    try {
      pt.report = cnr(entry.image.view(), regions);
    } catch (const DegenerateBackground&) {
      pt.status = "degenerate_background";
    }
    curve.push_back(std::move(pt));
  }
  return curve;
}

std::vector<CurvePoint> cnr_curve(FrameSource& stream, const DemodConfig& config,
                                  const RegionSpec& regions, std::uint64_t cadence,
                                  const EngineOptions& options) {
  regions.validate(stream.header().width, stream.header().height);
  return cnr_curve(snapshots(stream, config, cadence, options), regions);
}

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve) {
  out << "cycles,frames,cnr,object_mean,background_mean,background_std,status\n";
  std::ostringstream row;
  row << std::setprecision(17);
  for (const auto& pt : curve) {
    row.str("");
    row << pt.cycles << ',' << pt.frames << ',';
    if (pt.report) {
      row << pt.report->cnr << ',' << pt.report->object_mean << ',' << pt.report->background_mean
          << ',' << pt.report->background_std;
    } else {
      row << ",,,";
    }
    row << ',' << pt.status << '\n';
    out << row.str();
  }
}

}  // namespace qld
