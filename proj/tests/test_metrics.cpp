#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracle.hpp"
#include "qld/demod.hpp"
#include "qld/error.hpp"
#include "qld/metrics.hpp"
#include "qld/synth.hpp"

using namespace qld;

namespace {

// 9x9 image: 3x3 object in the centre, 8 background blocks around it.
Pattern checker_case(double object, double bg_a, double bg_b) {
  Pattern img(9, 9);
  int k = 0;
  for (std::uint32_t y = 0; y < 9; ++y)
    for (std::uint32_t x = 0; x < 9; ++x) {
      const bool centre = x >= 3 && x < 6 && y >= 3 && y < 6;
      img.at(x, y) = centre ? object : (k++ % 2 == 0 ? bg_a : bg_b);
    }
  return img;
}

const RegionSpec kCentre = RegionSpec::around({3, 3, 3, 3});

// Object and background taken from the Disk pattern: the dot and the ring
// of blocks around it, which is off the disk.
RegionSpec dot_regions(std::uint32_t w, std::uint32_t h) { return RegionSpec::around(disk_pattern_dot(w, h)); }

}  // namespace

TEST_CASE("cnr arithmetic example") {
  const auto img = checker_case(7, 5, 1);
  const auto r = cnr(img.view(), kCentre);
  CHECK(r.object_mean == 7.0);
  CHECK(r.background_mean == 3.0);
  CHECK(r.background_std == 2.0);
  CHECK(r.cnr == 2.0);
  CHECK(r.object_pixels == 9);
  CHECK(r.background_pixels == 72);
}

TEST_CASE("cnr is zero when the object sits at the background mean") {
  const auto r = cnr(checker_case(3, 5, 1).view(), kCentre);
  CHECK(r.cnr == doctest::Approx(0.0));
}

TEST_CASE("around() tiles the ring of eight blocks") {
  const auto rs = RegionSpec::around({10, 20, 3, 4});
  REQUIRE(rs.background.size() == 8);
  std::int64_t area = 0;
  for (const auto& b : rs.background) {
    CHECK(b.w == 3);
    CHECK(b.h == 4);
    CHECK_FALSE(b.intersects(rs.object));
    area += b.area();
  }
  CHECK(area == 8 * 12);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = i + 1; j < 8; ++j) CHECK_FALSE(rs.background[i].intersects(rs.background[j]));
  CHECK_NOTHROW(rs.validate(16, 28));
  CHECK_THROWS_AS(rs.validate(15, 28), ConfigError);
}

TEST_CASE("region validation") {
  RegionSpec rs;
  rs.object = {0, 0, 2, 2};
  CHECK_THROWS_AS(rs.validate(8, 8), ConfigError);  // no background
  rs.background = {{1, 1, 2, 2}};
  CHECK_THROWS_AS(rs.validate(8, 8), ConfigError);  // overlaps object
  rs.background = {{4, 4, 1, 1}};
  CHECK_THROWS_AS(rs.validate(8, 8), ConfigError);  // one pixel
  rs.background = {{4, 4, 2, 1}};
  CHECK_NOTHROW(rs.validate(8, 8));
}

TEST_CASE("flat background is degenerate") {
  Pattern img(9, 9, 0.1);
  img.at(4, 4) = 5;
  CHECK_THROWS_AS(cnr(img.view(), kCentre), DegenerateBackground);
}

TEST_CASE("cnr is affine-invariant and flips sign with the contrast") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 100);
  std::uniform_real_distribution<double> scale(0.01, 50);
  for (int t = 0; t < 200; ++t) {
    Pattern img(9, 9);
    for (auto& v : img.values) v = u(rng);
    const double base = cnr(img.view(), kCentre).cnr;
    const double a = scale(rng), b = u(rng) - 50;
    Pattern moved = img;
    for (auto& v : moved.values) v = a * v + b;
    CHECK(std::abs(cnr(moved.view(), kCentre).cnr - base) <= 1e-9);
    Pattern neg = img;
    for (auto& v : neg.values) v = -v;
    CHECK(std::abs(cnr(neg.view(), kCentre).cnr + base) <= 1e-9);
  }
}

TEST_CASE("fig2 demodulated cnr beats raw frames and the plain average") {
  constexpr std::uint32_t kSide = 64;
  const auto a = make_test_pattern(TestPattern::Disk, kSide, kSide);
  const auto b = make_test_pattern(TestPattern::Bars, kSide, kSide);
  const auto spec = make_fig2_scene(a, b, 5, 4242);
  const auto regions = dot_regions(kSide, kSide);

  const DemodConfig cfg{13, 221};
  SceneStream stream(spec);
  const double demod = cnr(demodulate_stream(stream, std::span(&cfg, 1)).front().view(), regions).cnr;

  double best_raw = -1e300;
  std::vector<double> mean(std::size_t{kSide} * kSide, 0.0);
  for (std::uint32_t n = 0; n < spec.frame_count; ++n) {
    const auto f = render_frame(spec, n);
    best_raw = std::max(best_raw, cnr(view_of(f), regions).cnr);
    for (std::size_t p = 0; p < mean.size(); ++p) mean[p] += f.pixels[p] / spec.frame_count;
  }
  const double avg = cnr({kSide, kSide, mean}, regions).cnr;
  CHECK(demod > best_raw);
  CHECK(demod > avg);
}

TEST_CASE("fig2 snapshot cnr rises with cycles") {
  const auto a = make_test_pattern(TestPattern::Disk, 64, 64);
  const auto b = make_test_pattern(TestPattern::Bars, 64, 64);
  SceneStream stream(make_fig2_scene(a, b, 5, 31));
  const auto curve = cnr_curve(stream, {13, 221}, dot_regions(64, 64));
  REQUIRE(curve.size() == 65);
  std::vector<double> idx, val;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    REQUIRE(curve[i].report.has_value());
    idx.push_back(static_cast<double>(i));
    val.push_back(curve[i].report->cnr);
  }
  CHECK(oracle::spearman(idx, val) >= 0.8);
  CHECK(curve.front().cycles == doctest::Approx(1.0));
  CHECK(curve.back().cycles == doctest::Approx(65.0));
}

TEST_CASE("noiseless beacon curve is degenerate at every snapshot") {
  BeaconSceneParams p;
  p.width = 16;
  p.height = 16;
  p.beacon = {6, 6, 3, 3};
  p.frame_count = 300;
  SceneStream stream(make_beacon_scene(p));
  const auto curve = cnr_curve(stream, {13, 390}, RegionSpec::around(p.beacon));
  REQUIRE(curve.size() == 10);
  for (const auto& pt : curve) {
    CHECK(pt.status == "degenerate_background");
    CHECK_FALSE(pt.report.has_value());
  }
}

TEST_CASE("noisy beacon curve grows over 100+ cycles") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    BeaconSceneParams p;
    p.width = 32;
    p.height = 32;
    p.frame_rate = 390;
    p.frame_count = 30 * 120;
    p.beacon = {14, 14, 3, 3};
    p.beacon_amplitude = 300;
    p.beacon_mean = 1000;
    p.noise = NoiseSpec::uniform(0, 1275, seed);
    SceneStream stream(make_beacon_scene(p));
    const auto curve = cnr_curve(stream, {13, 390}, RegionSpec::around(p.beacon));
    REQUIRE(curve.size() == 120);
    std::vector<double> idx, val;
    for (std::size_t i = 0; i < curve.size(); ++i) {
      REQUIRE(curve[i].report.has_value());
      idx.push_back(static_cast<double>(i));
      val.push_back(curve[i].report->cnr);
    }
    CHECK(oracle::spearman(idx, val) >= 0.8);
    CHECK(val.back() > 5 * val.front());
  }
}

TEST_CASE("curves are reproducible bit for bit") {
  BeaconSceneParams p;
  p.width = 16;
  p.height = 16;
  p.beacon = {6, 6, 3, 3};
  p.frame_count = 390;
  p.noise = NoiseSpec::uniform(0, 1275, 77);
  SceneStream s1(make_beacon_scene(p)), s2(make_beacon_scene(p));
  const auto c1 = cnr_curve(s1, {13, 390}, RegionSpec::around(p.beacon));
  const auto c2 = cnr_curve(s2, {13, 390}, RegionSpec::around(p.beacon), 0, {3});
  std::ostringstream o1, o2;
  write_curve_csv(o1, c1);
  write_curve_csv(o2, c2);
  CHECK(o1.str() == o2.str());
}

TEST_CASE("curve csv layout") {
  std::vector<CurvePoint> curve(2);
  curve[0].cycles = 1;
  curve[0].frames = 30;
  curve[0].report = CnrReport{2.5, 10, 4, 2.4, 9, 72};
  curve[1].cycles = 2;
  curve[1].frames = 60;
  curve[1].status = "degenerate_background";
  std::ostringstream out;
  write_curve_csv(out, curve);
  CHECK(out.str() ==
        "cycles,frames,cnr,object_mean,background_mean,background_std,status\n"
        "1,30,2.5,10,4,2.3999999999999999,ok\n"
        "2,60,,,,,degenerate_background\n");
}
