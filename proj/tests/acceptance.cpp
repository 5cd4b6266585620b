// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "oracle.hpp"
#include "qld/demod.hpp"
#include "qld/error.hpp"
#include "qld/frame_io.hpp"
#include "qld/metrics.hpp"
#include "qld/synth.hpp"
#include "temp_dir.hpp"

using namespace qld;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += "failed: " + what;
    }
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

bool same_bits(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// Shared by criteria 1 and 5: the seeded two-image scene at 256x256.
constexpr std::uint32_t kSide = 256;
constexpr std::uint64_t kSeed = 20201105;

struct TwoImage {
  Pattern a = make_test_pattern(TestPattern::Disk, kSide, kSide);
  Pattern b = make_test_pattern(TestPattern::Bars, kSide, kSide);
  SceneSpec spec = make_fig2_scene(a, b, 5, kSeed);
  std::vector<AmplitudeImage> engine;  // 13, 17, 14 Hz
  double engine_seconds = 0;
};

TwoImage& two_image() {
  static TwoImage t = [] {
    TwoImage s;
    const auto t0 = Clock::now();
    SceneStream stream(s.spec);
    const std::vector<DemodConfig> cfgs{{13, 221}, {17, 221}, {14, 221}};
    s.engine = demodulate_stream(stream, cfgs);
    s.engine_seconds = seconds_since(t0);
    return s;
  }();
  return t;
}

// 1. Each frequency reveals its own image, checked against a long-double
// direct-sum oracle computed frame by frame.
Outcome two_image_reproduction() {
  Outcome o;
  auto& t = two_image();
  const std::size_t px = std::size_t{kSide} * kSide;
  const double freqs[3] = {13, 17, 14};
  std::vector<oracle::Phasor> sums[3];
  for (auto& s : sums) s.resize(px);
  const long double two_pi = 6.283185307179586476925286766559L;
  Frame f;
  for (std::uint32_t n = 0; n < t.spec.frame_count; ++n) {
    render_frame_into(t.spec, n, f);
    for (int k = 0; k < 3; ++k) {
      const long double phi = two_pi * freqs[k] * n / 221.0L;
      const long double c = std::cos(phi), s = std::sin(phi);
      for (std::size_t p = 0; p < px; ++p) {
        sums[k][p].x += f.pixels[p] * c;
        sums[k][p].y += f.pixels[p] * s;
      }
    }
  }
  const auto sa = oracle::support(t.a);
  const auto sb = oracle::support(t.b);
  double worst_rel = 0;
  for (int k = 0; k < 3; ++k) {
    const auto ref = oracle::amplitudes(sums[k], t.spec.frame_count);
    double peak = 0;
    for (double v : ref) peak = std::max(peak, v);
    for (std::size_t p = 0; p < px; ++p)
      worst_rel = std::max(worst_rel, std::abs(ref[p] - t.engine[k].amplitude[p]) / peak);
    if (k == 0) o.require(oracle::pearson(ref, t.a.values, sa) >= 0.9, "oracle r(13 Hz, A)");
    if (k == 1) o.require(oracle::pearson(ref, t.b.values, sb) >= 0.9, "oracle r(17 Hz, B)");
    if (k == 2) {
      o.require(std::abs(oracle::pearson(ref, t.a.values, sa)) <= 0.1, "oracle |r(14 Hz, A)|");
      o.require(std::abs(oracle::pearson(ref, t.b.values, sb)) <= 0.1, "oracle |r(14 Hz, B)|");
    }
  }
  const double r13 = oracle::pearson(t.engine[0].amplitude, t.a.values, sa);
  const double r17 = oracle::pearson(t.engine[1].amplitude, t.b.values, sb);
  const double r14a = oracle::pearson(t.engine[2].amplitude, t.a.values, sa);
  const double r14b = oracle::pearson(t.engine[2].amplitude, t.b.values, sb);
  o.require(r13 >= 0.9, "r(13 Hz, A) >= 0.9");
  o.require(r17 >= 0.9, "r(17 Hz, B) >= 0.9");
  o.require(std::abs(r14a) <= 0.1 && std::abs(r14b) <= 0.1, "|r(14 Hz)| <= 0.1");
  o.require(worst_rel <= 1e-9, "engine matches oracle");
  o.require(t.engine_seconds <= 10.0, "runtime <= 10 s");
  o.detail = "256x256x" + std::to_string(t.spec.frame_count) + " r13=" + fmt("%.4f", r13) +
             " r17=" + fmt("%.4f", r17) + " r14=" + fmt("%+.4f", r14a) + "/" + fmt("%+.4f", r14b) +
             " oracle_dev=" + fmt("%.1e", worst_rel) + " synth+demod=" + fmt("%.2f", t.engine_seconds) + "s" +
             (o.detail.empty() ? "" : " | " + o.detail);
  return o;
}

// 2. Exact recovery, DC rejection and cross-frequency rejection over random
// integer-cycle draws.
Outcome exact_recovery() {
  Outcome o;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> amp(0.01, 5000), phase(-kPi, kPi), rate(50, 1000);
  double worst_amp = 0, worst_dc = 0, worst_cross = 0;
  constexpr int kDraws = 200;
  for (int d = 0; d < kDraws; ++d) {
    const double fs = rate(rng);
    const std::uint32_t frames = 64 + static_cast<std::uint32_t>(rng() % 1000);
    // Integer cycle counts k1 != k2 strictly below frames/2.
    const std::uint64_t k1 = 1 + rng() % (frames / 2 - 1);
    std::uint64_t k2 = 1 + rng() % (frames / 2 - 1);
    if (k2 == k1) k2 = k1 % (frames / 2 - 1) + 1;
    const double f1 = static_cast<double>(k1) * fs / frames;
    const double f2 = static_cast<double>(k2) * fs / frames;
    const double a = amp(rng), c = amp(rng);

    SceneSpec s;
    s.width = 2;
    s.height = 1;
    s.frame_rate = fs;
    s.frame_count = frames;
    s.layers.push_back({Pattern(2, 1, a), f1, phase(rng), 0});
    SceneSpec dc = s;
    dc.layers = {{Pattern(2, 1, 0), 0, 0, c}};

    const std::vector<DemodConfig> cfgs{{f1, fs}, {f2, fs}};
    SceneStream tone(s), flat(dc);
    const auto ti = demodulate_stream(tone, cfgs);
    const auto di = demodulate_stream(flat, cfgs);
    for (std::size_t p = 0; p < 2; ++p) {
      worst_amp = std::max(worst_amp, std::abs(ti[0].amplitude[p] - a) / a);
      worst_cross = std::max(worst_cross, ti[1].amplitude[p] / a);
      worst_dc = std::max({worst_dc, di[0].amplitude[p] / c, di[1].amplitude[p] / c});
    }
  }
  o.require(worst_amp <= 1e-9, "amplitude within 1e-9 relative");
  o.require(worst_dc <= 1e-9, "DC residual <= 1e-9 c");
  o.require(worst_cross <= 1e-9, "cross-frequency <= 1e-9 A");
  o.detail = std::to_string(kDraws) + " draws amp_err=" + fmt("%.1e", worst_amp) + " dc=" + fmt("%.1e", worst_dc) +
             " cross=" + fmt("%.1e", worst_cross) + (o.detail.empty() ? "" : " | " + o.detail);
  return o;
}

// 3. Streaming accumulation equals closed-form sums over a stored stack.
Outcome streaming_equals_batch() {
  Outcome o;
  std::mt19937_64 rng(3);
  constexpr int kStreams = 50;
  int mismatched = 0;
  for (int t = 0; t < kStreams; ++t) {
    const std::uint32_t w = t == 0 ? 64 : 16 + static_cast<std::uint32_t>(rng() % 49);
    const std::uint32_t h = t == 0 ? 64 : 16 + static_cast<std::uint32_t>(rng() % 49);
    const std::uint32_t reps = t == 0 ? 5 : 1 + static_cast<std::uint32_t>(rng() % 5);
    const auto spec = make_fig2_scene(make_test_pattern(TestPattern::Disk, w, h),
                                      make_test_pattern(TestPattern::Bars, w, h), reps, rng());
    const DemodConfig cfg{std::uniform_real_distribution<double>(0.5, 110)(rng), 221};
    const auto stack = oracle::render_stack(spec);

    const std::size_t px = std::size_t{w} * h;
    std::vector<double> x(px, 0.0), y(px, 0.0);
    for (const auto& f : stack) {
      const double phi = sample_phase(cfg, f.index);
      const double c = std::cos(phi), s = std::sin(phi);
      for (std::size_t p = 0; p < px; ++p) {
        const double cx = f.pixels[p] * c;
        const double sy = f.pixels[p] * s;
        x[p] += cx;
        y[p] += sy;
      }
    }
    LanePool pool(1 + static_cast<unsigned>(rng() % 4));
    PhasorAccumulator acc(w, h, cfg);
    SceneStream stream(spec);
    Frame f;
    while (stream.next(f)) acc.push(f, &pool);
    if (!same_bits(acc.x_sum(), x) || !same_bits(acc.y_sum(), y)) ++mismatched;
  }
  o.require(mismatched == 0, std::to_string(mismatched) + " streams differ");
  o.detail = std::to_string(kStreams) + " streams up to 64x64x1105, bitwise mismatches=" + std::to_string(mismatched) +
             (o.detail.empty() ? "" : " | " + o.detail);
  return o;
}

// 4. Background RMS amplitude of noise-only streams falls as N^-1/2.
Outcome noise_law() {
  Outcome o;
  constexpr int kSeeds = 24;
  double lo = 0, hi = -1;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    SceneSpec s;
    s.width = 32;
    s.height = 32;
    s.frame_rate = 221;
    s.frame_count = 17 * 128;
    s.noise = NoiseSpec::uniform(0, 1275, static_cast<std::uint64_t>(seed));
    SceneStream stream(s);
    const auto series = snapshots(stream, {13, 221}, 17);
    std::vector<double> n, rms;
    for (const auto& e : series.entries) {
      double ss = 0;
      for (double v : e.image.amplitude) ss += v * v;
      n.push_back(static_cast<double>(e.frames_used));
      rms.push_back(std::sqrt(ss / e.image.amplitude.size()));
    }
    const double slope = oracle::loglog_slope(n, rms);
    lo = seed == 1 ? slope : std::min(lo, slope);
    hi = seed == 1 ? slope : std::max(hi, slope);
  }
  o.require(lo >= -0.6 && hi <= -0.4, "every slope in [-0.6, -0.4]");
  o.detail = std::to_string(kSeeds) + " seeds, slopes in [" + fmt("%.4f", lo) + ", " + fmt("%.4f", hi) + "]" +
             (o.detail.empty() ? "" : " | " + o.detail);
  return o;
}

// 5. CNR arithmetic, invariances, sign, and demodulated vs raw/average.
Outcome cnr_contract() {
  Outcome o;
  const auto centre = RegionSpec::around({3, 3, 3, 3});
  Pattern img(9, 9);
  int k = 0;
  for (std::uint32_t y = 0; y < 9; ++y)
    for (std::uint32_t x = 0; x < 9; ++x)
      img.at(x, y) = (x >= 3 && x < 6 && y >= 3 && y < 6) ? 7 : (k++ % 2 == 0 ? 5 : 1);
  o.require(cnr(img.view(), centre).cnr == 2.0, "CNR = 2.0 example");

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 100), scale(0.01, 100);
  double worst_affine = 0, worst_sign = 0;
  for (int t = 0; t < 500; ++t) {
    Pattern r(9, 9);
    for (auto& v : r.values) v = u(rng);
    const double base = cnr(r.view(), centre).cnr;
    Pattern m = r, neg = r;
    const double a = scale(rng), b = 1000 * (u(rng) - 50);
    for (auto& v : m.values) v = a * v + b;
    for (auto& v : neg.values) v = -v;
    worst_affine = std::max(worst_affine, std::abs(cnr(m.view(), centre).cnr - base));
    worst_sign = std::max(worst_sign, std::abs(cnr(neg.view(), centre).cnr + base));
  }
  o.require(worst_affine <= 1e-9, "affine invariance within 1e-9");
  o.require(worst_sign <= 1e-9, "sign flip");
  for (auto& v : img.values) v = v == 7 ? 2 : v;
  const double negative = cnr(img.view(), centre).cnr;
  o.require(negative < 0, "negative CNR representable");

  auto& t = two_image();
  const auto regions = RegionSpec::around(disk_pattern_dot(kSide, kSide));
  const double demod = cnr(t.engine[0].view(), regions).cnr;
  double best_raw = -1e300;
  std::vector<double> mean(std::size_t{kSide} * kSide, 0.0);
  Frame f;
  for (std::uint32_t n = 0; n < t.spec.frame_count; ++n) {
    render_frame_into(t.spec, n, f);
    best_raw = std::max(best_raw, cnr(view_of(f), regions).cnr);
    for (std::size_t p = 0; p < mean.size(); ++p) mean[p] += f.pixels[p];
  }
  for (auto& v : mean) v /= t.spec.frame_count;
  const double avg = cnr({kSide, kSide, mean}, regions).cnr;
  o.require(demod > best_raw, "demodulated > every raw frame");
  o.require(demod > avg, "demodulated > plain average");
  o.detail = "affine_err=" + fmt("%.1e", worst_affine) + " sign_err=" + fmt("%.1e", worst_sign) +
             " negative=" + fmt("%.3f", negative) + " demod=" + fmt("%.2f", demod) + " best_raw=" +
             fmt("%.2f", best_raw) + " average=" + fmt("%.2f", avg) + (o.detail.empty() ? "" : " | " + o.detail);
  return o;
}

// 6. Sustained throughput at 600x600, one frequency; four frequencies are
// reported only.
Outcome throughput() {
  Outcome o;
  cli::BenchParams p;
  p.seconds = 4;
  const auto one = cli::run_bench(p);
  p.frequencies = 4;
  p.seconds = 2;
  const auto four = cli::run_bench(p);
  o.require(one.pass, "600x600 single frequency >= 260 fps");
  o.detail = "1 freq: " + fmt("%.1f", one.frames_per_second) + " fps (" + std::to_string(one.frames) +
             " frames); 4 freqs (report only): " + fmt("%.1f", four.frames_per_second) + " fps, " +
             fmt("%.3f", four.ms_per_frame_per_frequency) + " ms/frame/freq" +
             (o.detail.empty() ? "" : " | " + o.detail);
  return o;
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spill(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

// Returns true when opening and draining the file throws ParseError.
bool rejected(const std::filesystem::path& p) {
  try {
    QldsReader r(p);
    Frame f;
    while (r.next(f)) {
    }
  } catch (const ParseError&) {
    return true;
  }
  return false;
}

// 7. Container round-trips and corruption rejection.
Outcome format_robustness() {
  Outcome o;
  TempDir dir;
  const auto path = dir / "case.qlds";
  std::mt19937_64 rng(7);
  constexpr int kCases = 1000;
  int roundtrip_fail = 0, corrupt_missed = 0;
  for (int t = 0; t < kCases; ++t) {
    StreamHeader h;
    h.width = 1 + static_cast<std::uint32_t>(rng() % 24);
    h.height = 1 + static_cast<std::uint32_t>(rng() % 24);
    h.frame_count = 1 + static_cast<std::uint32_t>(rng() % 8);
    h.bit_depth = (rng() & 1) ? 16 : 8;
    h.frame_rate = std::uniform_real_distribution<double>(1e-3, 1e5)(rng);
    const std::uint64_t top = h.bit_depth == 8 ? 256 : 65536;
    std::vector<Frame> frames;
    for (std::uint32_t n = 0; n < h.frame_count; ++n) {
      Frame f(h.width, h.height, n);
      for (auto& v : f.pixels) v = static_cast<double>(rng() % top);
      frames.push_back(std::move(f));
    }
    write_stream(path, h, frames);
    {
      QldsReader r(path);
      bool ok = r.header().width == h.width && r.header().height == h.height &&
                r.header().frame_count == h.frame_count && r.header().bit_depth == h.bit_depth &&
                std::memcmp(&r.header().frame_rate, &h.frame_rate, sizeof(double)) == 0;
      Frame f;
      std::size_t i = 0;
      while (ok && r.next(f)) ok = i < frames.size() && f.pixels == frames[i++].pixels;
      if (!ok || i != frames.size()) ++roundtrip_fail;
    }
    const auto good = slurp(path);
    auto bad = good;
    switch (t % 4) {
      case 0:
        bad[rng() % 4] ^= static_cast<std::uint8_t>(1u << (rng() % 8));
        break;
      case 1:
        bad.resize(rng() % good.size());
        break;
      case 2:
        bad.resize(good.size() + 1 + rng() % 16, 0);
        break;
      default:
        bad[4] = static_cast<std::uint8_t>(2 + rng() % 250);
        break;
    }
    spill(path, bad);
    if (!rejected(path)) ++corrupt_missed;
  }
  o.require(roundtrip_fail == 0, "round-trip identity");
  o.require(corrupt_missed == 0, "corruption rejected");
  o.detail = std::to_string(kCases) + " cases, round-trip failures=" + std::to_string(roundtrip_fail) +
             ", corruptions accepted=" + std::to_string(corrupt_missed) + (o.detail.empty() ? "" : " | " + o.detail);
  return o;
}

// 8. CLI runs replayed from their manifests reproduce every output.
Outcome manifest_replay() {
  Outcome o;
  TempDir dir;
  const auto d = dir.path().string();
  auto run = [&](std::vector<std::string> args) {
    std::ostringstream out, err;
    return cli::run(args, out, err);
  };
  {
    std::ofstream cfg(dir / "beacon.txt");
    cfg << "width = 48\nheight = 48\nframe_rate = 390\nframe_count = 780\nnoise = uniform 0 1275\n"
           "[layer]\nfrequency = 13\npattern = rect 20 20 3 3 300\n"
           "[layer]\nfrequency = 0\npattern = rect 20 20 3 3 1000\npattern = rect 5 5 10 10 3000\n";
  }
  const std::vector<std::vector<std::string>> runs{
      {"patterns", "--width", "48", "--height", "48", "--out-dir", d, "--manifest", d + "/m_patterns.json"},
      {"synth", "--fig2", d + "/disk.pgm", d + "/bars.pgm", "--reps", "2", "--out", d + "/fig2.qlds"},
      {"synth", d + "/beacon.txt", "--seed", "99", "--out", d + "/beacon.qlds"},
      {"demod", "--in", d + "/fig2.qlds", "--freq", "13,17,14", "--snapshots", "1", "--object", "36,9,3,3", "--out",
       d + "/demod_fig2"},
      {"demod", "--in", d + "/beacon.qlds", "--freq", "13", "--norm", "raw", "--scaling", "fixed:0:50000",
       "--lanes", "3", "--out", d + "/demod_beacon"},
      {"cnr", "--in", d + "/demod_fig2/amplitude_13Hz.pgm", "--object", "36,9,3,3", "--manifest", d + "/m_cnr.json"},
      {"scan", "--in", d + "/beacon.qlds", "--region", "20,20,3,3", "--fmin", "5", "--fmax", "30", "--step", "1",
       "--out", d + "/scan.csv", "--manifest", d + "/m_scan.json"},
  };
  const std::vector<std::string> manifests{
      d + "/m_patterns.json",          d + "/fig2.qlds.manifest.json",     d + "/beacon.qlds.manifest.json",
      d + "/demod_fig2/manifest.json", d + "/demod_beacon/manifest.json", d + "/m_cnr.json",
      d + "/m_scan.json"};
  int failures = 0;
  for (const auto& args : runs)
    if (run(args) != 0) {
      ++failures;
      o.require(false, "run " + args.front());
    }
  int replayed = 0;
  for (const auto& m : manifests) {
    std::ostringstream out, err;
    const int code = cli::run({"replay", m}, out, err);
    if (code == 0 && out.str().find("replay=ok") != std::string::npos)
      ++replayed;
    else
      o.require(false, "replay " + m.substr(d.size() + 1));
  }
  o.detail = std::to_string(replayed) + "/" + std::to_string(manifests.size()) + " manifests replayed bitwise" +
             (o.detail.empty() ? "" : " | " + o.detail);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"two-image reproduction", two_image_reproduction},
      {"exact recovery", exact_recovery},
      {"streaming equals batch", streaming_equals_batch},
      {"noise-averaging law", noise_law},
      {"CNR contract", cnr_contract},
      {"throughput", throughput},
      {"format robustness", format_robustness},
      {"manifest reproducibility", manifest_replay},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %zu %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
