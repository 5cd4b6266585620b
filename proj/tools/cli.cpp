#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "qld/demod.hpp"
#include "qld/error.hpp"
#include "qld/frame_io.hpp"
#include "qld/metrics.hpp"
#include "qld/scene_config.hpp"
#include "qld/synth.hpp"

namespace qld::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a64_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for hashing");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[static_cast<std::size_t>(i)]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

namespace {

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

std::string freq_label(double f) {
  std::ostringstream s;
  s << std::setprecision(10) << f;
  return s.str() + "Hz";
}

std::string absolute(const std::string& p) { return fs::absolute(p).lexically_normal().string(); }

// Everything a run leaves behind for its manifest.
struct RunRecord {
  std::string subcommand;
  std::vector<std::string> argv;  // canonical: every default spelled out
  json parameters = json::object();
  std::optional<std::uint64_t> seed;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  bool deterministic_stdout = true;
  std::optional<double> throughput_fps;
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  bool write_manifests = true;
};

void write_manifest(const fs::path& path, const RunRecord& rec, const std::string& stdout_text,
                    double wall_clock_s) {
  json m;
  m["tool"] = "qld";
  m["version"] = kToolVersion;
  m["subcommand"] = rec.subcommand;
  m["argv"] = rec.argv;
  m["parameters"] = rec.parameters;
  if (rec.seed) m["seed"] = *rec.seed;
  m["inputs"] = json::array();
  for (const auto& p : rec.inputs) m["inputs"].push_back({{"path", p}, {"fnv1a64", hex(fnv1a64_file(p))}});
  m["outputs"] = json::array();
  for (const auto& p : rec.outputs) m["outputs"].push_back({{"path", p}, {"fnv1a64", hex(fnv1a64_file(p))}});
  if (rec.deterministic_stdout) m["stdout_fnv1a64"] = hex(fnv1a64(stdout_text));
  m["wall_clock_s"] = wall_clock_s;
  if (rec.throughput_fps) m["throughput_fps"] = *rec.throughput_fps;
  std::ofstream f(path);
  if (!f) throw IoError("cannot write manifest '" + path.string() + "'");
  f << m.dump(2) << '\n';
  if (!f) throw IoError("write failed on manifest '" + path.string() + "'");
}

Pattern pattern_from_pgm(const std::string& path) {
  const auto img = read_pgm(path);
  Pattern p(img.width, img.height);
  p.values = img.values;
  return p;
}

RegionSpec regions_from(const std::string& object, const std::vector<std::string>& background) {
  const Rect obj = parse_rect(object);
  if (background.empty() || (background.size() == 1 && background[0] == "auto"))
    return RegionSpec::around(obj);
  RegionSpec spec;
  spec.object = obj;
  for (const auto& b : background) spec.background.push_back(parse_rect(b));
  return spec;
}

PgmScaling parse_scaling(const std::string& text) {
  if (text == "full") return PgmScaling::full_range();
  if (text.rfind("fixed:", 0) == 0) {
    const auto rest = text.substr(6);
    const auto colon = rest.find(':');
    if (colon != std::string::npos) {
      try {
        return PgmScaling::fixed(std::stod(rest.substr(0, colon)), std::stod(rest.substr(colon + 1)));
      } catch (const std::exception&) {
      }
    }
  }
  throw ConfigError("scaling must be 'full' or 'fixed:<min>:<max>', got '" + text + "'");
}

bool is_qlds(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[4] = {};
  in.read(magic, 4);
  return in.gcount() == 4 && std::equal(magic, magic + 4, qlds::kMagic.begin());
}

// --- synth -----------------------------------------------------------------

struct SynthOpts {
  std::string config;
  std::vector<std::string> fig2;
  std::uint32_t reps = 5;
  std::uint64_t seed = kDefaultSeed;
  std::string out;
  int bit_depth = 0;  // 0: config value, or 16
  std::string manifest;
};

void synth(const SynthOpts& o, Context&, RunRecord& rec, std::ostream& report) {
  SceneSpec spec;
  int bit_depth = o.bit_depth;
  if (!o.fig2.empty()) {
    if (!o.config.empty()) throw ConfigError("give either a scene config or --fig2, not both");
    spec = make_fig2_scene(pattern_from_pgm(o.fig2[0]), pattern_from_pgm(o.fig2[1]), o.reps, o.seed);
    rec.inputs = {absolute(o.fig2[0]), absolute(o.fig2[1])};
    if (bit_depth == 0) bit_depth = 16;
  } else {
    if (o.config.empty()) throw ConfigError("synth needs a scene config file or --fig2 A B");
    const auto cfg = load_scene_config(o.config);
    spec = cfg.build(o.seed);
    rec.inputs = {absolute(o.config)};
    if (bit_depth == 0) bit_depth = cfg.bit_depth;
  }
  if (bit_depth != 8 && bit_depth != 16) throw ConfigError("--bit-depth must be 8 or 16");

  SceneStream scene(spec, static_cast<std::uint16_t>(bit_depth));
  QldsWriter writer(o.out, scene.header());
  Frame frame;
  while (scene.next(frame)) {
    quantize(frame);
    writer.write(frame);
  }
  writer.close();
  rec.outputs = {absolute(o.out)};

  rec.argv = {"synth"};
  if (!o.config.empty()) rec.argv.push_back(absolute(o.config));
  if (!o.fig2.empty()) {
    rec.argv.insert(rec.argv.end(), {"--fig2", absolute(o.fig2[0]), absolute(o.fig2[1]), "--reps",
                                     std::to_string(o.reps)});
  }
  rec.argv.insert(rec.argv.end(), {"--seed", std::to_string(o.seed), "--bit-depth",
                                   std::to_string(bit_depth), "--out", absolute(o.out)});
  rec.seed = o.seed;
  rec.parameters = {{"width", spec.width},         {"height", spec.height},
                    {"frame_rate", spec.frame_rate}, {"frame_count", spec.frame_count},
                    {"bit_depth", bit_depth},       {"layers", spec.layers.size()},
                    {"fig2", !o.fig2.empty()},      {"reps", o.reps}};

  report << "out=" << absolute(o.out) << "\nwidth=" << spec.width << "\nheight=" << spec.height
         << "\nframes=" << spec.frame_count << "\nframe_rate=" << num(spec.frame_rate)
         << "\nbit_depth=" << bit_depth << "\nseed=" << o.seed << '\n';
}

// --- demod -----------------------------------------------------------------

struct DemodOpts {
  std::string in;
  std::vector<double> freqs;
  std::string norm = "two-over-n";
  double snapshot_cycles = 0;
  std::string object;
  std::vector<std::string> background;
  std::string scaling = "full";
  unsigned lanes = 1;
  std::string out;
  std::string manifest;
};

void demod(const DemodOpts& o, Context&, RunRecord& rec, std::ostream& report) {
  const auto normalization = parse_normalization(o.norm);
  const auto scaling = parse_scaling(o.scaling);
  if (o.snapshot_cycles < 0) throw ConfigError("--snapshots must be positive");
  if (o.lanes == 0) throw ConfigError("--lanes must be >= 1");

  QldsReader reader(o.in);
  const auto& header = reader.header();
  std::vector<DemodConfig> configs;
  for (double f : o.freqs) {
    DemodConfig c{f, header.frame_rate, normalization, 0.0};
    c.validate();
    configs.push_back(c);
  }
  std::optional<RegionSpec> regions;
  if (!o.object.empty()) {
    regions = regions_from(o.object, o.background);
    regions->validate(header.width, header.height);
  }
  fs::create_directories(o.out);

  const auto images = demodulate_stream(reader, configs, EngineOptions{o.lanes});
  rec.inputs = {absolute(o.in)};
  report << "frames=" << header.frame_count << "\nframe_rate=" << num(header.frame_rate) << '\n';
  for (const auto& img : images) {
    const auto label = freq_label(img.config.frequency);
    const auto path = absolute((fs::path(o.out) / ("amplitude_" + label + ".pgm")).string());
    export_pgm(img.view(), path, scaling);
    rec.outputs.push_back(path);
    const auto [mn, mx] = std::minmax_element(img.amplitude.begin(), img.amplitude.end());
    report << "image." << label << '=' << path << "\nmin_amplitude." << label << '=' << num(*mn)
           << "\nmax_amplitude." << label << '=' << num(*mx) << '\n';
    if (regions) {
      try {
        report << "cnr." << label << '=' << num(cnr(img.view(), *regions).cnr) << '\n';
      } catch (const DegenerateBackground&) {
        report << "cnr." << label << "=degenerate_background\n";
      }
    }
  }

  if (o.snapshot_cycles > 0) {
    for (const auto& config : configs) {
      const double cadence_f = std::round(o.snapshot_cycles * header.frame_rate / config.frequency);
      const auto cadence = static_cast<std::uint64_t>(std::max(1.0, cadence_f));
      QldsReader again(o.in);
      const auto series = snapshots(again, config, cadence, EngineOptions{o.lanes});
      const auto label = freq_label(config.frequency);
      const auto path = absolute((fs::path(o.out) / ("snapshots_" + label + ".csv")).string());
      std::ofstream csv(path);
      if (!csv) throw IoError("cannot write '" + path + "'");
      if (regions) {
        write_curve_csv(csv, cnr_curve(series, *regions));
      } else {
        csv << "cycles,frames,mean_amplitude,max_amplitude\n";
        for (const auto& e : series.entries) {
          double sum = 0.0;
          double mx = 0.0;
          for (double a : e.image.amplitude) {
            sum += a;
            mx = std::max(mx, a);
          }
          csv << num(static_cast<double>(e.frames_used) * config.frequency / config.frame_rate)
              << ',' << e.frames_used << ','
              << num(sum / static_cast<double>(e.image.amplitude.size())) << ',' << num(mx) << '\n';
        }
      }
      csv.close();
      if (!csv) throw IoError("write failed on '" + path + "'");
      rec.outputs.push_back(path);
      report << "snapshots." << label << '=' << path << "\nsnapshot_cadence." << label << '='
             << series.cadence << "\nsnapshot_count." << label << '=' << series.entries.size()
             << '\n';
      if (series.cadence_exceeds_stream)
        report << "snapshot_warning." << label << "=cadence exceeds stream length\n";
    }
  }

  std::string freq_list;
  for (std::size_t i = 0; i < o.freqs.size(); ++i) freq_list += (i ? "," : "") + num(o.freqs[i]);
  rec.argv = {"demod",   "--in",      absolute(o.in), "--freq",          freq_list,
              "--norm",  o.norm,      "--scaling",    o.scaling,         "--lanes",
              std::to_string(o.lanes), "--out",       absolute(o.out)};
  if (o.snapshot_cycles > 0)
    rec.argv.insert(rec.argv.end(), {"--snapshots", num(o.snapshot_cycles)});
  if (regions) {
    rec.argv.insert(rec.argv.end(), {"--object", o.object});
    for (const auto& b : o.background) rec.argv.insert(rec.argv.end(), {"--background", b});
  }
  rec.parameters = {{"frequencies", o.freqs}, {"normalization", o.norm},
                    {"scaling", o.scaling},   {"snapshot_cycles", o.snapshot_cycles},
                    {"lanes", o.lanes},       {"frame_rate", header.frame_rate}};
}

// --- cnr -------------------------------------------------------------------

struct CnrOpts {
  std::string in;
  std::string object;
  std::vector<std::string> background;
  std::int64_t frame = -1;
  bool average = false;
  std::string manifest;
};

void cnr_cmd(const CnrOpts& o, Context&, RunRecord& rec, std::ostream& report) {
  const auto regions = regions_from(o.object, o.background);
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<double> values;
  std::string source;
  if (is_qlds(o.in)) {
    QldsReader reader(o.in);
    width = reader.header().width;
    height = reader.header().height;
    Frame f;
    if (o.average) {
      values.assign(reader.header().pixels_per_frame(), 0.0);
      std::uint64_t n = 0;
      while (reader.next(f)) {
        for (std::size_t p = 0; p < values.size(); ++p) values[p] += f.pixels[p];
        ++n;
      }
      for (auto& v : values) v /= static_cast<double>(n);
      source = "average";
    } else {
      const std::int64_t want = o.frame < 0 ? 0 : o.frame;
      if (want >= reader.header().frame_count)
        throw ConfigError("--frame " + std::to_string(want) + " out of range (stream has " +
                          std::to_string(reader.header().frame_count) + " frames)");
      while (reader.next(f) && static_cast<std::int64_t>(f.index) < want) {
      }
      values = f.pixels;
      source = "frame " + std::to_string(want);
    }
  } else {
    if (o.average || o.frame >= 0)
      throw ConfigError("--frame/--average apply to QLDS streams only");
    auto img = read_pgm(o.in);
    width = img.width;
    height = img.height;
    values = std::move(img.values);
    source = "image";
  }
  const auto r = cnr(ImageView{width, height, values}, regions);
  report << "source=" << source << "\ncnr=" << num(r.cnr) << "\nobject_mean=" << num(r.object_mean)
         << "\nbackground_mean=" << num(r.background_mean)
         << "\nbackground_std=" << num(r.background_std) << "\nobject_pixels=" << r.object_pixels
         << "\nbackground_pixels=" << r.background_pixels << '\n';

  rec.inputs = {absolute(o.in)};
  rec.argv = {"cnr", "--in", absolute(o.in), "--object", o.object};
  for (const auto& b : o.background) rec.argv.insert(rec.argv.end(), {"--background", b});
  if (o.average) rec.argv.push_back("--average");
  if (o.frame >= 0) rec.argv.insert(rec.argv.end(), {"--frame", std::to_string(o.frame)});
  rec.parameters = {{"object", o.object}, {"background", o.background}, {"source", source}};
}

// --- scan ------------------------------------------------------------------

struct ScanOpts {
  std::string in;
  std::string region;
  double fmin = 0;
  double fmax = 0;
  double step = 0;
  std::string out;
  std::string manifest;
};

void scan(const ScanOpts& o, Context&, RunRecord& rec, std::ostream& report) {
  QldsReader reader(o.in);
  const Rect r = parse_rect(o.region);
  if (!r.inside(reader.header().width, reader.header().height))
    throw ConfigError("region " + o.region + " is outside the frame");
  const auto pixels = pixel_indices(r, reader.header().width);
  const auto result = frequency_scan(reader, pixels, o.fmin, o.fmax, o.step);

  std::ostringstream csv;
  csv << "frequency,response\n";
  for (std::size_t k = 0; k < result.frequencies.size(); ++k)
    csv << num(result.frequencies[k]) << ',' << num(result.response[k]) << '\n';
  const auto peak = std::max_element(result.response.begin(), result.response.end()) -
                    result.response.begin();
  if (o.out.empty()) {
    report << csv.str();
  } else {
    std::ofstream f(o.out);
    if (!f) throw IoError("cannot write '" + o.out + "'");
    f << csv.str();
    f.close();
    if (!f) throw IoError("write failed on '" + o.out + "'");
    rec.outputs = {absolute(o.out)};
    report << "out=" << absolute(o.out) << "\npeak_frequency="
           << num(result.frequencies[static_cast<std::size_t>(peak)]) << '\n';
  }

  rec.inputs = {absolute(o.in)};
  rec.argv = {"scan", "--in", absolute(o.in), "--region", o.region, "--fmin", num(o.fmin),
              "--fmax", num(o.fmax), "--step", num(o.step)};
  if (!o.out.empty()) rec.argv.insert(rec.argv.end(), {"--out", absolute(o.out)});
  rec.parameters = {{"region", o.region}, {"fmin", o.fmin}, {"fmax", o.fmax}, {"step", o.step}};
}

// --- bench -----------------------------------------------------------------

struct BenchOpts {
  BenchParams params;
  double target = 0;  // 0: same as fps
  std::string manifest;
};

bool bench(const BenchOpts& o, Context&, RunRecord& rec, std::ostream& report) {
  BenchParams p = o.params;
  p.target_fps = o.target > 0 ? o.target : p.fps;
  const auto r = run_bench(p);
  report << "width=" << p.width << "\nheight=" << p.height << "\nfrequencies=" << r.frequencies
         << "\nlanes=" << p.lanes << "\nframes=" << r.frames << "\nfinalizes=" << r.finalizes
         << "\nelapsed_s=" << num(r.elapsed_s) << "\nframes_per_second=" << num(r.frames_per_second)
         << "\ndemods_per_second=" << num(r.demods_per_second)
         << "\nms_per_frame_per_frequency=" << num(r.ms_per_frame_per_frequency)
         << "\ntarget_fps=" << num(p.target_fps) << "\npass=" << (r.pass ? "true" : "false")
         << '\n';
  rec.deterministic_stdout = false;
  rec.throughput_fps = r.frames_per_second;
  rec.argv = {"bench",    "--width",   std::to_string(p.width),  "--height",
              std::to_string(p.height), "--fps", num(p.fps),     "--seconds",
              num(p.seconds), "--freqs", std::to_string(p.frequencies), "--lanes",
              std::to_string(p.lanes), "--target-fps", num(p.target_fps)};
  rec.parameters = {{"width", p.width},     {"height", p.height},        {"fps", p.fps},
                    {"seconds", p.seconds}, {"frequencies", p.frequencies}, {"lanes", p.lanes},
                    {"target_fps", p.target_fps}};
  // Only a single-frequency run is held to the target.
  return r.pass || p.frequencies > 1;
}

// --- patterns --------------------------------------------------------------

struct PatternOpts {
  std::uint32_t width = 256;
  std::uint32_t height = 256;
  std::string out_dir;
  std::string manifest;
};

void patterns(const PatternOpts& o, Context&, RunRecord& rec, std::ostream& report) {
  fs::create_directories(o.out_dir);
  const auto disk = absolute((fs::path(o.out_dir) / "disk.pgm").string());
  const auto bars = absolute((fs::path(o.out_dir) / "bars.pgm").string());
  write_pgm8(make_test_pattern(TestPattern::Disk, o.width, o.height).view(), disk);
  write_pgm8(make_test_pattern(TestPattern::Bars, o.width, o.height).view(), bars);
  const Rect dot = disk_pattern_dot(o.width, o.height);
  report << "disk=" << disk << "\nbars=" << bars << "\ndisk_dot=" << to_string(dot) << '\n';
  rec.outputs = {disk, bars};
  rec.argv = {"patterns", "--width", std::to_string(o.width), "--height", std::to_string(o.height),
              "--out-dir", absolute(o.out_dir)};
  rec.parameters = {{"width", o.width}, {"height", o.height}};
}

int dispatch(const std::vector<std::string>& args, Context& ctx);

// --- replay ----------------------------------------------------------------

int replay(const std::string& manifest_path, Context& ctx) {
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open manifest '" + manifest_path + "'");
  json m;
  try {
    in >> m;
  } catch (const json::exception& e) {
    throw DataError("manifest '" + manifest_path + "' is not valid JSON: " + e.what());
  }
  if (!m.contains("argv") || !m["argv"].is_array())
    throw DataError("manifest '" + manifest_path + "' has no argv");
  const auto argv = m["argv"].get<std::vector<std::string>>();

  std::ostringstream captured;
  std::ostringstream diag;
  Context inner{captured, diag, false};
  const int code = dispatch(argv, inner);
  if (code != kOk && code != kCheckFailed) {
    ctx.err << diag.str();
    return code;
  }

  int mismatches = 0;
  for (const auto& o : m.value("outputs", json::array())) {
    const auto path = o.at("path").get<std::string>();
    const auto expected = o.at("fnv1a64").get<std::string>();
    const auto actual = hex(fnv1a64_file(path));
    const bool ok = actual == expected;
    mismatches += ok ? 0 : 1;
    ctx.out << "output=" << path << " expected=" << expected << " actual=" << actual
            << (ok ? " ok" : " MISMATCH") << '\n';
  }
  if (m.contains("stdout_fnv1a64")) {
    const auto expected = m["stdout_fnv1a64"].get<std::string>();
    const auto actual = hex(fnv1a64(captured.str()));
    const bool ok = actual == expected;
    mismatches += ok ? 0 : 1;
    ctx.out << "stdout expected=" << expected << " actual=" << actual
            << (ok ? " ok" : " MISMATCH") << '\n';
  }
  ctx.out << "replay=" << (mismatches == 0 ? "ok" : "mismatch") << '\n';
  return mismatches == 0 ? kOk : kCheckFailed;
}

template <typename Fn>
int execute(Context& ctx, const std::string& name, const std::string& manifest, Fn&& body) {
  RunRecord rec;
  rec.subcommand = name;
  std::ostringstream report;
  const auto start = std::chrono::steady_clock::now();
  const bool ok = body(rec, report);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ctx.out << report.str();
  if (ctx.write_manifests && !manifest.empty()) {
    write_manifest(manifest, rec, report.str(), wall);
    ctx.err << "manifest=" << absolute(manifest) << '\n';
  }
  return ok ? kOk : kCheckFailed;
}

int dispatch(const std::vector<std::string>& args, Context& ctx) {
  CLI::App app{"Quadrature lock-in discrimination for image streams", "qld"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  SynthOpts so;
  auto* synth_cmd = app.add_subcommand("synth", "Render a modulated scene into a QLDS stream");
  synth_cmd->add_option("config", so.config, "Scene config file");
  synth_cmd->add_option("--fig2", so.fig2, "Two 8-bit PGMs modulated at 13 Hz and 17 Hz")
      ->expected(2);
  synth_cmd->add_option("--reps", so.reps, "Repetitions of 221 frames for --fig2")
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", so.seed, "Noise seed");
  synth_cmd->add_option("--bit-depth", so.bit_depth, "8 or 16 (default: config, else 16)");
  synth_cmd->add_option("--out", so.out, "Output stream")->required();
  synth_cmd->add_option("--manifest", so.manifest, "Manifest path (default: <out>.manifest.json)");

  DemodOpts dopt;
  auto* demod_cmd = app.add_subcommand("demod", "Demodulate a QLDS stream at one or more frequencies");
  demod_cmd->add_option("--in", dopt.in, "Input stream")->required();
  demod_cmd->add_option("--freq", dopt.freqs, "Frequencies in Hz, comma separated")
      ->required()
      ->delimiter(',');
  demod_cmd->add_option("--norm", dopt.norm, "two-over-n or raw");
  demod_cmd->add_option("--snapshots", dopt.snapshot_cycles, "Snapshot cadence in cycles");
  demod_cmd->add_option("--object", dopt.object, "Object rect x,y,w,h for CNR columns");
  demod_cmd->add_option("--background", dopt.background, "auto or background rects x,y,w,h");
  demod_cmd->add_option("--scaling", dopt.scaling, "full or fixed:<min>:<max>");
  demod_cmd->add_option("--lanes", dopt.lanes, "Worker lanes for accumulation");
  demod_cmd->add_option("--out", dopt.out, "Output directory")->required();
  demod_cmd->add_option("--manifest", dopt.manifest, "Manifest path (default: <out>/manifest.json)");

  CnrOpts copt;
  auto* cnr_sub = app.add_subcommand("cnr", "Contrast-to-noise ratio of an image region");
  cnr_sub->add_option("--in", copt.in, "PGM image or QLDS stream")->required();
  cnr_sub->add_option("--object", copt.object, "Object rect x,y,w,h")->required();
  cnr_sub->add_option("--background", copt.background, "auto or background rects x,y,w,h");
  cnr_sub->add_option("--frame", copt.frame, "Frame index of a QLDS stream");
  cnr_sub->add_flag("--average", copt.average, "Average every frame of a QLDS stream");
  cnr_sub->add_option("--manifest", copt.manifest, "Manifest path");

  ScanOpts sc;
  auto* scan_cmd = app.add_subcommand("scan", "Mean demodulated amplitude over a frequency grid");
  scan_cmd->add_option("--in", sc.in, "Input stream")->required();
  scan_cmd->add_option("--region", sc.region, "Region rect x,y,w,h")->required();
  scan_cmd->add_option("--fmin", sc.fmin, "Lowest frequency (Hz)")->required();
  scan_cmd->add_option("--fmax", sc.fmax, "Highest frequency (Hz)")->required();
  scan_cmd->add_option("--step", sc.step, "Grid step (Hz)")->required();
  scan_cmd->add_option("--out", sc.out, "CSV output (default: stdout)");
  scan_cmd->add_option("--manifest", sc.manifest, "Manifest path");

  BenchOpts bo;
  auto* bench_cmd = app.add_subcommand("bench", "Measure sustained demodulation throughput");
  bench_cmd->add_option("--width", bo.params.width, "Frame width")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--height", bo.params.height, "Frame height")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--fps", bo.params.fps, "Acquisition frame rate")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seconds", bo.params.seconds, "Recording length")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--freqs", bo.params.frequencies, "Simultaneous frequencies")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--lanes", bo.params.lanes, "Worker lanes")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--target-fps", bo.target, "Pass threshold (default: --fps)");
  bench_cmd->add_option("--manifest", bo.manifest, "Manifest path");

  PatternOpts po;
  auto* pat_cmd = app.add_subcommand("patterns", "Write the built-in 8-bit test patterns");
  pat_cmd->add_option("--width", po.width, "Width")->check(CLI::PositiveNumber);
  pat_cmd->add_option("--height", po.height, "Height")->check(CLI::PositiveNumber);
  pat_cmd->add_option("--out-dir", po.out_dir, "Output directory")->required();
  pat_cmd->add_option("--manifest", po.manifest, "Manifest path");

  std::string manifest_in;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run a manifest and verify its outputs");
  replay_cmd->add_option("manifest", manifest_in, "Manifest file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, ctx.out, ctx.err);
    return code == 0 ? kOk : kUsageError;
  }

  if (synth_cmd->parsed()) {
    const auto manifest = so.manifest.empty() ? so.out + ".manifest.json" : so.manifest;
    return execute(ctx, "synth", manifest, [&](RunRecord& r, std::ostream& rep) {
      synth(so, ctx, r, rep);
      return true;
    });
  }
  if (demod_cmd->parsed()) {
    const auto manifest =
        dopt.manifest.empty() ? (fs::path(dopt.out) / "manifest.json").string() : dopt.manifest;
    return execute(ctx, "demod", manifest, [&](RunRecord& r, std::ostream& rep) {
      demod(dopt, ctx, r, rep);
      return true;
    });
  }
  if (cnr_sub->parsed()) {
    return execute(ctx, "cnr", copt.manifest, [&](RunRecord& r, std::ostream& rep) {
      cnr_cmd(copt, ctx, r, rep);
      return true;
    });
  }
  if (scan_cmd->parsed()) {
    return execute(ctx, "scan", sc.manifest, [&](RunRecord& r, std::ostream& rep) {
      scan(sc, ctx, r, rep);
      return true;
    });
  }
  if (bench_cmd->parsed()) {
    return execute(ctx, "bench", bo.manifest,
                   [&](RunRecord& r, std::ostream& rep) { return bench(bo, ctx, r, rep); });
  }
  if (pat_cmd->parsed()) {
    return execute(ctx, "patterns", po.manifest, [&](RunRecord& r, std::ostream& rep) {
      patterns(po, ctx, r, rep);
      return true;
    });
  }
  return replay(manifest_in, ctx);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Context ctx{out, err, true};
  try {
    return dispatch(args, ctx);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  }
}

}  // namespace qld::cli
