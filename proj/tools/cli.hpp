#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace qld::cli {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr std::uint64_t kDefaultSeed = 20201105;

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,  // bench below target, replay mismatch
  kUsageError = 2,
  kDataError = 3,
  kIoError = 4,
};

// Runs one invocation. args excludes the program name. Reports go to `out`,
// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// FNV-1a 64-bit digest, used to fingerprint outputs in run manifests.
std::uint64_t fnv1a64(const std::string& bytes);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);

struct BenchParams {
  std::uint32_t width = 600;
  std::uint32_t height = 600;
  double fps = 260.0;          // acquisition rate the demodulator is configured for
  double seconds = 2.0;        // recording length to process: fps * seconds frames
  unsigned frequencies = 1;    // simultaneous demodulation frequencies
  unsigned lanes = 1;
  double target_fps = 260.0;
};

struct BenchReport {
  std::uint64_t frames = 0;
  unsigned frequencies = 0;
  double elapsed_s = 0.0;
  double frames_per_second = 0.0;       // frames fully processed at every frequency
  double demods_per_second = 0.0;       // frames_per_second * frequencies
  double ms_per_frame_per_frequency = 0.0;
  std::uint64_t finalizes = 0;
  bool pass = false;
};

// Times push + once-per-cycle finalize on frames prepared in memory before
// the clock starts.
BenchReport run_bench(const BenchParams& params);

}  // namespace qld::cli
