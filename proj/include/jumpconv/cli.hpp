#pragma once

// Command line front end: `jumpconv sample|verify|sweep --config <file>
// --out <dir> [--seed <u64>] [--jobs <n>]`.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace jumpconv {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int non_finite = 1;
inline constexpr int config = 2;
inline constexpr int io = 3;
inline constexpr int hypothesis = 4;
}  // namespace exit_code

struct RunManifest {
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  /// Write measured wall times instead of null.
  bool record_timing = false;
};

int cmd_sample(const RunManifest& manifest, std::ostream& log);
int cmd_verify(const RunManifest& manifest, std::ostream& log);
int cmd_sweep(const RunManifest& manifest, std::ostream& log);

/// Parses arguments (without the program name) and dispatches.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace jumpconv
