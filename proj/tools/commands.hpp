#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "config.hpp"

namespace axsq::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitNumerical = 3,
  kExitStatistical = 4,
};

enum class Format { Csv, Json };

struct Options {
  std::string subcommand;
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> grid_points;
  Format format = Format::Csv;
};

/// Column-oriented table; cells are JSON numbers or strings.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::json>> rows;
};

struct Artifact {
  std::string name;  // file name stem, extension added by format
  Table table;
};

struct CommandResult {
  std::vector<Artifact> tables;
  nlohmann::json summary;  // written as summary.json when not null
  int exit_code = kExitOk;
  std::string message;  // printed to stderr on a nonzero exit
};

inline constexpr int kCsvSchemaVersion = 1;
inline constexpr std::size_t kMinWelchSegments = 400;

CommandResult cmd_spectrum(const RunConfig& cfg, std::size_t grid_points);
CommandResult cmd_optimize(const RunConfig& cfg);
CommandResult cmd_scan_rate(const RunConfig& cfg, std::size_t grid_points);
CommandResult cmd_montecarlo(const RunConfig& cfg);
CommandResult cmd_estimate(const RunConfig& cfg);

std::string format_table(const Table& table, Format format);

/// Loads the config, runs the subcommand and writes manifest.json followed by
/// the data files into opts.out_dir. Nothing is written when the config or
/// the computation fails.
int run(const Options& opts, std::ostream& err);

/// Command-line entry point: parses argv with CLI11 and calls run().
int main_entry(int argc, char** argv);

}  // namespace axsq::cli
