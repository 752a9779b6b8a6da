#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "benchpress/pipeline.hpp"
#include "benchpress/redundancy.hpp"
#include "benchpress/serialize.hpp"

namespace benchpress {

/// Effective settings of one command run: config file first, command-line flags on top.
struct RunConfig {
  std::uint64_t seed = 0;
  /// 0 keeps the OpenMP default.
  std::size_t threads = 0;
  RedundancyConfig redundancy;
  /// `pipeline.seed` and `pipeline.split.seed` follow `seed` unless the file sets a split seed.
  PipelineConfig pipeline;
  bool split_seed_set = false;
  /// Score the metric suite on every model instead of the test split.
  bool metrics_all_models = false;
  std::size_t heatmap_samples = 10;

  /// Copies the global seed into the pipeline and split.
  void sync_seeds();
};

RunConfig run_config_from_json(const Json& j, RunConfig base = {});
/// Echo form written into reports. Thread count is not part of it.
Json to_json(const RunConfig& c);

/// Reads whitespace-trimmed, newline-delimited IDs, skipping blank lines.
std::vector<std::string> read_id_list(const std::string& path);
void write_id_list(const std::string& path, const std::vector<std::string>& ids);

/// Whole command-line front end. Returns the process exit code: 0 success, 1 validation or
/// usage error, 2 infeasible request, 3 I/O failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace benchpress
