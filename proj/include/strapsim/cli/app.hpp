#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "strapsim/ingest/synthetic.hpp"

namespace strapsim::cli {

/// Everything a command needs, fully resolved (defaults filled in), so that
/// feeding a saved run-config.json back reproduces the outputs.
struct RunConfig {
  std::string command;                        // similarity | proximity | experiment | generate-synthetic
  std::map<std::string, std::string> inputs;  // role -> path
  std::vector<std::string> metrics;
  std::size_t k = 5;
  std::vector<std::size_t> k_sweep;
  std::size_t folds = 10;
  std::uint64_t seed = 42;
  double min_match_sim = 0.0;
  std::string normalize = "auto";  // auto | yes | no
  std::size_t threads = 0;         // 0: all available cores
  std::string out;
  std::string format = "csv";  // csv | json

  std::string dataset;  // experiment only
  std::size_t users = 200;
  std::size_t movies = 0;
  bool planted = false;
  std::string id_column = "id";
  std::vector<std::string> targets;
  std::size_t forest_trees = 100;
  std::size_t forest_depth = 8;
  ingest::SyntheticUniverseSpec synthetic;
};

nlohmann::json to_json(const RunConfig& config);
// Errors: InvalidArgument on a malformed document.
RunConfig run_config_from_json(const nlohmann::json& doc);

using OutputFiles = std::vector<std::pair<std::string, std::string>>;  // name -> contents

// Runs one command and returns the files it would write, run-config.json
// included. Nothing touches the disk.
OutputFiles execute(const RunConfig& config);

// Writes `files` under `dir`, creating it. Errors: Io.
void write_outputs(const std::string& dir, const OutputFiles& files);

// Full command line entry point. Returns the process exit code: 0 on success,
// 2 on invalid input, 1 on internal failure.
int run(int argc, char** argv);

}  // namespace strapsim::cli
