#ifndef SIFT_COMMANDS_H_
#define SIFT_COMMANDS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "sift/pipeline.h"
#include "sift/stack_attribution.h"
#include "sift/sifter.h"

namespace sift {

// File name -> contents, written under the --out directory.
using OutputFiles = std::map<std::string, std::string>;

struct CommandOutput {
  OutputFiles files;
  std::string summary;  // one-line diagnostics summary for standard error
};

struct RunOptions {
  InputPaths inputs;
  double threshold = kDefaultThreshold;
  bool positional_identity = false;
  unsigned jobs = 1;
  std::string grid = "1.0:3.0:0.1";
  Granularity sweep_level = Granularity::kScript;
};

// Each command throws InputError for fatal input problems and
// std::invalid_argument for bad option values.
CommandOutput RunClassify(const RunOptions& options);
CommandOutput RunSweep(const RunOptions& options);
CommandOutput RunDiverge(const RunOptions& options);

// One JSON object per request and line.
std::string RunLabel(const RunOptions& options);

// Throws ScenarioError or InputError.
CommandOutput RunSynth(const std::string& scenario_path, std::uint64_t seed,
                       const std::optional<std::string>& psl_path);

// Creates |dir| if needed. Throws InputError.
void WriteOutputs(const std::string& dir, const OutputFiles& files);

}  // namespace sift

#endif  // SIFT_COMMANDS_H_
