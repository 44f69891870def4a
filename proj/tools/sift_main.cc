// Command-line entry point: classify, sweep, diverge, label, synth.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "sift/commands.h"
#include "sift/synth.h"

namespace {

constexpr int kFatal = 2;

void AddInputs(CLI::App* cmd, sift::RunOptions& o) {
  cmd->add_option("--traces", o.inputs.traces, "JSON-lines trace files")
      ->required()
      ->expected(1, -1);
  cmd->add_option("--filters", o.inputs.filters,
                  "Adblock Plus filter lists, unioned")
      ->required()
      ->expected(1, -1);
  cmd->add_option("--psl", o.inputs.psl, "public suffix list snapshot")
      ->required();
  cmd->add_option("--jobs", o.jobs, "worker threads")
      ->check(CLI::Range(1u, 256u));
}

void AddClassification(CLI::App* cmd, sift::RunOptions& o) {
  cmd->add_option("--threshold", o.threshold, "log-ratio threshold tau")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--positional-identity", o.positional_identity,
                "tell anonymous functions apart by line and column");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Separates tracking from functional requests by script "
               "attribution"};
  app.set_version_flag("--version", std::string(sift::kToolVersion));
  app.require_subcommand(1);

  sift::RunOptions options;
  std::string out_dir;
  std::string level = "script";
  std::string scenario_path;
  std::uint64_t seed = 1;
  std::optional<std::string> synth_psl;

  CLI::App* classify = app.add_subcommand("classify", "full sift and reports");
  AddInputs(classify, options);
  AddClassification(classify, options);
  classify->add_option("--grid", options.grid, "sweep grid start:stop:step");
  classify->add_option("--level", level, "sweep granularity");
  classify->add_option("--out", out_dir, "output directory")->required();

  CLI::App* sweep = app.add_subcommand("sweep", "threshold sweep");
  AddInputs(sweep, options);
  AddClassification(sweep, options);
  sweep->add_option("--grid", options.grid, "start:stop:step, inclusive");
  sweep->add_option("--level", level, "domain, hostname, script or method");
  sweep->add_option("--out", out_dir, "output directory")->required();

  CLI::App* diverge =
      app.add_subcommand("diverge", "points of divergence of mixed methods");
  AddInputs(diverge, options);
  AddClassification(diverge, options);
  diverge->add_option("--out", out_dir, "output directory")->required();

  CLI::App* label = app.add_subcommand("label", "per-request labels");
  AddInputs(label, options);

  CLI::App* synth = app.add_subcommand("synth", "generate fixtures");
  synth->add_option("--scenario", scenario_path, "scenario file")->required();
  synth->add_option("--seed", seed, "generator seed");
  synth->add_option("--psl", synth_psl, "validate domains against this list");
  synth->add_option("--out", out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kFatal;
  }

  try {
    auto parsed = sift::ParseGranularity(level);
    if (!parsed)
      throw std::invalid_argument("unknown level '" + level + "'");
    options.sweep_level = *parsed;

    sift::CommandOutput out;
    if (*label) {
      std::cout << sift::RunLabel(options);
      return 0;
    } else if (*classify) {
      out = sift::RunClassify(options);
    } else if (*sweep) {
      out = sift::RunSweep(options);
    } else if (*diverge) {
      out = sift::RunDiverge(options);
    } else {
      out = sift::RunSynth(scenario_path, seed, synth_psl);
    }
    sift::WriteOutputs(out_dir, out.files);
    std::cerr << out.summary << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFatal;
  }
}
