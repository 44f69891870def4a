#include "sift/commands.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sift/divergence.h"
#include "sift/report.h"
#include "sift/synth.h"

namespace sift {

namespace {

struct Pipeline {
  LoadedInputs inputs;
  std::vector<LabeledRecord> labeled;
  SiftResult result;
};

Pipeline RunPipeline(const RunOptions& options) {
  if (!(options.threshold > 0))
    throw std::invalid_argument("threshold must be positive");
  Pipeline p;
  p.inputs = LoadInputs(options.inputs, options.jobs);
  p.inputs.provenance.threshold = options.threshold;
  p.inputs.provenance.positional_identity = options.positional_identity;
  p.labeled = LabelRecords(p.inputs.records, p.inputs.rules, p.inputs.psl,
                           options.jobs);
  p.result = Sift(p.labeled, p.inputs.psl,
                  {options.threshold, options.positional_identity,
                   options.jobs});
  return p;
}

std::string DiagnosticsText(const Pipeline& p) {
  std::ostringstream out;
  for (const TraceFileDiagnostic& d : p.inputs.trace_diagnostics)
    out << "trace " << d.path << ':' << d.diagnostic.line << ": "
        << d.diagnostic.reason << '\n';
  for (const FilterDiagnostic& d : p.inputs.filter_diagnostics)
    out << "filter " << d.source << ':' << d.line << ": " << d.reason
        << ": " << d.text << '\n';
  for (const SiftDiagnostic& d : p.result.diagnostics)
    out << "attribution " << d.request_id << " ["
        << GranularityName(d.granularity) << "]: " << d.message << '\n';
  return out.str();
}

std::string Summary(const Pipeline& p) {
  std::ostringstream out;
  out << p.inputs.records.size() << " records, "
      << p.inputs.trace_diagnostics.size() << " trace diagnostics, "
      << p.inputs.filter_diagnostics.size() << " filter diagnostics, "
      << p.result.diagnostics.size() << " attribution diagnostics";
  return out.str();
}

std::string SweepText(const Pipeline& p, const RunOptions& options) {
  const std::vector<double> grid = ParseGrid(options.grid);
  return SweepCsv(Sweep(p.result, options.sweep_level, grid),
                  options.sweep_level);
}

std::string DivergenceText(const Pipeline& p, const RunOptions& options) {
  auto methods =
      AnalyzeMixedMethods(p.labeled, p.result, options.positional_identity);
  return DumpJson(DivergenceJson(methods, p.inputs.provenance));
}

}  // namespace

CommandOutput RunClassify(const RunOptions& options) {
  Pipeline p = RunPipeline(options);
  CommandOutput out;
  out.summary = Summary(p);
  out.files["summary.json"] =
      DumpJson(SummaryJson(p.result, p.inputs.provenance, StatsFor(p.inputs)));
  SummaryTables tables = BuildSummaryTables(p.result);
  out.files["requests_table.csv"] = RequestTableCsv(tables.requests);
  out.files["entities_table.csv"] = EntityTableCsv(tables.entities);
  for (const LevelResult& level : p.result.levels) {
    out.files["histogram_" + std::string(GranularityName(level.granularity)) +
              ".csv"] = HistogramCsv(BuildHistogram(level.entities));
  }
  out.files["sweep.csv"] = SweepText(p, options);
  out.files["divergence.json"] = DivergenceText(p, options);
  out.files["diagnostics.txt"] = DiagnosticsText(p);
  return out;
}

CommandOutput RunSweep(const RunOptions& options) {
  ParseGrid(options.grid);  // reject a bad grid before loading inputs
  Pipeline p = RunPipeline(options);
  CommandOutput out;
  out.summary = Summary(p);
  out.files["sweep.csv"] = SweepText(p, options);
  out.files["diagnostics.txt"] = DiagnosticsText(p);
  return out;
}

CommandOutput RunDiverge(const RunOptions& options) {
  Pipeline p = RunPipeline(options);
  CommandOutput out;
  out.summary = Summary(p);
  out.files["divergence.json"] = DivergenceText(p, options);
  out.files["diagnostics.txt"] = DiagnosticsText(p);
  return out;
}

std::string RunLabel(const RunOptions& options) {
  LoadedInputs inputs = LoadInputs(options.inputs, options.jobs);
  std::vector<LabelDecision> decisions;
  LabelRecords(inputs.records, inputs.rules, inputs.psl, options.jobs,
               &decisions);
  std::string out;
  for (std::size_t i = 0; i < inputs.records.size(); ++i) {
    const LabelDecision& d = decisions[i];
    auto rule = [](const std::string& raw) {
      return raw.empty() ? nlohmann::ordered_json(nullptr)
                         : nlohmann::ordered_json(raw);
    };
    nlohmann::ordered_json line = {
        {"request_id", inputs.records[i].request_id},
        {"url", inputs.records[i].url},
        {"resource_type",
         std::string(ResourceTypeName(inputs.records[i].resource_type))},
        {"label", std::string(LabelName(d.label))},
        {"block_rule", rule(d.block_rule)},
        {"exception_rule", rule(d.exception_rule)}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

CommandOutput RunSynth(const std::string& scenario_path, std::uint64_t seed,
                       const std::optional<std::string>& psl_path) {
  std::ifstream in(scenario_path);
  if (!in)
    throw InputError("scenario file not found: " + scenario_path);
  Scenario scenario = ParseScenario(in);
  std::optional<PublicSuffixList> psl;
  if (psl_path) {
    try {
      psl = PublicSuffixList::LoadFile(*psl_path);
    } catch (const std::exception& e) {
      throw InputError(e.what());
    }
  }
  SynthOutput synth = Generate(scenario, seed, psl ? &*psl : nullptr);
  CommandOutput out;
  out.summary = std::to_string(synth.records.size()) + " records generated";
  out.files["trace.jsonl"] = synth.TraceText();
  out.files["filters.txt"] = synth.filter_list;
  out.files["expected.json"] = DumpJson(ExpectedJson(synth.expected));
  return out;
}

void WriteOutputs(const std::string& dir, const OutputFiles& files) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw InputError("cannot create " + dir + ": " + ec.message());
  for (const auto& [name, content] : files) {
    const std::filesystem::path path = std::filesystem::path(dir) / name;
    std::ofstream f(path, std::ios::binary);
    f << content;
    if (!f)
      throw InputError("cannot write " + path.string());
  }
}

}  // namespace sift
