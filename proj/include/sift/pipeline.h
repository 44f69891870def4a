#ifndef SIFT_PIPELINE_H_
#define SIFT_PIPELINE_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "sift/filter_engine.h"
#include "sift/report.h"
#include "sift/stack_attribution.h"
#include "sift/trace_model.h"
#include "sift/url.h"

namespace sift {

// Fatal problem with the inputs (missing file, unreadable list).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InputPaths {
  std::vector<std::string> traces;
  std::vector<std::string> filters;
  std::string psl;
};

struct TraceFileDiagnostic {
  std::string path;
  TraceDiagnostic diagnostic;
};

struct LoadedInputs {
  std::vector<RequestRecord> records;
  std::vector<TraceFileDiagnostic> trace_diagnostics;
  std::vector<FilterDiagnostic> filter_diagnostics;
  RuleSet rules;
  PublicSuffixList psl;
  Provenance provenance;
};

// Reads every trace, filter list and the suffix list. With more than one
// trace file, request ids are qualified as "<file index>:<id>" so they stay
// unique. Throws InputError.
LoadedInputs LoadInputs(const InputPaths& paths, unsigned jobs = 1);

// Hex SHA-256 of a file's bytes. Throws InputError.
std::string Sha256File(const std::string& path);
std::string Sha256(std::string_view bytes);

// Context for |record| with the page's registrable domain taken from
// top_level_url.
RequestContext ContextFor(const RequestRecord& record,
                          const PublicSuffixList& psl);

std::vector<LabeledRecord> LabelRecords(const std::vector<RequestRecord>& records,
                                        const RuleSet& rules,
                                        const PublicSuffixList& psl,
                                        unsigned jobs = 1,
                                        std::vector<LabelDecision>* decisions = nullptr);

InputStats StatsFor(const LoadedInputs& inputs);

}  // namespace sift

#endif  // SIFT_PIPELINE_H_
