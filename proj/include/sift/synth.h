#ifndef SIFT_SYNTH_H_
#define SIFT_SYNTH_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "sift/divergence.h"
#include "sift/sifter.h"
#include "sift/trace_model.h"
#include "sift/url.h"

namespace sift {

class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::size_t line, const std::string& message);

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Ancestor frames of a stack template, innermost first, as
// (script, method) pairs. The mixed method's own frame is prepended when
// requests are generated.
struct StackTemplate {
  Label label = Label::kFunctional;
  std::vector<std::pair<std::string, std::string>> frames;
};

struct ScenarioNode {
  Granularity level = Granularity::kDomain;
  std::string name;
  std::uint64_t tracking = 0;
  std::uint64_t functional = 0;
  bool counts_given = false;
  std::vector<ScenarioNode> children;
  std::vector<StackTemplate> stacks;  // method nodes only
  std::size_t line = 0;
};

struct Scenario {
  std::string name = "scenario";
  double threshold = kDefaultThreshold;
  std::string page_url = "https://publisher.test/";
  std::vector<ScenarioNode> domains;
};

// Parses the declarative scenario format (see docs/scenario_format.md).
// Throws ScenarioError.
Scenario ParseScenario(std::istream& in);
Scenario ParseScenarioText(const std::string& text);

// Random consistent scenario with at most |max_requests| requests.
Scenario RandomScenario(std::uint64_t seed, std::size_t max_requests = 200);

struct ExpectedEntity {
  EntityKey key;
  std::uint64_t tracking = 0;
  std::uint64_t functional = 0;
  Verdict verdict = Verdict::kMixed;
};

struct ExpectedOutcome {
  double threshold = kDefaultThreshold;
  // Per level, sorted by key.
  std::vector<std::vector<ExpectedEntity>> levels;
  std::vector<std::string> residual;  // sorted request ids
  // Tracking-only nodes per mixed method that has stack templates.
  std::map<EntityKey, std::set<CallNode>> divergence;
};

struct SynthOutput {
  std::vector<RequestRecord> records;
  std::string filter_list;
  ExpectedOutcome expected;

  std::string TraceText() const;
};

// Generates a trace, a filter list that labels it as planted, and the
// expected outcome derived from the scenario tree. |psl| is used for the
// self-consistency check and to validate domain names; without it only
// the implicit "*" suffix rule applies. Throws ScenarioError for
// inconsistent scenarios, std::logic_error if the generated rules do not
// reproduce the planted labels.
SynthOutput Generate(const Scenario& scenario, std::uint64_t seed,
                     const PublicSuffixList* psl = nullptr);

nlohmann::json ExpectedJson(const ExpectedOutcome& expected);

}  // namespace sift

#endif  // SIFT_SYNTH_H_
