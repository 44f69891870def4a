#ifndef SIFT_STACK_ATTRIBUTION_H_
#define SIFT_STACK_ATTRIBUTION_H_

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sift/filter_engine.h"
#include "sift/trace_model.h"

namespace sift {

enum class Granularity { kDomain, kHostname, kScript, kMethod };

inline constexpr Granularity kAllGranularities[] = {
    Granularity::kDomain, Granularity::kHostname, Granularity::kScript,
    Granularity::kMethod};

std::string_view GranularityName(Granularity g);
std::optional<Granularity> ParseGranularity(std::string_view name);

inline constexpr std::string_view kAnonymousMethod = "<anonymous>";

// Identity of a resource at one granularity. |key| is the registrable
// domain, hostname or script URL; |method| is only set for kMethod.
struct EntityKey {
  Granularity granularity = Granularity::kDomain;
  std::string key;
  std::string method;

  auto operator<=>(const EntityKey&) const = default;
  bool operator==(const EntityKey&) const = default;

  // "key" or "key method" for display.
  std::string ToString() const;
};

class AttributionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Method name for a frame: the function name, or "<anonymous>" (with
// ":line:column" when |positional_identity| is set).
std::string MethodName(const StackFrame& frame, bool positional_identity);

// Script that directly issued the request. Throws AttributionError for
// requests without a call stack.
EntityKey InitiatorScript(const RequestRecord& record);
EntityKey InitiatorMethod(const RequestRecord& record,
                          bool positional_identity = false);

// True for scripts that do not come from the web (extensions, devtools).
bool IsBrowserInternalUrl(std::string_view url);

struct LabeledRecord {
  RequestRecord record;
  Label label = Label::kFunctional;
};

using LabelSet = std::set<Label>;

// Every distinct script on a request's stack inherits the request's label.
std::map<EntityKey, LabelSet> PropagateLabels(
    const std::vector<LabeledRecord>& records);

}  // namespace sift

#endif  // SIFT_STACK_ATTRIBUTION_H_
