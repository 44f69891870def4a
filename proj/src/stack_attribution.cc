#include "sift/stack_attribution.h"

#include <array>
#include <utility>

namespace sift {

namespace {

constexpr std::array<std::pair<Granularity, std::string_view>, 4>
    kGranularityNames = {{
        {Granularity::kDomain, "domain"},
        {Granularity::kHostname, "hostname"},
        {Granularity::kScript, "script"},
        {Granularity::kMethod, "method"},
    }};

const StackFrame& TopFrame(const RequestRecord& record) {
  if (record.call_stack.empty())
    throw AttributionError("request " + record.request_id +
                           " is not script-initiated");
  return record.call_stack.front();
}

}  // namespace

std::string_view GranularityName(Granularity g) {
  for (const auto& [value, name] : kGranularityNames) {
    if (value == g)
      return name;
  }
  return "domain";
}

std::optional<Granularity> ParseGranularity(std::string_view name) {
  for (const auto& [value, text] : kGranularityNames) {
    if (text == name)
      return value;
  }
  return std::nullopt;
}

std::string EntityKey::ToString() const {
  if (granularity != Granularity::kMethod)
    return key;
  return key + " " + method;
}

std::string MethodName(const StackFrame& frame, bool positional_identity) {
  if (!frame.function_name.empty())
    return frame.function_name;
  std::string name(kAnonymousMethod);
  if (positional_identity) {
    name += ':' + std::to_string(frame.line) + ':' +
            std::to_string(frame.column);
  }
  return name;
}

EntityKey InitiatorScript(const RequestRecord& record) {
  return {Granularity::kScript, TopFrame(record).script_url, {}};
}

EntityKey InitiatorMethod(const RequestRecord& record,
                          bool positional_identity) {
  const StackFrame& top = TopFrame(record);
  return {Granularity::kMethod, top.script_url,
          MethodName(top, positional_identity)};
}

bool IsBrowserInternalUrl(std::string_view url) {
  for (std::string_view prefix :
       {"chrome-extension://", "moz-extension://", "chrome://", "devtools://",
        "extensions::", "about:"}) {
    if (url.rfind(prefix, 0) == 0)
      return true;
  }
  return false;
}

std::map<EntityKey, LabelSet> PropagateLabels(
    const std::vector<LabeledRecord>& records) {
  std::map<EntityKey, LabelSet> scripts;
  for (const LabeledRecord& r : records) {
    for (const StackFrame& frame : r.record.call_stack)
      scripts[{Granularity::kScript, frame.script_url, {}}].insert(r.label);
  }
  return scripts;
}

}  // namespace sift
