#ifndef SIFT_TRACE_MODEL_H_
#define SIFT_TRACE_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sift {

enum class ResourceType {
  kDocument,
  kScript,
  kXhr,
  kFetch,
  kImage,
  kStylesheet,
  kSubdocument,
  kOther,
};

std::string_view ResourceTypeName(ResourceType type);
std::optional<ResourceType> ParseResourceType(std::string_view name);

struct StackFrame {
  std::string function_name;  // empty for anonymous functions
  std::string script_url;
  std::int64_t line = 0;
  std::int64_t column = 0;

  bool operator==(const StackFrame&) const = default;
};

// One network request observed during a page load. call_stack[0] is the
// frame that issued the request; async parent segments follow the
// synchronous frames, so the whole list is most-recent-first.
struct RequestRecord {
  std::string request_id;
  std::string top_level_url;
  std::string frame_url;
  ResourceType resource_type = ResourceType::kOther;
  std::string url;
  std::int64_t timestamp_ms = 0;
  std::vector<StackFrame> call_stack;

  bool script_initiated() const { return !call_stack.empty(); }

  bool operator==(const RequestRecord&) const = default;
};

struct TraceDiagnostic {
  std::size_t line = 0;  // 1-based
  std::string reason;
};

struct TraceParseResult {
  std::vector<RequestRecord> records;
  std::vector<TraceDiagnostic> diagnostics;
};

class TraceIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parses JSON-lines trace text. Blank lines are ignored; every other line
// either yields a record or a diagnostic. A duplicate request_id produces a
// diagnostic and replaces the earlier record. |jobs| > 1 parses lines on
// worker threads; the result does not depend on it.
TraceParseResult ParseTrace(std::istream& in, unsigned jobs = 1);
TraceParseResult ParseTraceFile(const std::string& path, unsigned jobs = 1);

// Validates and converts a single line. Returns the reason on failure.
struct LineParse {
  std::optional<RequestRecord> record;
  std::string error;
};
LineParse ParseTraceLine(std::string_view line);

// Serializes |record| as a single JSON line without the trailing newline.
std::string SerializeRecord(const RequestRecord& record);

}  // namespace sift

#endif  // SIFT_TRACE_MODEL_H_
