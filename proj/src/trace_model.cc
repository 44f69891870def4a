#include "sift/trace_model.h"

#include <array>
#include <fstream>
#include <istream>
#include <unordered_map>
#include <utility>

#include "json.hpp"
#include "sift/parallel.h"
#include "sift/url.h"

namespace sift {

namespace {

using nlohmann::json;

constexpr std::array<std::pair<ResourceType, std::string_view>, 8>
    kResourceTypeNames = {{
        {ResourceType::kDocument, "Document"},
        {ResourceType::kScript, "Script"},
        {ResourceType::kXhr, "XHR"},
        {ResourceType::kFetch, "Fetch"},
        {ResourceType::kImage, "Image"},
        {ResourceType::kStylesheet, "Stylesheet"},
        {ResourceType::kSubdocument, "Subdocument"},
        {ResourceType::kOther, "Other"},
    }};

const json* Field(const json& obj, const char* name, std::string& error) {
  auto it = obj.find(name);
  if (it == obj.end()) {
    error = std::string("missing field \"") + name + "\"";
    return nullptr;
  }
  return &*it;
}

bool ReadString(const json& obj, const char* name, std::string& out,
                std::string& error) {
  const json* v = Field(obj, name, error);
  if (!v)
    return false;
  if (!v->is_string()) {
    error = std::string("field \"") + name + "\" must be a string";
    return false;
  }
  out = v->get<std::string>();
  return true;
}

bool ReadNonNegative(const json& obj, const char* name, std::int64_t& out,
                     std::string& error) {
  const json* v = Field(obj, name, error);
  if (!v)
    return false;
  if (v->is_number_unsigned()) {
    auto value = v->get<std::uint64_t>();
    if (value <= static_cast<std::uint64_t>(INT64_MAX)) {
      out = static_cast<std::int64_t>(value);
      return true;
    }
  }
  error = std::string("field \"") + name +
          "\" must be a non-negative integer";
  return false;
}

bool ReadFrame(const json& obj, std::size_t index, StackFrame& frame,
               std::string& error) {
  if (!obj.is_object()) {
    error = "call_stack[" + std::to_string(index) + "] is not an object";
    return false;
  }
  if (!ReadString(obj, "function_name", frame.function_name, error) ||
      !ReadString(obj, "script_url", frame.script_url, error) ||
      !ReadNonNegative(obj, "line", frame.line, error) ||
      !ReadNonNegative(obj, "column", frame.column, error)) {
    error = "call_stack[" + std::to_string(index) + "]: " + error;
    return false;
  }
  if (frame.script_url.empty()) {
    error = "call_stack[" + std::to_string(index) + "]: empty script_url";
    return false;
  }
  return true;
}

}  // namespace

std::string_view ResourceTypeName(ResourceType type) {
  for (const auto& [value, name] : kResourceTypeNames) {
    if (value == type)
      return name;
  }
  return "Other";
}

std::optional<ResourceType> ParseResourceType(std::string_view name) {
  for (const auto& [value, text] : kResourceTypeNames) {
    if (text == name)
      return value;
  }
  return std::nullopt;
}

LineParse ParseTraceLine(std::string_view line) {
  LineParse result;
  json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (obj.is_discarded()) {
    result.error = "malformed JSON";
    return result;
  }
  if (!obj.is_object()) {
    result.error = "line is not a JSON object";
    return result;
  }

  RequestRecord record;
  std::string& error = result.error;
  std::string resource_type;
  if (!ReadString(obj, "request_id", record.request_id, error) ||
      !ReadString(obj, "top_level_url", record.top_level_url, error) ||
      !ReadString(obj, "frame_url", record.frame_url, error) ||
      !ReadString(obj, "resource_type", resource_type, error) ||
      !ReadString(obj, "url", record.url, error) ||
      !ReadNonNegative(obj, "timestamp_ms", record.timestamp_ms, error)) {
    return result;
  }
  if (record.request_id.empty()) {
    error = "empty request_id";
    return result;
  }
  auto type = ParseResourceType(resource_type);
  if (!type) {
    error = "unknown resource_type \"" + resource_type + "\"";
    return result;
  }
  record.resource_type = *type;

  try {
    SplitUrl(record.url);
  } catch (const UrlError& e) {
    error = std::string("field \"url\": ") + e.what();
    return result;
  }
  try {
    SplitUrl(record.top_level_url);
  } catch (const UrlError& e) {
    error = std::string("field \"top_level_url\": ") + e.what();
    return result;
  }

  const json* stack = Field(obj, "call_stack", error);
  if (!stack)
    return result;
  if (!stack->is_array()) {
    error = "field \"call_stack\" must be an array";
    return result;
  }
  record.call_stack.reserve(stack->size());
  for (std::size_t i = 0; i < stack->size(); ++i) {
    StackFrame frame;
    if (!ReadFrame((*stack)[i], i, frame, error))
      return result;
    record.call_stack.push_back(std::move(frame));
  }
  result.record = std::move(record);
  return result;
}

TraceParseResult ParseTrace(std::istream& in, unsigned jobs) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    lines.push_back(std::move(line));
  }
  if (in.bad())
    throw TraceIoError("I/O error while reading trace");

  std::vector<LineParse> parsed(lines.size());
  ParallelChunks(lines.size(), jobs,
                 [&](std::size_t, std::size_t begin, std::size_t end) {
                   for (std::size_t i = begin; i < end; ++i) {
                     if (lines[i].find_first_not_of(" \t") ==
                         std::string::npos)
                       continue;
                     parsed[i] = ParseTraceLine(lines[i]);
                   }
                 });

  TraceParseResult result;
  std::vector<std::optional<RequestRecord>> kept;
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    LineParse& p = parsed[i];
    if (!p.record) {
      if (!p.error.empty())
        result.diagnostics.push_back({i + 1, std::move(p.error)});
      continue;
    }
    auto [it, inserted] = seen.emplace(p.record->request_id, kept.size());
    if (!inserted) {
      result.diagnostics.push_back(
          {i + 1, "duplicate request_id \"" + p.record->request_id +
                      "\"; keeping this occurrence"});
      kept[it->second].reset();
      it->second = kept.size();
    }
    kept.push_back(std::move(p.record));
  }
  for (auto& r : kept) {
    if (r)
      result.records.push_back(std::move(*r));
  }
  return result;
}

TraceParseResult ParseTraceFile(const std::string& path, unsigned jobs) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw TraceIoError("cannot open trace file: " + path);
  return ParseTrace(in, jobs);
}

std::string SerializeRecord(const RequestRecord& record) {
  nlohmann::ordered_json stack = nlohmann::ordered_json::array();
  for (const StackFrame& f : record.call_stack) {
    stack.push_back({{"function_name", f.function_name},
                     {"script_url", f.script_url},
                     {"line", f.line},
                     {"column", f.column}});
  }
  nlohmann::ordered_json obj = {
      {"request_id", record.request_id},
      {"top_level_url", record.top_level_url},
      {"frame_url", record.frame_url},
      {"resource_type", std::string(ResourceTypeName(record.resource_type))},
      {"url", record.url},
      {"timestamp_ms", record.timestamp_ms},
      {"call_stack", std::move(stack)},
  };
  return obj.dump();
}

}  // namespace sift
