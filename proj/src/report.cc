#include "sift/report.h"

#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sift {

namespace {

using nlohmann::json;

json Fraction(std::optional<double> value) {
  return value ? json(*value) : json(nullptr);
}

json RatioJson(double ratio) {
  if (std::isinf(ratio))
    return ratio > 0 ? "inf" : "-inf";
  return ratio;
}

std::string CsvFraction(std::optional<double> value) {
  return value ? FormatNumber(*value) : "";
}

json EntityJson(const EntityStats& e) {
  json j = {{"key", e.key.key},
            {"tracking", e.tracking_count},
            {"functional", e.functional_count},
            {"ratio", RatioJson(e.ratio)},
            {"verdict", std::string(VerdictName(e.verdict))}};
  if (e.key.granularity == Granularity::kMethod)
    j["method"] = e.key.method;
  return j;
}

json Digest(const FileDigest& d) {
  return {{"path", d.path}, {"sha256", d.sha256}};
}

LevelCounts CountsFor(const LevelResult& level) {
  return {std::string(GranularityName(level.granularity)),
          level.tracking_requests, level.functional_requests,
          level.mixed_requests, level.unkeyed_requests};
}

}  // namespace

std::vector<RequestTableRow> RequestTable(std::span<const LevelCounts> levels) {
  std::vector<RequestTableRow> rows;
  const std::uint64_t total = levels.empty() ? 0 : levels.front().entering();
  std::uint64_t attributed = 0;
  for (const LevelCounts& c : levels) {
    RequestTableRow row{c.level, c.tracking, c.functional, c.mixed + c.unkeyed,
                        std::nullopt, std::nullopt};
    attributed += c.tracking + c.functional;
    if (c.entering() > 0)
      row.separation = static_cast<double>(c.tracking + c.functional) /
                       static_cast<double>(c.entering());
    if (total > 0)
      row.cumulative =
          static_cast<double>(attributed) / static_cast<double>(total);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<EntityTableRow> EntityTable(std::span<const LevelCounts> levels) {
  std::vector<EntityTableRow> rows;
  for (const LevelCounts& c : levels) {
    EntityTableRow row{c.level, c.tracking, c.functional, c.mixed,
                       std::nullopt};
    if (c.entering() > 0)
      row.separation = static_cast<double>(c.tracking + c.functional) /
                       static_cast<double>(c.entering());
    rows.push_back(std::move(row));
  }
  return rows;
}

SummaryTables BuildSummaryTables(const SiftResult& result) {
  std::vector<LevelCounts> requests;
  std::vector<LevelCounts> entities;
  for (const LevelResult& level : result.levels) {
    requests.push_back(CountsFor(level));
    entities.push_back({std::string(GranularityName(level.granularity)),
                        level.entity_count(Verdict::kTracking),
                        level.entity_count(Verdict::kFunctional),
                        level.entity_count(Verdict::kMixed), 0});
  }
  return {RequestTable(requests), EntityTable(entities)};
}

std::string FormatPercent(std::optional<double> fraction) {
  if (!fraction)
    return "n/a";
  auto percent = static_cast<long long>(std::floor(*fraction * 100.0 + 0.5));
  return std::to_string(percent) + "%";
}

std::string FormatNumber(double value) {
  if (std::isinf(value))
    return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::size_t Histogram::total() const {
  std::size_t n = negative_infinity + positive_infinity;
  for (const auto& [k, count] : bins)
    n += count;
  return n;
}

Histogram BuildHistogram(std::span<const EntityStats> stats,
                         double bin_width) {
  if (!(bin_width > 0.0) || std::isinf(bin_width))
    throw std::invalid_argument("histogram bin width must be positive");
  Histogram h;
  h.bin_width = bin_width;
  for (const EntityStats& e : stats) {
    if (std::isinf(e.ratio)) {
      (e.ratio > 0 ? h.positive_infinity : h.negative_infinity) += 1;
      continue;
    }
    auto k = static_cast<std::int64_t>(std::floor(e.ratio / bin_width));
    // Keep k*w <= ratio < (k+1)*w exact in the products actually compared.
    if (static_cast<double>(k + 1) * bin_width <= e.ratio)
      ++k;
    else if (static_cast<double>(k) * bin_width > e.ratio)
      --k;
    h.bins[k] += 1;
  }
  return h;
}

json ProvenanceJson(const Provenance& provenance) {
  json traces = json::array();
  for (const FileDigest& d : provenance.traces)
    traces.push_back(Digest(d));
  json filters = json::array();
  for (const FileDigest& d : provenance.filters)
    filters.push_back(Digest(d));
  return {{"tool_version", kToolVersion},
          {"threshold", provenance.threshold},
          {"positional_identity", provenance.positional_identity},
          {"traces", traces},
          {"filters", filters},
          {"psl", Digest(provenance.psl)}};
}

json SummaryJson(const SiftResult& result, const Provenance& provenance,
                 const InputStats& inputs) {
  json levels = json::array();
  std::uint64_t attributed = 0;
  for (const LevelResult& level : result.levels) {
    const std::uint64_t pure =
        level.tracking_requests + level.functional_requests;
    attributed += pure;
    json entity_list = json::array();
    for (const EntityStats& e : level.entities)
      entity_list.push_back(EntityJson(e));
    const auto cumulative =
        result.cumulative_separation_factor(level.granularity);
    levels.push_back({
        {"granularity", std::string(GranularityName(level.granularity))},
        {"entering", level.entering},
        {"tracking_requests", level.tracking_requests},
        {"functional_requests", level.functional_requests},
        {"mixed_requests", level.mixed_requests},
        {"unkeyed_requests", level.unkeyed_requests},
        {"attributed_requests", pure},
        {"separation_factor", Fraction(level.separation_factor())},
        {"separation_percent", FormatPercent(level.separation_factor())},
        {"cumulative_attributed_requests", attributed},
        {"cumulative_separation_factor", Fraction(cumulative)},
        {"cumulative_separation_percent", FormatPercent(cumulative)},
        {"entity_counts",
         {{"tracking", level.entity_count(Verdict::kTracking)},
          {"functional", level.entity_count(Verdict::kFunctional)},
          {"mixed", level.entity_count(Verdict::kMixed)},
          {"total", level.entities.size()},
          {"separation_factor", Fraction(level.entity_separation_factor())},
          {"separation_percent",
           FormatPercent(level.entity_separation_factor())}}},
        {"entities", entity_list},
    });
  }
  return {
      {"provenance", ProvenanceJson(provenance)},
      {"inputs",
       {{"records", inputs.records},
        {"trace_diagnostics", inputs.trace_diagnostics},
        {"filter_rules", inputs.filter_rules},
        {"filter_diagnostics", inputs.filter_diagnostics},
        {"script_initiated_requests", result.total_requests},
        {"excluded_requests", result.excluded_requests},
        {"sift_diagnostics", result.diagnostics.size()}}},
      {"threshold", result.threshold},
      {"levels", levels},
      {"residual",
       {{"count", result.residual.size()}, {"request_ids", result.residual}}},
  };
}

std::string RequestTableCsv(std::span<const RequestTableRow> rows) {
  std::ostringstream out;
  out << "level,tracking,functional,mixed,separation_percent,"
         "cumulative_percent,separation_factor,cumulative_separation_factor\n";
  for (const RequestTableRow& r : rows) {
    out << r.level << ',' << r.tracking << ',' << r.functional << ','
        << r.mixed << ',' << FormatPercent(r.separation) << ','
        << FormatPercent(r.cumulative) << ',' << CsvFraction(r.separation)
        << ',' << CsvFraction(r.cumulative) << '\n';
  }
  return out.str();
}

std::string EntityTableCsv(std::span<const EntityTableRow> rows) {
  std::ostringstream out;
  out << "level,tracking,functional,mixed,separation_percent,"
         "separation_factor\n";
  for (const EntityTableRow& r : rows) {
    out << r.level << ',' << r.tracking << ',' << r.functional << ','
        << r.mixed << ',' << FormatPercent(r.separation) << ','
        << CsvFraction(r.separation) << '\n';
  }
  return out.str();
}

std::string HistogramCsv(const Histogram& histogram) {
  std::ostringstream out;
  out << "bin_lower_edge,count\n";
  out << "-inf," << histogram.negative_infinity << '\n';
  for (const auto& [k, count] : histogram.bins) {
    out << FormatNumber(static_cast<double>(k) * histogram.bin_width) << ','
        << count << '\n';
  }
  out << "inf," << histogram.positive_infinity << '\n';
  return out.str();
}

std::string SweepCsv(std::span<const SweepPoint> points, Granularity g) {
  std::ostringstream out;
  out << "threshold,granularity,mixed_entities,total_entities,mixed_percent\n";
  for (const SweepPoint& p : points) {
    auto percent = p.mixed_percent();
    out << FormatNumber(p.threshold) << ',' << GranularityName(g) << ','
        << p.mixed_entities << ',' << p.total_entities << ','
        << (percent ? FormatNumber(*percent) : "") << '\n';
  }
  return out.str();
}

json DivergenceJson(std::span<const MethodDivergence> methods,
                    const Provenance& provenance) {
  json list = json::array();
  for (const MethodDivergence& m : methods) {
    json nodes = json::array();
    for (const auto& [node, tag] : m.graph.nodes) {
      nodes.push_back({{"script_url", node.script_url},
                       {"method", node.method},
                       {"participation", std::string(ParticipationName(tag))},
                       {"root", m.graph.roots.count(node) > 0}});
    }
    json edges = json::array();
    for (const auto& [caller, callee] : m.graph.edges) {
      edges.push_back({{"caller", {caller.script_url, caller.method}},
                       {"callee", {callee.script_url, callee.method}}});
    }
    json divergence = json::array();
    for (const CallNode& node : m.divergence)
      divergence.push_back(
          {{"script_url", node.script_url}, {"method", node.method}});
    std::size_t tracking = 0;
    for (const LabeledStack& s : m.stacks)
      tracking += s.label == Label::kTracking;
    list.push_back({
        {"script_url", m.method.key},
        {"method", m.method.method},
        {"tracking_stacks", tracking},
        {"functional_stacks", m.stacks.size() - tracking},
        {"nodes", nodes},
        {"edges", edges},
        {"points_of_divergence", divergence},
        {"replay_first_point",
         {{"tracking_stacks", m.replay.tracking_stacks},
          {"tracking_removed", m.replay.tracking_removed},
          {"functional_stacks", m.replay.functional_stacks},
          {"functional_removed", m.replay.functional_removed}}},
    });
  }
  return {{"provenance", ProvenanceJson(provenance)},
          {"mixed_methods", list}};
}

std::string DumpJson(const json& j) {
  return j.dump(2) + "\n";
}

}  // namespace sift
