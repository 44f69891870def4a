#ifndef SIFT_REPORT_H_
#define SIFT_REPORT_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "sift/divergence.h"
#include "sift/sifter.h"

namespace sift {

inline constexpr char kToolVersion[] = "1.0.0";

// Request counts of one level. The level's input is the sum of all four.
struct LevelCounts {
  std::string level;
  std::uint64_t tracking = 0;
  std::uint64_t functional = 0;
  std::uint64_t mixed = 0;
  std::uint64_t unkeyed = 0;

  std::uint64_t entering() const {
    return tracking + functional + mixed + unkeyed;
  }
};

struct RequestTableRow {
  std::string level;
  std::uint64_t tracking = 0;
  std::uint64_t functional = 0;
  std::uint64_t mixed = 0;
  std::optional<double> separation;  // fraction, nullopt when undefined
  std::optional<double> cumulative;
};

struct EntityTableRow {
  std::string level;
  std::uint64_t tracking = 0;
  std::uint64_t functional = 0;
  std::uint64_t mixed = 0;
  std::optional<double> separation;
};

// Request table from raw per-level counts. The first level's input is the
// total for the cumulative column.
std::vector<RequestTableRow> RequestTable(std::span<const LevelCounts> levels);
std::vector<EntityTableRow> EntityTable(std::span<const LevelCounts> levels);

struct SummaryTables {
  std::vector<RequestTableRow> requests;
  std::vector<EntityTableRow> entities;
};

SummaryTables BuildSummaryTables(const SiftResult& result);

// Rounds a fraction half-up to an integer percentage: "54%", or "n/a".
std::string FormatPercent(std::optional<double> fraction);

// Shortest round-trip decimal form of |value|; "inf"/"-inf" for infinities.
std::string FormatNumber(double value);

struct Histogram {
  double bin_width = 0.25;
  std::map<std::int64_t, std::size_t> bins;  // k -> count of [k*w, (k+1)*w)
  std::size_t negative_infinity = 0;
  std::size_t positive_infinity = 0;

  std::size_t total() const;
};

inline constexpr double kDefaultBinWidth = 0.25;

// Throws std::invalid_argument unless bin_width > 0.
Histogram BuildHistogram(std::span<const EntityStats> stats,
                         double bin_width = kDefaultBinWidth);

struct FileDigest {
  std::string path;
  std::string sha256;
};

struct Provenance {
  std::vector<FileDigest> traces;
  std::vector<FileDigest> filters;
  FileDigest psl;
  double threshold = kDefaultThreshold;
  bool positional_identity = false;
};

struct InputStats {
  std::size_t records = 0;
  std::size_t trace_diagnostics = 0;
  std::size_t filter_rules = 0;
  std::size_t filter_diagnostics = 0;
};

nlohmann::json SummaryJson(const SiftResult& result,
                           const Provenance& provenance,
                           const InputStats& inputs);
nlohmann::json ProvenanceJson(const Provenance& provenance);
std::string RequestTableCsv(std::span<const RequestTableRow> rows);
std::string EntityTableCsv(std::span<const EntityTableRow> rows);
std::string HistogramCsv(const Histogram& histogram);
std::string SweepCsv(std::span<const SweepPoint> points, Granularity g);
nlohmann::json DivergenceJson(std::span<const MethodDivergence> methods,
                              const Provenance& provenance);

// Serializes |j| with a fixed layout and trailing newline.
std::string DumpJson(const nlohmann::json& j);

}  // namespace sift

#endif  // SIFT_REPORT_H_
