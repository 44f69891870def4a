#include "sift/sifter.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "sift/parallel.h"

namespace sift {

namespace {

struct Tally {
  std::uint64_t tracking = 0;
  std::uint64_t functional = 0;
};

double ParseNumber(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  return value;
}

}  // namespace

std::string_view VerdictName(Verdict verdict) {
  switch (verdict) {
    case Verdict::kTracking:
      return "Tracking";
    case Verdict::kFunctional:
      return "Functional";
    case Verdict::kMixed:
      break;
  }
  return "Mixed";
}

double Ratio(std::uint64_t tracking, std::uint64_t functional) {
  if (tracking == 0 && functional == 0)
    throw std::invalid_argument("entity unobserved");
  if (functional == 0)
    return std::numeric_limits<double>::infinity();
  if (tracking == 0)
    return -std::numeric_limits<double>::infinity();
  return std::log10(static_cast<double>(tracking) /
                    static_cast<double>(functional));
}

Verdict VerdictFor(double ratio, double threshold) {
  if (ratio >= threshold)
    return Verdict::kTracking;
  if (ratio <= -threshold)
    return Verdict::kFunctional;
  return Verdict::kMixed;
}

std::size_t LevelResult::entity_count(Verdict verdict) const {
  return static_cast<std::size_t>(
      std::count_if(entities.begin(), entities.end(),
                    [&](const EntityStats& e) { return e.verdict == verdict; }));
}

std::optional<double> LevelResult::separation_factor() const {
  if (entering == 0)
    return std::nullopt;
  return static_cast<double>(tracking_requests + functional_requests) /
         static_cast<double>(entering);
}

std::optional<double> LevelResult::entity_separation_factor() const {
  if (entities.empty())
    return std::nullopt;
  return static_cast<double>(entity_count(Verdict::kTracking) +
                             entity_count(Verdict::kFunctional)) /
         static_cast<double>(entities.size());
}

std::optional<double> SiftResult::cumulative_separation_factor(
    Granularity g) const {
  if (total_requests == 0)
    return std::nullopt;
  std::size_t attributed = 0;
  for (std::size_t i = 0; i <= static_cast<std::size_t>(g) && i < levels.size();
       ++i)
    attributed += levels[i].tracking_requests + levels[i].functional_requests;
  return static_cast<double>(attributed) / static_cast<double>(total_requests);
}

std::optional<EntityKey> DeriveKey(const RequestRecord& record, Granularity g,
                                   const PublicSuffixList& psl,
                                   bool positional_identity,
                                   std::string& error) {
  try {
    switch (g) {
      case Granularity::kDomain:
        return EntityKey{g, DecomposeUrl(record.url, psl).registrable_domain,
                         {}};
      case Granularity::kHostname:
        return EntityKey{g, SplitUrl(record.url).hostname, {}};
      case Granularity::kScript:
        return InitiatorScript(record);
      case Granularity::kMethod:
        return InitiatorMethod(record, positional_identity);
    }
  } catch (const std::exception& e) {
    error = e.what();
  }
  return std::nullopt;
}

LevelResult ClassifyLevel(const std::vector<LabeledRecord>& records,
                          const std::vector<std::size_t>& entering,
                          Granularity granularity, const PublicSuffixList& psl,
                          const SiftOptions& options,
                          std::vector<SiftDiagnostic>& diagnostics,
                          std::vector<std::size_t>& unkeyed) {
  LevelResult level;
  level.granularity = granularity;
  level.entering = entering.size();

  std::vector<std::optional<EntityKey>> keys(entering.size());
  std::vector<std::string> errors(entering.size());
  std::vector<std::map<EntityKey, Tally>> partial(
      ChunkCount(entering.size(), options.jobs));
  ParallelChunks(
      entering.size(), options.jobs,
      [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        std::map<EntityKey, Tally>& tally = partial[chunk];
        for (std::size_t i = begin; i < end; ++i) {
          const LabeledRecord& r = records[entering[i]];
          keys[i] = DeriveKey(r.record, granularity, psl,
                              options.positional_identity, errors[i]);
          if (!keys[i])
            continue;
          Tally& t = tally[*keys[i]];
          (r.label == Label::kTracking ? t.tracking : t.functional) += 1;
        }
      });

  std::map<EntityKey, Tally> merged;
  for (auto& part : partial) {
    for (auto& [key, t] : part) {
      Tally& m = merged[key];
      m.tracking += t.tracking;
      m.functional += t.functional;
    }
  }

  std::map<EntityKey, Verdict> verdicts;
  level.entities.reserve(merged.size());
  for (const auto& [key, t] : merged) {
    EntityStats stats;
    stats.key = key;
    stats.tracking_count = t.tracking;
    stats.functional_count = t.functional;
    stats.ratio = Ratio(t.tracking, t.functional);
    stats.verdict = VerdictFor(stats.ratio, options.threshold);
    verdicts.emplace(key, stats.verdict);
    level.entities.push_back(std::move(stats));
  }

  for (std::size_t i = 0; i < entering.size(); ++i) {
    const LabeledRecord& r = records[entering[i]];
    if (!keys[i]) {
      ++level.unkeyed_requests;
      unkeyed.push_back(entering[i]);
      diagnostics.push_back({r.record.request_id, granularity, errors[i]});
      continue;
    }
    if (granularity >= Granularity::kScript &&
        IsBrowserInternalUrl(keys[i]->key)) {
      diagnostics.push_back({r.record.request_id, granularity,
                             "initiator is a browser-internal script: " +
                                 keys[i]->key});
    }
    switch (verdicts.at(*keys[i])) {
      case Verdict::kTracking:
        ++level.tracking_requests;
        break;
      case Verdict::kFunctional:
        ++level.functional_requests;
        break;
      case Verdict::kMixed:
        ++level.mixed_requests;
        level.mixed_indices.push_back(entering[i]);
        break;
    }
    level.attribution.emplace(r.record.request_id, *keys[i]);
  }
  return level;
}

SiftResult Sift(const std::vector<LabeledRecord>& records,
                const PublicSuffixList& psl, const SiftOptions& options) {
  SiftResult result;
  result.threshold = options.threshold;
  std::vector<std::size_t> entering;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].record.script_initiated())
      entering.push_back(i);
    else
      ++result.excluded_requests;
  }
  result.total_requests = entering.size();

  std::vector<std::size_t> residual;
  for (Granularity g : kAllGranularities) {
    LevelResult level = ClassifyLevel(records, entering, g, psl, options,
                                      result.diagnostics, residual);
    entering = level.mixed_indices;
    result.levels.push_back(std::move(level));
  }
  residual.insert(residual.end(), entering.begin(), entering.end());
  std::sort(residual.begin(), residual.end());
  for (std::size_t i : residual)
    result.residual.push_back(records[i].record.request_id);
  return result;
}

std::optional<double> SweepPoint::mixed_percent() const {
  if (total_entities == 0)
    return std::nullopt;
  return 100.0 * static_cast<double>(mixed_entities) /
         static_cast<double>(total_entities);
}

std::vector<SweepPoint> Sweep(const SiftResult& base, Granularity g,
                              std::span<const double> grid) {
  if (grid.empty())
    throw std::invalid_argument("threshold grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0))
      throw std::invalid_argument("threshold grid values must be positive");
    if (i > 0 && grid[i] < grid[i - 1])
      throw std::invalid_argument("threshold grid must be ascending");
  }
  const LevelResult& level = base.level(g);
  std::vector<SweepPoint> points;
  points.reserve(grid.size());
  for (double tau : grid) {
    SweepPoint point;
    point.threshold = tau;
    point.total_entities = level.entities.size();
    for (const EntityStats& e : level.entities) {
      if (VerdictFor(e.ratio, tau) == Verdict::kMixed)
        point.mixed.push_back(e.key);
    }
    point.mixed_entities = point.mixed.size();
    points.push_back(std::move(point));
  }
  return points;
}

std::vector<double> ParseGrid(std::string_view text) {
  std::size_t first = text.find(':');
  std::size_t second =
      first == std::string_view::npos ? first : text.find(':', first + 1);
  if (second == std::string_view::npos)
    throw std::invalid_argument("grid must be start:stop:step");
  double start = ParseNumber(text.substr(0, first));
  double stop = ParseNumber(text.substr(first + 1, second - first - 1));
  double step = ParseNumber(text.substr(second + 1));
  if (!(step > 0.0))
    throw std::invalid_argument("grid step must be positive");
  if (!(start > 0.0) || stop < start)
    throw std::invalid_argument("grid needs 0 < start <= stop");
  const auto count =
      static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> grid;
  grid.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    double value = start + static_cast<double>(i) * step;
    grid.push_back(std::round(value * 1e9) / 1e9);
  }
  return grid;
}

}  // namespace sift
