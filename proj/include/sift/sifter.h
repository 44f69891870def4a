#ifndef SIFT_SIFTER_H_
#define SIFT_SIFTER_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sift/stack_attribution.h"
#include "sift/url.h"

namespace sift {

enum class Verdict { kTracking, kFunctional, kMixed };

std::string_view VerdictName(Verdict verdict);

inline constexpr double kDefaultThreshold = 2.0;

// log10(tracking / functional), +inf when functional is 0 and -inf when
// tracking is 0. Throws std::invalid_argument when both are 0.
double Ratio(std::uint64_t tracking, std::uint64_t functional);

// Tracking on [tau, inf], Functional on [-inf, -tau], Mixed in between.
Verdict VerdictFor(double ratio, double threshold);

struct EntityStats {
  EntityKey key;
  std::uint64_t tracking_count = 0;
  std::uint64_t functional_count = 0;
  double ratio = 0.0;
  Verdict verdict = Verdict::kMixed;
};

struct SiftOptions {
  double threshold = kDefaultThreshold;
  bool positional_identity = false;
  unsigned jobs = 1;
};

struct SiftDiagnostic {
  std::string request_id;
  Granularity granularity = Granularity::kDomain;
  std::string message;
};

struct LevelResult {
  Granularity granularity = Granularity::kDomain;
  std::vector<EntityStats> entities;  // sorted by key
  std::map<std::string, EntityKey> attribution;  // request_id -> entity
  std::size_t entering = 0;
  std::size_t tracking_requests = 0;
  std::size_t functional_requests = 0;
  std::size_t mixed_requests = 0;
  // Requests whose key could not be derived; they go to the residual.
  std::size_t unkeyed_requests = 0;
  // Indices (into the sifted record list) of requests handed to the next
  // level, in input order.
  std::vector<std::size_t> mixed_indices;

  std::size_t entity_count(Verdict verdict) const;
  // (tracking + functional requests) / entering; nullopt when nothing
  // entered.
  std::optional<double> separation_factor() const;
  std::optional<double> entity_separation_factor() const;
};

struct SiftResult {
  double threshold = kDefaultThreshold;
  std::vector<LevelResult> levels;  // domain, hostname, script, method
  std::vector<std::string> residual;  // request ids, input order
  std::size_t total_requests = 0;     // script-initiated requests sifted
  std::size_t excluded_requests = 0;  // no call stack
  std::vector<SiftDiagnostic> diagnostics;

  const LevelResult& level(Granularity g) const {
    return levels[static_cast<std::size_t>(g)];
  }
  // Requests attributed to a pure entity at levels <= |g|, over
  // total_requests.
  std::optional<double> cumulative_separation_factor(Granularity g) const;
};

// Key of |record| at granularity |g|. Returns nullopt and sets |error| when
// no key can be derived.
std::optional<EntityKey> DeriveKey(const RequestRecord& record, Granularity g,
                                   const PublicSuffixList& psl,
                                   bool positional_identity,
                                   std::string& error);

// Tallies the requests at |entering| (indices into |records|) by entity and
// assigns verdicts. Unkeyed requests are reported through |diagnostics| and
// |unkeyed|.
LevelResult ClassifyLevel(const std::vector<LabeledRecord>& records,
                          const std::vector<std::size_t>& entering,
                          Granularity granularity, const PublicSuffixList& psl,
                          const SiftOptions& options,
                          std::vector<SiftDiagnostic>& diagnostics,
                          std::vector<std::size_t>& unkeyed);

// Runs the domain -> hostname -> script -> method cascade. Records without
// a call stack are counted in excluded_requests and otherwise ignored.
SiftResult Sift(const std::vector<LabeledRecord>& records,
                const PublicSuffixList& psl, const SiftOptions& options = {});

struct SweepPoint {
  double threshold = 0.0;
  std::size_t mixed_entities = 0;
  std::size_t total_entities = 0;
  std::vector<EntityKey> mixed;  // sorted

  std::optional<double> mixed_percent() const;
};

// Re-evaluates verdicts of the entities at |g| in |base| for each
// threshold; the entity counts themselves are not recomputed. |grid| must
// be non-empty, positive and ascending (std::invalid_argument otherwise).
std::vector<SweepPoint> Sweep(const SiftResult& base, Granularity g,
                              std::span<const double> grid);

// Inclusive "start:stop:step" grid.
std::vector<double> ParseGrid(std::string_view text);

}  // namespace sift

#endif  // SIFT_SIFTER_H_
