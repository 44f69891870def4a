#ifndef SIFT_FILTER_ENGINE_H_
#define SIFT_FILTER_ENGINE_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sift/trace_model.h"
#include "sift/url.h"

namespace sift {

enum class RuleKind { kBlock, kException };

// kDomainAndEnd covers "||host^|"; it is otherwise the same as kDomain.
enum class Anchor { kNone, kDomain, kStart, kEnd, kStartAndEnd, kDomainAndEnd };

struct PatternToken {
  enum class Kind { kLiteral, kWildcard, kSeparator };
  Kind kind = Kind::kLiteral;
  std::string text;  // lower-cased, only for kLiteral

  bool operator==(const PatternToken&) const = default;
};

// Request types understood by the "$type" options.
enum class ContentType : std::uint32_t {
  kScript = 1u << 0,
  kImage = 1u << 1,
  kStylesheet = 1u << 2,
  kXmlHttpRequest = 1u << 3,
  kSubdocument = 1u << 4,
  kDocument = 1u << 5,
  kOther = 1u << 6,
};
inline constexpr std::uint32_t kAllContentTypes = (1u << 7) - 1;

ContentType ContentTypeFor(ResourceType type);

struct RuleOptions {
  // true for "$third-party", false for "$~third-party".
  std::optional<bool> third_party;
  std::uint32_t include_types = 0;  // 0 means unrestricted
  std::uint32_t exclude_types = 0;
  std::vector<std::string> include_domains;
  std::vector<std::string> exclude_domains;

  bool operator==(const RuleOptions&) const = default;
};

struct FilterRule {
  std::string raw;
  RuleKind kind = RuleKind::kBlock;
  Anchor anchor = Anchor::kNone;
  std::vector<PatternToken> pattern;
  RuleOptions options;

  bool operator==(const FilterRule&) const = default;
};

struct FilterDiagnostic {
  std::string source;
  std::size_t line = 0;
  std::string text;
  std::string reason;
};

struct FilterParseResult {
  std::vector<FilterRule> rules;
  std::vector<FilterDiagnostic> diagnostics;
  std::size_t comment_lines = 0;
  std::size_t cosmetic_lines = 0;
};

// Parses one rule line. Returns nullopt with |reason| set when the line is
// not a supported network rule; |reason| stays empty for comments and
// element-hiding rules, which are skipped silently.
std::optional<FilterRule> ParseFilterRule(std::string_view line,
                                          std::string& reason);

FilterParseResult ParseFilterList(std::istream& in,
                                  const std::string& source_name);
FilterParseResult ParseFilterListFile(const std::string& path);

// Everything a rule needs to know about one request. |lowered_url| is
// full_url with ASCII letters folded; offsets are shared with full_url.
struct RequestContext {
  UrlParts url_parts;
  std::string lowered_url;
  std::string page_registrable_domain;
  ResourceType resource_type = ResourceType::kOther;
  bool is_third_party = false;
  // Indices into lowered_url where a "||" pattern may start.
  std::vector<std::size_t> domain_anchor_starts;
};

RequestContext MakeRequestContext(UrlParts url_parts,
                                  std::string page_registrable_domain,
                                  ResourceType resource_type);

enum class Label { kTracking, kFunctional };

std::string_view LabelName(Label label);

bool MatchRule(const FilterRule& rule, const RequestContext& ctx);

struct LabelDecision {
  Label label = Label::kFunctional;
  // Lexicographically smallest matching rule of each kind, for debugging.
  std::string block_rule;
  std::string exception_rule;
};

// Immutable rule set indexed by 4-byte literal grams. Safe for concurrent
// use.
class RuleSet {
 public:
  RuleSet() = default;
  explicit RuleSet(std::vector<FilterRule> rules);

  LabelDecision Decide(const RequestContext& ctx) const;

  const std::vector<FilterRule>& rules() const { return rules_; }

 private:
  void Candidates(const RequestContext& ctx,
                  std::vector<std::uint32_t>& out) const;

  std::vector<FilterRule> rules_;
  std::vector<std::vector<std::int16_t>> programs_;
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> by_gram_;
  std::vector<std::uint32_t> unindexed_;
};

// Tracking iff some block rule matches and no exception rule does.
Label LabelRequest(const RuleSet& rules, const RequestContext& ctx);

}  // namespace sift

#endif  // SIFT_FILTER_ENGINE_H_
