#include "sift/filter_engine.h"

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <utility>

namespace sift {

namespace {

constexpr std::int16_t kStar = -1;
constexpr std::int16_t kSep = -2;

using Program = std::vector<std::int16_t>;

struct TypeOption {
  std::string_view name;
  ContentType type;
};

constexpr std::array<TypeOption, 7> kTypeOptions = {{
    {"script", ContentType::kScript},
    {"image", ContentType::kImage},
    {"stylesheet", ContentType::kStylesheet},
    {"xmlhttprequest", ContentType::kXmlHttpRequest},
    {"subdocument", ContentType::kSubdocument},
    {"document", ContentType::kDocument},
    {"other", ContentType::kOther},
}};

std::string_view Trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos)
    return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool IsComment(std::string_view line) {
  return line.front() == '!' || line.front() == '[';
}

bool IsCosmetic(std::string_view line) {
  for (std::string_view marker : {"##", "#@#", "#?#", "#$#", "#@$#", "#@?#"}) {
    if (line.find(marker) != std::string_view::npos)
      return true;
  }
  return false;
}

bool IsSeparatorChar(char c) {
  if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
      (c >= '0' && c <= '9'))
    return false;
  return c != '_' && c != '-' && c != '.' && c != '%';
}

std::vector<std::string_view> Split(std::string_view s, char delim) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(delim, start);
    parts.push_back(s.substr(start, pos == std::string_view::npos
                                        ? std::string_view::npos
                                        : pos - start));
    if (pos == std::string_view::npos)
      break;
    start = pos + 1;
  }
  return parts;
}

bool ParseOptions(std::string_view text, RuleOptions& options,
                  std::string& reason) {
  for (std::string_view raw : Split(text, ',')) {
    std::string option = AsciiLower(Trim(raw));
    if (option.empty()) {
      reason = "empty option";
      return false;
    }
    if (option.rfind("domain=", 0) == 0) {
      std::string_view list = std::string_view(option).substr(7);
      for (std::string_view entry : Split(list, '|')) {
        bool negated = !entry.empty() && entry.front() == '~';
        if (negated)
          entry.remove_prefix(1);
        if (entry.empty()) {
          reason = "empty entry in option \"domain\"";
          return false;
        }
        (negated ? options.exclude_domains : options.include_domains)
            .emplace_back(entry);
      }
      continue;
    }
    bool negated = option.front() == '~';
    std::string_view name = std::string_view(option).substr(negated ? 1 : 0);
    if (name == "third-party") {
      if (options.third_party && *options.third_party == negated) {
        reason = "contradictory third-party options";
        return false;
      }
      options.third_party = !negated;
      continue;
    }
    auto type = std::find_if(kTypeOptions.begin(), kTypeOptions.end(),
                             [&](const TypeOption& t) { return t.name == name; });
    if (type != kTypeOptions.end()) {
      (negated ? options.exclude_types : options.include_types) |=
          static_cast<std::uint32_t>(type->type);
      continue;
    }
    std::size_t eq = name.find('=');
    reason = "unsupported option \"" + std::string(name.substr(0, eq)) + "\"";
    return false;
  }
  return true;
}

std::vector<PatternToken> Tokenize(std::string_view pattern) {
  std::vector<PatternToken> tokens;
  for (char c : pattern) {
    if (c == '*') {
      if (tokens.empty() ||
          tokens.back().kind != PatternToken::Kind::kWildcard)
        tokens.push_back({PatternToken::Kind::kWildcard, {}});
    } else if (c == '^') {
      tokens.push_back({PatternToken::Kind::kSeparator, {}});
    } else {
      if (tokens.empty() || tokens.back().kind != PatternToken::Kind::kLiteral)
        tokens.push_back({PatternToken::Kind::kLiteral, {}});
      char lower = (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
      tokens.back().text += lower;
    }
  }
  return tokens;
}

bool FloatingStart(Anchor anchor) {
  return anchor == Anchor::kNone || anchor == Anchor::kEnd;
}

bool EndAnchored(Anchor anchor) {
  return anchor == Anchor::kEnd || anchor == Anchor::kStartAndEnd ||
         anchor == Anchor::kDomainAndEnd;
}

Program Compile(const FilterRule& rule) {
  Program program;
  if (FloatingStart(rule.anchor))
    program.push_back(kStar);
  for (const PatternToken& token : rule.pattern) {
    switch (token.kind) {
      case PatternToken::Kind::kWildcard:
        if (program.empty() || program.back() != kStar)
          program.push_back(kStar);
        break;
      case PatternToken::Kind::kSeparator:
        program.push_back(kSep);
        break;
      case PatternToken::Kind::kLiteral:
        for (char c : token.text)
          program.push_back(static_cast<std::int16_t>(static_cast<unsigned char>(c)));
        break;
    }
  }
  return program;
}

// Glob match of |program| against |s| starting at |start|, backtracking to
// the most recent wildcard only. Separators match one separator character
// or the end of the input.
bool MatchFrom(const Program& program, std::string_view s, std::size_t start,
               bool end_anchored) {
  std::size_t i = start;
  std::size_t j = 0;
  std::size_t star_j = Program::size_type(-1);
  std::size_t star_i = 0;
  const std::size_t n = s.size();
  while (true) {
    if (j == program.size()) {
      if (!end_anchored || i == n)
        return true;
    } else if (program[j] == kStar) {
      star_j = j++;
      star_i = i;
      continue;
    } else if (program[j] == kSep) {
      if (i == n) {
        ++j;
        continue;
      }
      if (IsSeparatorChar(s[i])) {
        ++i;
        ++j;
        continue;
      }
    } else if (i < n &&
               static_cast<unsigned char>(s[i]) == program[j]) {
      ++i;
      ++j;
      continue;
    }
    if (star_j == Program::size_type(-1) || star_i >= n)
      return false;
    i = ++star_i;
    j = star_j + 1;
  }
}

bool DomainCovers(const std::string& entry, const std::string& domain) {
  if (domain == entry)
    return true;
  return domain.size() > entry.size() &&
         domain.compare(domain.size() - entry.size(), entry.size(), entry) == 0 &&
         domain[domain.size() - entry.size() - 1] == '.';
}

bool OptionsMatch(const RuleOptions& options, const RequestContext& ctx) {
  if (options.third_party && *options.third_party != ctx.is_third_party)
    return false;
  auto type = static_cast<std::uint32_t>(ContentTypeFor(ctx.resource_type));
  if (options.include_types != 0 && (options.include_types & type) == 0)
    return false;
  if ((options.exclude_types & type) != 0)
    return false;
  const std::string& page = ctx.page_registrable_domain;
  if (!options.include_domains.empty() &&
      std::none_of(options.include_domains.begin(),
                   options.include_domains.end(),
                   [&](const std::string& d) { return DomainCovers(d, page); }))
    return false;
  return std::none_of(
      options.exclude_domains.begin(), options.exclude_domains.end(),
      [&](const std::string& d) { return DomainCovers(d, page); });
}

bool MatchCompiled(const FilterRule& rule, const Program& program,
                   const RequestContext& ctx) {
  std::string_view url = ctx.lowered_url;
  const bool end = EndAnchored(rule.anchor);
  bool matched = false;
  if (rule.anchor == Anchor::kDomain || rule.anchor == Anchor::kDomainAndEnd) {
    for (std::size_t start : ctx.domain_anchor_starts) {
      if (MatchFrom(program, url, start, end)) {
        matched = true;
        break;
      }
    }
  } else {
    matched = MatchFrom(program, url, 0, end);
  }
  return matched && OptionsMatch(rule.options, ctx);
}

std::uint32_t Gram(const char* p) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(p[0])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(p[1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(p[2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(p[3])) << 24;
}

}  // namespace

ContentType ContentTypeFor(ResourceType type) {
  switch (type) {
    case ResourceType::kDocument:
      return ContentType::kDocument;
    case ResourceType::kScript:
      return ContentType::kScript;
    case ResourceType::kXhr:
    case ResourceType::kFetch:
      return ContentType::kXmlHttpRequest;
    case ResourceType::kImage:
      return ContentType::kImage;
    case ResourceType::kStylesheet:
      return ContentType::kStylesheet;
    case ResourceType::kSubdocument:
      return ContentType::kSubdocument;
    case ResourceType::kOther:
      break;
  }
  return ContentType::kOther;
}

std::optional<FilterRule> ParseFilterRule(std::string_view line,
                                          std::string& reason) {
  reason.clear();
  std::string_view text = Trim(line);
  if (text.empty() || IsComment(text) || IsCosmetic(text))
    return std::nullopt;

  FilterRule rule;
  rule.raw = std::string(text);
  std::string_view body = text;
  if (body.rfind("@@", 0) == 0) {
    rule.kind = RuleKind::kException;
    body.remove_prefix(2);
  }

  std::size_t dollar = body.rfind('$');
  if (dollar != std::string_view::npos && dollar + 1 < body.size()) {
    if (!ParseOptions(body.substr(dollar + 1), rule.options, reason))
      return std::nullopt;
    body = body.substr(0, dollar);
  }

  if (body.size() >= 2 && body.front() == '/' && body.back() == '/') {
    reason = "regular-expression patterns are not supported";
    return std::nullopt;
  }

  bool start = false;
  bool domain = false;
  if (body.rfind("||", 0) == 0) {
    domain = true;
    body.remove_prefix(2);
  } else if (body.rfind('|', 0) == 0) {
    start = true;
    body.remove_prefix(1);
  }
  bool end = false;
  if (!body.empty() && body.back() == '|') {
    end = true;
    body.remove_suffix(1);
  }
  if (body.find('|') != std::string_view::npos) {
    reason = "'|' inside pattern";
    return std::nullopt;
  }
  if (domain)
    rule.anchor = end ? Anchor::kDomainAndEnd : Anchor::kDomain;
  else if (start)
    rule.anchor = end ? Anchor::kStartAndEnd : Anchor::kStart;
  else
    rule.anchor = end ? Anchor::kEnd : Anchor::kNone;

  rule.pattern = Tokenize(body);
  return rule;
}

FilterParseResult ParseFilterList(std::istream& in,
                                  const std::string& source_name) {
  FilterParseResult result;
  std::string line;
  std::size_t number = 0;
  std::string reason;
  while (std::getline(in, line)) {
    ++number;
    std::string_view text = Trim(line);
    if (text.empty())
      continue;
    if (IsComment(text)) {
      ++result.comment_lines;
      continue;
    }
    if (IsCosmetic(text)) {
      ++result.cosmetic_lines;
      continue;
    }
    std::optional<FilterRule> rule = ParseFilterRule(text, reason);
    if (rule)
      result.rules.push_back(std::move(*rule));
    else
      result.diagnostics.push_back(
          {source_name, number, std::string(text), reason});
  }
  return result;
}

FilterParseResult ParseFilterListFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open filter list: " + path);
  FilterParseResult result = ParseFilterList(in, path);
  if (in.bad())
    throw std::runtime_error("error reading filter list: " + path);
  return result;
}

RequestContext MakeRequestContext(UrlParts url_parts,
                                  std::string page_registrable_domain,
                                  ResourceType resource_type) {
  RequestContext ctx;
  ctx.lowered_url = AsciiLower(url_parts.full_url);
  ctx.is_third_party = url_parts.registrable_domain != page_registrable_domain;
  ctx.page_registrable_domain = std::move(page_registrable_domain);
  ctx.resource_type = resource_type;

  const std::string& url = ctx.lowered_url;
  std::size_t begin = std::min(url_parts.host_offset, url.size());
  std::size_t end = url.find_first_of(":/?#]", begin);
  if (end == std::string::npos)
    end = url.size();
  ctx.domain_anchor_starts.push_back(begin);
  for (std::size_t i = begin + 1; i < end; ++i) {
    if (url[i - 1] == '.')
      ctx.domain_anchor_starts.push_back(i);
  }
  ctx.url_parts = std::move(url_parts);
  return ctx;
}

std::string_view LabelName(Label label) {
  return label == Label::kTracking ? "Tracking" : "Functional";
}

bool MatchRule(const FilterRule& rule, const RequestContext& ctx) {
  return MatchCompiled(rule, Compile(rule), ctx);
}

RuleSet::RuleSet(std::vector<FilterRule> rules) : rules_(std::move(rules)) {
  programs_.reserve(rules_.size());
  for (std::uint32_t index = 0; index < rules_.size(); ++index) {
    const FilterRule& rule = rules_[index];
    programs_.push_back(Compile(rule));
    std::vector<std::uint32_t>* best = nullptr;
    std::uint32_t best_gram = 0;
    for (const PatternToken& token : rule.pattern) {
      if (token.kind != PatternToken::Kind::kLiteral || token.text.size() < 4)
        continue;
      for (std::size_t i = 0; i + 4 <= token.text.size(); ++i) {
        std::uint32_t gram = Gram(token.text.data() + i);
        std::vector<std::uint32_t>& bucket = by_gram_[gram];
        if (!best || bucket.size() < best->size()) {
          best = &bucket;
          best_gram = gram;
        }
      }
    }
    if (best)
      by_gram_[best_gram].push_back(index);
    else
      unindexed_.push_back(index);
  }
  // Drop buckets created while probing.
  for (auto it = by_gram_.begin(); it != by_gram_.end();) {
    if (it->second.empty())
      it = by_gram_.erase(it);
    else
      ++it;
  }
}

void RuleSet::Candidates(const RequestContext& ctx,
                         std::vector<std::uint32_t>& out) const {
  out = unindexed_;
  const std::string& url = ctx.lowered_url;
  for (std::size_t i = 0; i + 4 <= url.size(); ++i) {
    auto it = by_gram_.find(Gram(url.data() + i));
    if (it != by_gram_.end())
      out.insert(out.end(), it->second.begin(), it->second.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
}

LabelDecision RuleSet::Decide(const RequestContext& ctx) const {
  std::vector<std::uint32_t> candidates;
  Candidates(ctx, candidates);
  bool blocked = false;
  bool excepted = false;
  LabelDecision decision;
  for (std::uint32_t index : candidates) {
    const FilterRule& rule = rules_[index];
    if (!MatchCompiled(rule, programs_[index], ctx))
      continue;
    std::string& slot = rule.kind == RuleKind::kBlock ? decision.block_rule
                                                      : decision.exception_rule;
    bool& flag = rule.kind == RuleKind::kBlock ? blocked : excepted;
    if (!flag || rule.raw < slot)
      slot = rule.raw;
    flag = true;
  }
  decision.label = blocked && !excepted ? Label::kTracking : Label::kFunctional;
  return decision;
}

Label LabelRequest(const RuleSet& rules, const RequestContext& ctx) {
  return rules.Decide(ctx).label;
}

}  // namespace sift
