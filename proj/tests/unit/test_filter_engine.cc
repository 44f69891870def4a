#include <algorithm>
#include <random>
#include <sstream>

#include "doctest.h"
#include "filter_corpus.h"
#include "regex_oracle.h"
#include "sift/filter_engine.h"
#include "support.h"

using sift::Anchor;
using sift::FilterRule;
using sift::Label;
using sift::PatternToken;
using sift::ResourceType;
using sift::RuleKind;

namespace {

FilterRule Rule(const std::string& text) {
  std::string reason;
  auto rule = sift::ParseFilterRule(text, reason);
  INFO(text, " ", reason);
  REQUIRE(rule);
  return *rule;
}

sift::RequestContext Ctx(const std::string& url, const std::string& page,
                         ResourceType type = ResourceType::kScript) {
  const auto& psl = testing::FixturePsl();
  return sift::MakeRequestContext(
      sift::DecomposeUrl(url, psl),
      sift::DecomposeUrl(page, psl).registrable_domain, type);
}

bool Matches(const std::string& rule, const std::string& url,
             const std::string& page = "https://publisher.test/",
             ResourceType type = ResourceType::kScript) {
  return sift::MatchRule(Rule(rule), Ctx(url, page, type));
}

Label LabelWith(const std::vector<std::string>& rules, const std::string& url,
                const std::string& page = "https://publisher.test/") {
  std::vector<FilterRule> parsed;
  for (const std::string& r : rules)
    parsed.push_back(Rule(r));
  return sift::LabelRequest(sift::RuleSet(std::move(parsed)), Ctx(url, page));
}

std::string TypeName(ResourceType t) { return std::string(sift::ResourceTypeName(t)); }

}  // namespace

TEST_CASE("parse canonical rules") {
  FilterRule r = Rule("||doubleclick.net^");
  CHECK(r.kind == RuleKind::kBlock);
  CHECK(r.anchor == Anchor::kDomain);
  REQUIRE(r.pattern.size() == 2);
  CHECK(r.pattern[0] == PatternToken{PatternToken::Kind::kLiteral, "doubleclick.net"});
  CHECK(r.pattern[1].kind == PatternToken::Kind::kSeparator);

  FilterRule e = Rule("@@||example.com/assets/$script");
  CHECK(e.kind == RuleKind::kException);
  CHECK(e.options.include_types ==
        static_cast<std::uint32_t>(sift::ContentType::kScript));

  CHECK(Rule("|https://a.com/x|").anchor == Anchor::kStartAndEnd);
  CHECK(Rule("||a.com^|").anchor == Anchor::kDomainAndEnd);
  CHECK(Rule(".gif|").anchor == Anchor::kEnd);
  CHECK(Rule("/ads/*$third-party,~image,domain=a.com|~b.a.com")
            .options.exclude_domains == std::vector<std::string>{"b.a.com"});
}

TEST_CASE("comments, cosmetic and unsupported lines") {
  std::istringstream list(
      "[Adblock Plus 2.0]\n! Title: x\nexample.com##.ad-banner\n"
      "example.com#@#.ad\n/banner\\d+/\n||a.com^$popup\n||a.com^$csp=x\n"
      "a|b\n||ok.com^\n\n  \n$script\n");
  auto parsed = sift::ParseFilterList(list, "mini");
  CHECK(parsed.rules.size() == 2);  // "$script" alone matches every script
  CHECK(parsed.comment_lines == 2);
  CHECK(parsed.cosmetic_lines == 2);
  REQUIRE(parsed.diagnostics.size() == 4);
  CHECK(parsed.diagnostics[0].line == 5);
  CHECK(parsed.diagnostics[0].source == "mini");
  std::string reason;
  CHECK_FALSE(sift::ParseFilterRule("example.com##.ad-banner", reason));
  CHECK(reason.empty());
}

TEST_CASE("domain anchor respects label boundaries") {
  CHECK(Matches("||wp.com^", "https://pixel.wp.com/g.gif"));
  CHECK_FALSE(Matches("||wp.com^", "https://notwp.com/x"));
  CHECK(Matches("||wp.com^", "https://wp.com"));
  CHECK_FALSE(Matches("||wp.com^", "https://a.com/wp.com/"));
  CHECK(Matches("||WP.com/G.gif", "https://PIXEL.wp.com/g.GIF?x"));
}

TEST_CASE("separator, wildcard and end anchors") {
  CHECK(Matches("/collect^tid=", "https://a.com/collect?tid=1"));
  CHECK_FALSE(Matches("/collect^tid=", "https://a.com/collect.tid=1"));
  CHECK(Matches("ads^", "https://a.com/ads"));
  CHECK(Matches("/pixel/*.gif", "https://a.com/pixel/x/y.gif"));
  CHECK(Matches(".gif|", "https://a.com/x.gif"));
  CHECK_FALSE(Matches(".gif|", "https://a.com/x.gif?x"));
  CHECK(Matches("|https://a.com/", "https://a.com/z"));
  CHECK_FALSE(Matches("|a.com", "https://a.com/z"));
}

TEST_CASE("options gate matches") {
  CHECK_FALSE(Matches("/ads/*$third-party", "https://publisher.test/ads/x"));
  CHECK(Matches("/ads/*$third-party", "https://cdn.other.test/ads/x"));
  CHECK(Matches("/ads/*$~third-party", "https://www.publisher.test/ads/x"));
  CHECK(Matches("/ads/*$image", "https://a.com/ads/1", "https://p.test/",
                ResourceType::kImage));
  CHECK_FALSE(Matches("/ads/*$image", "https://a.com/ads/1"));
  CHECK(Matches("/ads/*$xmlhttprequest", "https://a.com/ads/1",
                "https://p.test/", ResourceType::kFetch));
  CHECK_FALSE(Matches("/ads/*$~script", "https://a.com/ads/1"));
  CHECK(Matches("/ads/*$domain=p.test", "https://a.com/ads/1",
                "https://www.p.test/"));
  CHECK_FALSE(Matches("/ads/*$domain=~p.test", "https://a.com/ads/1",
                      "https://www.p.test/"));
  // Entries are compared with the page's registrable domain, so a
  // subdomain entry never covers it.
  CHECK(Matches("/ads/*$domain=p.test|~www.p.test", "https://a.com/ads/1",
                "https://www.p.test/"));
}

TEST_CASE("labeling") {
  CHECK(LabelWith({"||google-analytics.com^"},
                  "https://www.google-analytics.com/analytics.js") ==
        Label::kTracking);
  CHECK(LabelWith({"||google-analytics.com^"}, "https://example.com/app.js") ==
        Label::kFunctional);
  CHECK(LabelWith({"||ads.com^", "@@||ads.com/static/", "/banner/*"},
                  "https://ads.com/static/lib.js") == Label::kFunctional);
  CHECK(LabelWith({"||ads.com^", "@@||ads.com/static/", "/banner/*"},
                  "https://ads.com/banner/1.png") == Label::kTracking);
}

TEST_CASE("decision names the smallest matching rules") {
  sift::RuleSet rules({Rule("||b.com^"), Rule("/x/*"), Rule("@@/x/y"),
                       Rule("@@||b.com/x/")});
  auto d = rules.Decide(Ctx("https://b.com/x/y", "https://p.test/"));
  CHECK(d.label == Label::kFunctional);
  CHECK(d.block_rule == "/x/*");
  CHECK(d.exception_rule == "@@/x/y");
}

TEST_CASE("regex oracle agreement on a sample corpus") {
  const auto& psl = testing::FixturePsl();
  std::size_t compared = 0, matched = 0;
  for (const auto& t : oracle::FilterCorpus(5, 3000)) {
    std::string reason;
    auto rule = sift::ParseFilterRule(t.rule, reason);
    auto expected = oracle::RegexMatch(t.rule, t.request);
    if (!rule || !expected)
      continue;
    auto type = sift::ParseResourceType(t.request.resource_type);
    REQUIRE(type);
    auto parts = sift::DecomposeUrl(t.request.url, psl);
    REQUIRE(parts.registrable_domain == t.request.request_domain);
    auto ctx = sift::MakeRequestContext(parts, t.request.page_domain, *type);
    INFO(t.rule, " ", t.request.url, " page=", t.request.page_domain, " ",
         t.request.resource_type);
    CHECK(sift::MatchRule(*rule, ctx) == *expected);
    ++compared;
    matched += *expected;
  }
  CHECK(compared > 2500);
  CHECK(matched > compared / 10);
}

TEST_CASE("indexed rule set equals a linear scan and ignores rule order") {
  const auto& psl = testing::FixturePsl();
  auto corpus = oracle::FilterCorpus(9, 1200);
  std::vector<FilterRule> rules;
  for (const auto& t : corpus) {
    std::string reason;
    if (auto r = sift::ParseFilterRule(t.rule, reason))
      rules.push_back(*r);
  }
  std::vector<FilterRule> shuffled = rules;
  std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(3));
  sift::RuleSet indexed(rules);
  sift::RuleSet reordered(shuffled);
  for (const auto& t : corpus) {
    auto ctx = sift::MakeRequestContext(
        sift::DecomposeUrl(t.request.url, psl), t.request.page_domain,
        *sift::ParseResourceType(t.request.resource_type));
    bool block = false, exception = false;
    for (const FilterRule& r : rules) {
      if (sift::MatchRule(r, ctx))
        (r.kind == RuleKind::kBlock ? block : exception) = true;
    }
    const Label linear =
        block && !exception ? Label::kTracking : Label::kFunctional;
    auto a = indexed.Decide(ctx);
    auto b = reordered.Decide(ctx);
    CHECK(a.label == linear);
    CHECK(a.label == b.label);
    CHECK(a.block_rule == b.block_rule);
    CHECK(a.exception_rule == b.exception_rule);
  }
}

TEST_CASE("exception dominance and block monotonicity") {
  const auto& psl = testing::FixturePsl();
  auto corpus = oracle::FilterCorpus(21, 600);
  std::vector<FilterRule> blocks, exceptions;
  for (const auto& t : corpus) {
    std::string reason;
    if (auto r = sift::ParseFilterRule(t.rule, reason))
      (r->kind == RuleKind::kBlock ? blocks : exceptions).push_back(*r);
  }
  REQUIRE(blocks.size() > 20);
  REQUIRE(exceptions.size() > 5);
  std::vector<FilterRule> base(blocks.begin(), blocks.begin() + blocks.size() / 2);
  std::vector<FilterRule> more_blocks = base;
  more_blocks.insert(more_blocks.end(), blocks.begin() + blocks.size() / 2,
                     blocks.end());
  std::vector<FilterRule> more_exceptions = base;
  more_exceptions.insert(more_exceptions.end(), exceptions.begin(),
                         exceptions.end());
  sift::RuleSet s0(base), s_block(more_blocks), s_exc(more_exceptions);
  for (const auto& t : corpus) {
    auto ctx = sift::MakeRequestContext(
        sift::DecomposeUrl(t.request.url, psl), t.request.page_domain,
        *sift::ParseResourceType(t.request.resource_type));
    const Label l0 = sift::LabelRequest(s0, ctx);
    if (l0 == Label::kTracking)
      CHECK(sift::LabelRequest(s_block, ctx) == Label::kTracking);
    if (l0 == Label::kFunctional)
      CHECK(sift::LabelRequest(s_exc, ctx) == Label::kFunctional);
  }
}

TEST_CASE("every resource type maps to a type option") {
  for (int i = 0; i < 8; ++i) {
    auto t = static_cast<ResourceType>(i);
    CAPTURE(TypeName(t));
    CHECK((static_cast<std::uint32_t>(sift::ContentTypeFor(t)) &
           sift::kAllContentTypes) != 0);
  }
}
