#include <sstream>

#include "doctest.h"
#include "sift/url.h"
#include "support.h"

using sift::DecomposeUrl;
using sift::PublicSuffixList;
using sift::SplitUrl;
using sift::UrlError;

namespace {

PublicSuffixList Mini(const std::string& text) {
  std::istringstream in(text);
  return PublicSuffixList::Parse(in);
}

}  // namespace

TEST_CASE("split keeps host, path and offset") {
  auto p = SplitUrl("https://User:pw@Pixel.WP.com:8080/a/b?x=1#frag");
  CHECK(p.hostname == "pixel.wp.com");
  CHECK(p.path_and_query == "/a/b?x=1");
  CHECK(p.full_url.substr(p.host_offset, 12) == "Pixel.WP.com");

  CHECK(SplitUrl("http://example.com").path_and_query == "/");
  CHECK(SplitUrl("http://example.com.").hostname == "example.com");
  CHECK(SplitUrl("https://[2001:db8::1]:443/x").hostname == "2001:db8::1");
}

TEST_CASE("split rejects malformed urls") {
  for (const char* bad : {"", "example.com/x", "://x", "1http://a.com/",
                          "https:///path", "http://a.com:port/",
                          "http://a b.com/", "http://[::1/"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(SplitUrl(bad), UrlError);
  }
}

TEST_CASE("registrable domain of the spec examples") {
  const auto& psl = testing::FixturePsl();
  CHECK(DecomposeUrl("https://pixel.wp.com/g.gif", psl).registrable_domain ==
        "wp.com");
  CHECK(DecomposeUrl("https://a.b.example.co.uk/", psl).registrable_domain ==
        "example.co.uk");
  CHECK(DecomposeUrl("https://x.github.io/", psl).registrable_domain ==
        "x.github.io");
}

TEST_CASE("hosts without an eTLD+1 group under themselves") {
  const auto& psl = testing::FixturePsl();
  CHECK(DecomposeUrl("http://192.168.0.1/x", psl).registrable_domain ==
        "192.168.0.1");
  CHECK(DecomposeUrl("http://localhost:3000/", psl).registrable_domain ==
        "localhost");
  CHECK(DecomposeUrl("https://co.uk/", psl).registrable_domain == "co.uk");
  CHECK(DecomposeUrl("http://[::1]/", psl).registrable_domain == "::1");
}

TEST_CASE("wildcard and exception rules") {
  auto psl = Mini("// comment\n*.ck\n!www.ck\ncom\n\n// ===END===\n");
  CHECK(psl.rule_count() == 3);
  CHECK(!psl.RegistrableDomain("ck"));
  CHECK(!psl.RegistrableDomain("test.ck"));
  CHECK(psl.RegistrableDomain("b.test.ck") == "b.test.ck");
  CHECK(psl.RegistrableDomain("www.ck") == "www.ck");
  CHECK(psl.RegistrableDomain("www.www.ck") == "www.ck");
  CHECK(psl.RegistrableDomain("a.example") == "a.example");
}

TEST_CASE("punycode encoding") {
  CHECK(sift::PunycodeLabel("example") == "example");
  CHECK(sift::PunycodeLabel("\xe9\xa3\x9f\xe7\x8b\xae") == "xn--85x722f");
  CHECK(sift::PunycodeLabel("b\xc3\xbc" "cher") == "xn--bcher-kva");
  CHECK(!sift::PunycodeLabel("\xff"));
}

TEST_CASE("reference test file") {
  const auto& psl = testing::FixturePsl();
  const auto cases = testing::LoadPslCases();
  REQUIRE(cases.size() > 60);
  for (const auto& c : cases) {
    if (!c.input)
      continue;  // null input has no host to decompose
    CAPTURE(c.line);
    CAPTURE(*c.input);
    CHECK(psl.RegistrableDomain(*c.input) == c.expected);
  }
}
