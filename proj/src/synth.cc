#include "sift/synth.h"

#include <algorithm>
#include <charconv>
#include <functional>
#include <istream>
#include <memory>
#include <random>
#include <sstream>

#include "sift/filter_engine.h"
#include "sift/pipeline.h"

namespace sift {

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Plain modulo keeps the stream identical across standard libraries.
  std::uint64_t Below(std::uint64_t n) { return n == 0 ? 0 : gen_() % n; }
  std::uint64_t Between(std::uint64_t lo, std::uint64_t hi) {
    return lo + Below(hi - lo + 1);
  }
  bool Chance(unsigned percent) { return Below(100) < percent; }

  template <typename T>
  const T& Pick(const std::vector<T>& items) {
    return items[Below(items.size())];
  }

 private:
  std::mt19937_64 gen_;
};

constexpr std::int64_t kBaseTimestamp = 1618000000000;

std::string_view LevelKeyword(Granularity g) {
  switch (g) {
    case Granularity::kDomain:
      return "domain";
    case Granularity::kHostname:
      return "host";
    case Granularity::kScript:
      return "script";
    case Granularity::kMethod:
      break;
  }
  return "method";
}

Granularity Next(Granularity g) {
  return static_cast<Granularity>(static_cast<int>(g) + 1);
}

std::string PageOrigin(const std::string& page_url) {
  return "https://" + SplitUrl(page_url).hostname + "/";
}

std::string ResolveAgainst(const std::string& name, const std::string& base) {
  if (name.find("://") != std::string::npos)
    return name;
  return base + name;
}

StackFrame MakeFrame(const std::string& script, const std::string& method,
                     std::int64_t line, std::int64_t column) {
  return {method == kAnonymousMethod ? std::string() : method, script, line,
          column};
}

std::uint64_t ParseCount(std::string_view text, std::size_t line) {
  std::uint64_t value = 0;
  auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ScenarioError(line, "bad count '" + std::string(text) + "'");
  return value;
}

// A group of requests sharing one planted position in the tree. Empty
// fields are filled with random values at generation time.
struct Bucket {
  std::string domain;
  std::string host;
  std::string script_url;
  std::string method;
  std::uint64_t tracking = 0;
  std::uint64_t functional = 0;
  const std::vector<StackTemplate>* stacks = nullptr;
  bool residual = false;
  std::size_t id = 0;
};

struct Planner {
  const Scenario& scenario;
  const PublicSuffixList& psl;
  std::string page_origin;
  ExpectedOutcome expected;
  std::vector<std::set<EntityKey>> seen{4};
  std::vector<Bucket> buckets;
  std::vector<std::unique_ptr<ScenarioNode>> synthetic;

  Planner(const Scenario& s, const PublicSuffixList& p, std::string origin)
      : scenario(s), psl(p), page_origin(std::move(origin)) {}

  static std::pair<std::uint64_t, std::uint64_t> Totals(const ScenarioNode& n) {
    if (n.children.empty())
      return {n.tracking, n.functional};
    std::uint64_t t = 0, f = 0;
    for (const ScenarioNode& c : n.children) {
      auto [ct, cf] = Totals(c);
      t += ct;
      f += cf;
    }
    if (n.counts_given && (t != n.tracking || f != n.functional))
      throw ScenarioError(n.line, std::string(LevelKeyword(n.level)) + " '" +
                                      n.name +
                                      "' counts disagree with its children");
    return {t, f};
  }

  void CheckDomain(const ScenarioNode& n) {
    if (n.name.find('.') == std::string::npos)
      throw ScenarioError(n.line, "domain '" + n.name + "' needs a dot");
    auto rd = psl.RegistrableDomain(n.name);
    if (!rd || *rd != n.name)
      throw ScenarioError(n.line, "'" + n.name +
                                      "' is not a registrable domain");
  }

  void CheckHost(const ScenarioNode& n, const std::string& domain) {
    bool under = n.name == domain ||
                 (n.name.size() > domain.size() &&
                  n.name.compare(n.name.size() - domain.size(), domain.size(),
                                 domain) == 0 &&
                  n.name[n.name.size() - domain.size() - 1] == '.');
    auto rd = psl.RegistrableDomain(n.name);
    if (!under || !rd || *rd != domain)
      throw ScenarioError(n.line, "host '" + n.name + "' is not under '" +
                                      domain + "'");
  }

  void Visit(const ScenarioNode& n, Bucket path) {
    EntityKey key;
    key.granularity = n.level;
    switch (n.level) {
      case Granularity::kDomain:
        CheckDomain(n);
        path.domain = n.name;
        key.key = n.name;
        break;
      case Granularity::kHostname:
        CheckHost(n, path.domain);
        path.host = n.name;
        key.key = n.name;
        break;
      case Granularity::kScript:
        path.script_url = ResolveAgainst(n.name, "https://" + path.host + "/");
        key.key = path.script_url;
        break;
      case Granularity::kMethod:
        path.method = n.name;
        key.key = path.script_url;
        key.method = n.name;
        break;
    }
    if (!n.stacks.empty() && n.level != Granularity::kMethod)
      throw ScenarioError(n.line, "stack templates belong to methods");

    const auto [t, f] = Totals(n);
    if (t + f == 0)
      throw ScenarioError(n.line, std::string(LevelKeyword(n.level)) + " '" +
                                      n.name + "' has no requests");
    auto& level_seen = seen[static_cast<std::size_t>(n.level)];
    if (!level_seen.insert(key).second)
      throw ScenarioError(n.line, "duplicate " +
                                      std::string(LevelKeyword(n.level)) +
                                      " '" + key.ToString() + "'");
    for (const StackTemplate& s : n.stacks) {
      if ((s.label == Label::kTracking ? t : f) == 0)
        throw ScenarioError(n.line, "stack template for a label with no "
                                    "requests on method '" + n.name + "'");
    }

    const Verdict verdict = VerdictFor(Ratio(t, f), scenario.threshold);
    expected.levels[static_cast<std::size_t>(n.level)].push_back(
        {key, t, f, verdict});

    if (verdict != Verdict::kMixed) {
      if (!n.children.empty())
        throw ScenarioError(
            n.children.front().line,
            std::string(LevelKeyword(n.children.front().level)) +
                        " declared under pure " +
                        std::string(LevelKeyword(n.level)) + " '" + n.name +
                        "'");
      Emit(path, t, f, nullptr, false);
      return;
    }
    if (!n.children.empty()) {
      for (const ScenarioNode& c : n.children)
        Visit(c, path);
      return;
    }
    if (n.level == Granularity::kMethod) {
      Emit(path, t, f, &n.stacks, true);
      return;
    }
    // A mixed leaf above method level continues as a single-child chain.
    auto child = std::make_unique<ScenarioNode>();
    child->level = Next(n.level);
    child->name = n.level == Granularity::kDomain     ? n.name
                  : n.level == Granularity::kHostname ? "lib.js"
                                                      : "run";
    child->tracking = t;
    child->functional = f;
    child->line = n.line;
    synthetic.push_back(std::move(child));
    Visit(*synthetic.back(), path);
  }

  void Emit(const Bucket& path, std::uint64_t t, std::uint64_t f,
            const std::vector<StackTemplate>* stacks, bool residual) {
    Bucket b = path;
    b.tracking = t;
    b.functional = f;
    b.stacks = stacks;
    b.residual = residual;
    b.id = buckets.size();
    buckets.push_back(std::move(b));
  }
};

struct Planted {
  RequestRecord record;
  Label label;
  const Bucket* bucket;
};

std::vector<StackFrame> DefaultAncestors(const std::string& origin, Rng& rng) {
  std::vector<StackFrame> frames;
  if (rng.Chance(40))
    frames.push_back(MakeFrame(origin + "js/vendor.js", "dispatch", 88, 12));
  frames.push_back(MakeFrame(origin + "main.js", "main", 1, 1));
  return frames;
}

std::vector<StackFrame> TemplateFrames(const StackTemplate& t,
                                       const std::string& origin) {
  std::vector<StackFrame> frames;
  std::int64_t line = 10;
  for (const auto& [script, method] : t.frames)
    frames.push_back(
        MakeFrame(ResolveAgainst(script, origin), method, line++, 4));
  return frames;
}

const std::vector<std::string> kMethodPool = {"send", "load", "init", "fetchData",
                                              "track", "render"};
const std::vector<std::string> kPageScripts = {"js/app.js", "js/vendor.js",
                                               "js/widgets.js"};

std::string TrackingUrl(const std::string& host, const std::string& slug,
                        std::uint64_t i, Rng& rng) {
  switch (rng.Below(3)) {
    case 0:
      return "https://" + host + (rng.Chance(10) ? "/TRK/" : "/trk/") + slug +
             "/" + std::to_string(i) + ".gif";
    case 1:
      return "https://" + host + "/pixel/" + slug + "-" + std::to_string(i) +
             ".gif";
    default:
      return "https://" + host + "/collect?tid=" + slug +
             "&n=" + std::to_string(i);
  }
}

std::string FunctionalUrl(const std::string& host, const std::string& slug,
                          std::uint64_t i, bool static_only, Rng& rng) {
  switch (static_only ? 0 : rng.Below(3)) {
    case 0:
      return "https://" + host + "/static/" + slug + "/" + std::to_string(i) +
             ".js";
    case 1:
      return "https://" + host + "/api/v1/" + slug +
             "?page=" + std::to_string(i);
    default:
      return "https://" + host + "/img/" + slug + "/" + std::to_string(i) +
             ".png";
  }
}

}  // namespace

ScenarioError::ScenarioError(std::size_t line, const std::string& message)
    : std::runtime_error("scenario line " + std::to_string(line) + ": " +
                         message),
      line_(line) {}

Scenario ParseScenario(std::istream& in) {
  Scenario scenario;
  ScenarioNode* current[4] = {nullptr, nullptr, nullptr, nullptr};
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::istringstream words(line);
    std::string keyword;
    if (!(words >> keyword) || keyword.front() == '#')
      continue;
    std::vector<std::string> args;
    for (std::string w; words >> w;)
      args.push_back(w);

    if (keyword == "scenario" || keyword == "page" || keyword == "threshold") {
      if (args.size() != 1)
        throw ScenarioError(number, keyword + " takes one value");
      if (keyword == "scenario") {
        scenario.name = args[0];
      } else if (keyword == "page") {
        try {
          SplitUrl(args[0]);
        } catch (const UrlError& e) {
          throw ScenarioError(number, e.what());
        }
        scenario.page_url = args[0];
      } else {
        double tau = 0;
        auto [ptr, ec] = std::from_chars(
            args[0].data(), args[0].data() + args[0].size(), tau);
        if (ec != std::errc() || ptr != args[0].data() + args[0].size() ||
            !(tau > 0))
          throw ScenarioError(number, "threshold must be a positive number");
        scenario.threshold = tau;
      }
      continue;
    }

    if (keyword == "stack") {
      if (!current[3])
        throw ScenarioError(number, "stack outside of a method");
      if (args.empty() || (args[0] != "tracking" && args[0] != "functional"))
        throw ScenarioError(number, "stack needs 'tracking' or 'functional'");
      StackTemplate t;
      t.label = args[0] == "tracking" ? Label::kTracking : Label::kFunctional;
      for (std::size_t i = 1; i < args.size(); ++i) {
        std::size_t colon = args[i].rfind(':');
        if (colon == std::string::npos || colon == 0 ||
            colon + 1 == args[i].size() ||
            args[i].compare(colon, 3, "://") == 0)
          throw ScenarioError(number, "frame must be script:method, got '" +
                                          args[i] + "'");
        t.frames.emplace_back(args[i].substr(0, colon),
                              args[i].substr(colon + 1));
      }
      current[3]->stacks.push_back(std::move(t));
      continue;
    }

    int level = -1;
    for (Granularity g : kAllGranularities) {
      if (keyword == LevelKeyword(g))
        level = static_cast<int>(g);
    }
    if (level < 0)
      throw ScenarioError(number, "unknown keyword '" + keyword + "'");
    if (args.empty())
      throw ScenarioError(number, keyword + " needs a name");

    ScenarioNode node;
    node.level = static_cast<Granularity>(level);
    node.name = level <= 1 ? AsciiLower(args[0]) : args[0];
    node.line = number;
    for (std::size_t i = 1; i < args.size(); ++i) {
      std::size_t eq = args[i].find('=');
      std::string name = args[i].substr(0, eq);
      if (eq == std::string::npos)
        throw ScenarioError(number, "expected t=N or f=N, got '" + args[i] + "'");
      std::uint64_t value = ParseCount(std::string_view(args[i]).substr(eq + 1),
                                       number);
      if (name == "t" || name == "tracking")
        node.tracking = value;
      else if (name == "f" || name == "functional")
        node.functional = value;
      else
        throw ScenarioError(number, "unknown attribute '" + name + "'");
      node.counts_given = true;
    }

    std::vector<ScenarioNode>* siblings = nullptr;
    if (level == 0) {
      siblings = &scenario.domains;
    } else {
      if (!current[level - 1])
        throw ScenarioError(number, keyword + " outside of a " +
                                        std::string(LevelKeyword(
                                            static_cast<Granularity>(level - 1))));
      siblings = &current[level - 1]->children;
    }
    siblings->push_back(std::move(node));
    current[level] = &siblings->back();
    for (int l = level + 1; l < 4; ++l)
      current[l] = nullptr;
  }
  return scenario;
}

Scenario ParseScenarioText(const std::string& text) {
  std::istringstream in(text);
  return ParseScenario(in);
}

std::string SynthOutput::TraceText() const {
  std::string out;
  for (const RequestRecord& r : records) {
    out += SerializeRecord(r);
    out += '\n';
  }
  return out;
}

SynthOutput Generate(const Scenario& scenario, std::uint64_t seed,
                     const PublicSuffixList* psl) {
  static const PublicSuffixList kImplicitOnly;
  const PublicSuffixList& suffixes = psl ? *psl : kImplicitOnly;
  std::string origin;
  try {
    origin = PageOrigin(scenario.page_url);
  } catch (const UrlError& e) {
    throw ScenarioError(0, e.what());
  }

  Planner planner{scenario, suffixes, origin};
  planner.expected.threshold = scenario.threshold;
  planner.expected.levels.resize(4);
  for (const ScenarioNode& d : scenario.domains)
    planner.Visit(d, {});
  for (auto& level : planner.expected.levels)
    std::sort(level.begin(), level.end(),
              [](const ExpectedEntity& a, const ExpectedEntity& b) {
                return a.key < b.key;
              });

  Rng rng(seed);
  const std::string page_domain =
      DecomposeUrl(scenario.page_url, suffixes).registrable_domain;
  std::set<std::string> blocked_domains;
  for (const ScenarioNode& d : scenario.domains) {
    if (d.name != page_domain && rng.Chance(30))
      blocked_domains.insert(d.name);
  }

  std::vector<Planted> planted;
  for (const Bucket& b : planner.buckets) {
    const std::string slug = "e" + std::to_string(b.id);
    const bool domain_blocked = blocked_domains.count(b.domain) > 0;
    const std::int64_t method_line = 20 + static_cast<std::int64_t>(b.id);
    std::uint64_t per_label[2] = {0, 0};
    for (Label label : {Label::kTracking, Label::kFunctional}) {
      const std::uint64_t count =
          label == Label::kTracking ? b.tracking : b.functional;
      std::vector<const StackTemplate*> templates;
      if (b.stacks) {
        for (const StackTemplate& t : *b.stacks) {
          if (t.label == label)
            templates.push_back(&t);
        }
      }
      for (std::uint64_t i = 0; i < count; ++i) {
        std::uint64_t n = per_label[label == Label::kTracking ? 0 : 1]++;
        std::string host = b.host;
        if (host.empty()) {
          std::uint64_t variant = rng.Below(3);
          host = variant == 0 ? b.domain
                              : (variant == 1 ? "www." : "cdn.") + b.domain;
        }
        RequestRecord r;
        r.top_level_url = scenario.page_url;
        r.frame_url = scenario.page_url;
        r.url = label == Label::kTracking
                    ? TrackingUrl(host, slug, n, rng)
                    : FunctionalUrl(host, slug, n, domain_blocked, rng);
        static const std::vector<ResourceType> kTrackingTypes = {
            ResourceType::kImage, ResourceType::kXhr, ResourceType::kFetch,
            ResourceType::kScript};
        static const std::vector<ResourceType> kFunctionalTypes = {
            ResourceType::kScript, ResourceType::kFetch, ResourceType::kXhr,
            ResourceType::kStylesheet, ResourceType::kImage,
            ResourceType::kSubdocument};
        r.resource_type = rng.Pick(label == Label::kTracking ? kTrackingTypes
                                                              : kFunctionalTypes);
        if (!b.method.empty()) {
          r.call_stack.push_back(
              MakeFrame(b.script_url, b.method, method_line, 8));
        } else if (!b.script_url.empty()) {
          r.call_stack.push_back(MakeFrame(
              b.script_url, rng.Pick(kMethodPool), rng.Between(1, 400),
              rng.Between(1, 80)));
        } else {
          r.call_stack.push_back(
              MakeFrame(origin + rng.Pick(kPageScripts), rng.Pick(kMethodPool),
                        rng.Between(1, 400), rng.Between(1, 80)));
        }
        std::vector<StackFrame> ancestors =
            templates.empty()
                ? DefaultAncestors(origin, rng)
                : TemplateFrames(*templates[n % templates.size()], origin);
        r.call_stack.insert(r.call_stack.end(), ancestors.begin(),
                            ancestors.end());
        planted.push_back({std::move(r), label, &b});
      }
    }
  }

  // A few requests without a script initiator; they are excluded from
  // classification.
  const std::uint64_t passive = rng.Below(3);
  for (std::uint64_t i = 0; i < passive; ++i) {
    RequestRecord r;
    r.top_level_url = scenario.page_url;
    r.frame_url = scenario.page_url;
    r.url = origin + "static/hero-" + std::to_string(i) + ".jpg";
    r.resource_type = ResourceType::kImage;
    planted.push_back({std::move(r), Label::kFunctional, nullptr});
  }

  for (std::size_t i = planted.size(); i > 1; --i)
    std::swap(planted[i - 1], planted[rng.Below(i)]);

  SynthOutput out;
  out.expected = std::move(planner.expected);
  std::map<EntityKey, std::set<CallNode>> tracking_nodes;
  std::map<EntityKey, std::set<CallNode>> functional_nodes;
  for (std::size_t i = 0; i < planted.size(); ++i) {
    Planted& p = planted[i];
    p.record.request_id = "req-" + std::to_string(i + 1);
    p.record.timestamp_ms = kBaseTimestamp + static_cast<std::int64_t>(i) * 13;
    if (p.bucket && p.bucket->residual) {
      out.expected.residual.push_back(p.record.request_id);
      if (p.bucket->stacks && !p.bucket->stacks->empty()) {
        EntityKey key{Granularity::kMethod, p.bucket->script_url,
                      p.bucket->method};
        auto& nodes = p.label == Label::kTracking ? tracking_nodes[key]
                                                  : functional_nodes[key];
        for (const StackFrame& f : p.record.call_stack)
          nodes.insert({f.script_url, MethodName(f, false)});
      }
    }
    out.records.push_back(p.record);
  }
  std::sort(out.expected.residual.begin(), out.expected.residual.end());
  for (auto& [key, nodes] : tracking_nodes) {
    std::set<CallNode>& only = out.expected.divergence[key];
    const std::set<CallNode>& functional = functional_nodes[key];
    std::set_difference(nodes.begin(), nodes.end(), functional.begin(),
                        functional.end(), std::inserter(only, only.end()));
  }

  std::ostringstream rules;
  rules << "[Adblock Plus 2.0]\n"
        << "! Title: synthetic list for scenario " << scenario.name << "\n"
        << "! seed " << seed << "\n"
        << "/trk/*\n"
        << "/pixel/*.gif\n"
        << "/collect^tid=\n"
        << "||never-requested.test^$third-party\n"
        << "/banner/ads/*$image,domain=elsewhere.test\n"
        << "@@/api/v1/health$xmlhttprequest\n"
        << "publisher.test##.ad-slot\n";
  for (const std::string& d : blocked_domains)
    rules << "||" << d << "^\n"
          << "@@||" << d << "/static/\n";
  out.filter_list = rules.str();

  // Self-consistency: the generated list must reproduce every planted label.
  std::istringstream list(out.filter_list);
  RuleSet rule_set(ParseFilterList(list, "synthetic").rules);
  for (const Planted& p : planted) {
    if (!p.bucket)
      continue;
    Label got = rule_set.Decide(ContextFor(p.record, suffixes)).label;
    if (got != p.label)
      throw std::logic_error("generated rules mislabel " + p.record.url);
  }
  return out;
}

Scenario RandomScenario(std::uint64_t seed, std::size_t max_requests) {
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  Scenario scenario;
  scenario.name = "random-" + std::to_string(seed);
  static const std::vector<std::string> kPrefixes = {
      "ads", "cdn", "news", "shop", "track", "media", "static", "api"};
  static const std::vector<std::string> kFrameScripts = {
      "lib/a.js", "lib/b.js", "lib/c.js", "track.js", "app.js"};
  static const std::vector<std::string> kFrameMethods = {"a", "b", "c", "t",
                                                         "init", "<anonymous>"};

  // Generate() adds up to two requests without a stack; keep the whole
  // trace within max_requests.
  std::size_t budget = max_requests > 3 ? max_requests - 2 : 1;

  // Pure leaf: one-sided counts.
  auto pure = [&](ScenarioNode& n, bool tracking, std::uint64_t cap) {
    std::uint64_t c = rng.Between(1, cap);
    (tracking ? n.tracking : n.functional) = c;
    n.counts_given = true;
  };

  std::function<void(ScenarioNode&, std::uint64_t)> mixed;
  mixed = [&](ScenarioNode& n, std::uint64_t cap) {
    auto make_leaf = [&] {
      n.children.clear();
      n.tracking = rng.Between(1, cap / 2);
      n.functional = rng.Between(1, cap / 2);
      n.counts_given = true;
    };
    if (n.level == Granularity::kMethod || rng.Chance(25)) {
      make_leaf();
      if (n.level == Granularity::kMethod && rng.Chance(60)) {
        for (Label label : {Label::kTracking, Label::kFunctional}) {
          std::uint64_t templates = rng.Between(1, 2);
          for (std::uint64_t k = 0; k < templates; ++k) {
            StackTemplate t;
            t.label = label;
            std::uint64_t depth = rng.Between(1, 4);
            for (std::uint64_t d = 0; d < depth; ++d)
              t.frames.emplace_back(rng.Pick(kFrameScripts),
                                    rng.Pick(kFrameMethods));
            t.frames.emplace_back("page.js", "main");
            n.stacks.push_back(std::move(t));
          }
        }
      }
      return;
    }
    for (int attempt = 0; attempt < 8; ++attempt) {
      n.children.clear();
      const std::uint64_t count = rng.Between(2, 3);
      std::uint64_t t = 0, f = 0;
      bool used_anonymous = false;
      for (std::uint64_t i = 0; i < count; ++i) {
        ScenarioNode c;
        c.level = Next(n.level);
        switch (c.level) {
          case Granularity::kHostname:
            c.name = (i == 0 && rng.Chance(30))
                         ? n.name
                         : kPrefixes[i] + std::to_string(rng.Below(9)) + "." +
                               n.name;
            break;
          case Granularity::kScript:
            c.name = "s" + std::to_string(i) + ".js";
            break;
          default:
            if (!used_anonymous && rng.Chance(20)) {
              c.name = std::string(kAnonymousMethod);
              used_anonymous = true;
            } else {
              c.name = "m" + std::to_string(i);
            }
            break;
        }
        const std::uint64_t child_cap = std::max<std::uint64_t>(2, cap / count);
        switch (rng.Below(3)) {
          case 0:
            pure(c, true, child_cap);
            break;
          case 1:
            pure(c, false, child_cap);
            break;
          default:
            mixed(c, child_cap);
            break;
        }
        auto [ct, cf] = [&c] {
          std::uint64_t tt = 0, ff = 0;
          std::function<void(const ScenarioNode&)> sum =
              [&](const ScenarioNode& x) {
                if (x.children.empty()) {
                  tt += x.tracking;
                  ff += x.functional;
                } else {
                  for (const auto& y : x.children)
                    sum(y);
                }
              };
          sum(c);
          return std::pair{tt, ff};
        }();
        t += ct;
        f += cf;
        n.children.push_back(std::move(c));
      }
      if (t > 0 && f > 0 &&
          VerdictFor(Ratio(t, f), scenario.threshold) == Verdict::kMixed) {
        n.counts_given = false;
        return;
      }
    }
    make_leaf();
  };

  const std::uint64_t domains = rng.Between(1, 5);
  for (std::uint64_t i = 0; i < domains && budget > 0; ++i) {
    ScenarioNode d;
    d.level = Granularity::kDomain;
    d.name = rng.Pick(kPrefixes) + std::to_string(i) + ".test";
    const std::uint64_t cap = std::min<std::uint64_t>(budget, 48);
    switch (rng.Below(4)) {
      case 0:
        if (budget >= 121 && rng.Chance(30)) {
          d.tracking = rng.Between(100, 120);
          d.functional = 1;
          d.counts_given = true;
        } else {
          pure(d, true, cap);
        }
        break;
      case 1:
        pure(d, false, cap);
        break;
      default:
        if (cap >= 2)
          mixed(d, cap);
        else
          pure(d, true, cap);
        break;
    }
    std::uint64_t t = 0, f = 0;
    std::function<void(const ScenarioNode&)> sum = [&](const ScenarioNode& x) {
      if (x.children.empty()) {
        t += x.tracking;
        f += x.functional;
      } else {
        for (const auto& y : x.children)
          sum(y);
      }
    };
    sum(d);
    if (t + f > budget)
      break;
    budget -= t + f;
    scenario.domains.push_back(std::move(d));
  }
  if (scenario.domains.empty()) {
    ScenarioNode d;
    d.level = Granularity::kDomain;
    d.name = "solo.test";
    d.tracking = 1;
    d.counts_given = true;
    scenario.domains.push_back(std::move(d));
  }
  return scenario;
}

nlohmann::json ExpectedJson(const ExpectedOutcome& expected) {
  nlohmann::json levels = nlohmann::json::array();
  for (std::size_t l = 0; l < expected.levels.size(); ++l) {
    nlohmann::json entities = nlohmann::json::array();
    for (const ExpectedEntity& e : expected.levels[l]) {
      nlohmann::json j = {{"key", e.key.key},
                          {"tracking", e.tracking},
                          {"functional", e.functional},
                          {"verdict", std::string(VerdictName(e.verdict))}};
      if (e.key.granularity == Granularity::kMethod)
        j["method"] = e.key.method;
      entities.push_back(std::move(j));
    }
    levels.push_back(
        {{"granularity",
          std::string(GranularityName(static_cast<Granularity>(l)))},
         {"entities", entities}});
  }
  nlohmann::json divergence = nlohmann::json::array();
  for (const auto& [key, nodes] : expected.divergence) {
    nlohmann::json list = nlohmann::json::array();
    for (const CallNode& n : nodes)
      list.push_back({{"script_url", n.script_url}, {"method", n.method}});
    divergence.push_back({{"script_url", key.key},
                          {"method", key.method},
                          {"tracking_only", list}});
  }
  return {{"threshold", expected.threshold},
          {"levels", levels},
          {"residual", expected.residual},
          {"divergence", divergence}};
}

}  // namespace sift
