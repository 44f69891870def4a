// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failures, so ctest reports any failing criterion.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "filter_corpus.h"
#include "reference_sifter.h"
#include "regex_oracle.h"
#include "sift/commands.h"
#include "sift/divergence.h"
#include "sift/report.h"
#include "support.h"

namespace fs = std::filesystem;
using sift::Granularity;
using sift::Verdict;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void Fail(const std::string& why) {
    if (pass)
      detail = why;
    pass = false;
  }
};

using Clock = std::chrono::steady_clock;

int failures = 0;

void Criterion(const std::string& name, double budget_seconds,
               const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto start = Clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.Fail(std::string("exception: ") + e.what());
  }
  const double seconds =
      std::chrono::duration<double>(Clock::now() - start).count();
  if (budget_seconds > 0 && seconds >= budget_seconds)
    out.Fail("took " + std::to_string(seconds) + " s, budget " +
             std::to_string(budget_seconds) + " s");
  char timing[64];
  std::snprintf(timing, sizeof timing, "%.3f s", seconds);
  std::printf("%s %s (%s)%s%s\n", out.pass ? "PASS" : "FAIL", name.c_str(),
              timing, out.detail.empty() ? "" : ": ", out.detail.c_str());
  std::fflush(stdout);
  failures += !out.pass;
}

sift::SynthOutput SynthScenario(const std::string& relative) {
  return sift::Generate(testing::LoadScenario(relative), 1,
                        &testing::FixturePsl());
}

bool EndsWith(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Finds the entity whose key (or method name at method level) is |name|,
// or whose script URL ends in "/name".
const sift::EntityStats* FindEntity(const sift::LevelResult& level,
                                    const std::string& name) {
  for (const sift::EntityStats& e : level.entities) {
    if (level.granularity == Granularity::kMethod ? e.key.method == name
        : level.granularity == Granularity::kScript
            ? EndsWith(e.key.key, "/" + name)
            : e.key.key == name)
      return &e;
  }
  return nullptr;
}

void TableOneOracle(Outcome& out) {
  const std::vector<sift::LevelCounts> counts = {
      {"domain", 755784, 566810, 1129109, 0},
      {"hostname", 161604, 106542, 860963, 0},
      {"script", 235157, 490295, 135511, 0},
      {"method", 23819, 74223, 37469, 0},
  };
  const double separation[] = {54, 24, 84, 72};
  const double cumulative[] = {54, 65, 94, 98};
  auto rows = sift::RequestTable(counts);
  if (rows.size() != 4)
    return out.Fail("expected 4 rows");
  for (std::size_t i = 0; i < 4; ++i) {
    if (!rows[i].separation || !rows[i].cumulative)
      return out.Fail(counts[i].level + ": undefined factor");
    const double s = 100 * *rows[i].separation;
    const double c = 100 * *rows[i].cumulative;
    if (std::abs(s - separation[i]) > 1 || std::abs(c - cumulative[i]) > 1)
      return out.Fail(counts[i].level + ": got " + std::to_string(s) + "/" +
                      std::to_string(c));
  }
}

void FigureOne(Outcome& out) {
  auto synth = SynthScenario("scenarios/fig1.scenario");
  const auto& psl = testing::FixturePsl();
  auto result = sift::Sift(testing::LabelSynth(synth, psl), psl, {2.0});
  const std::vector<std::pair<std::string, Verdict>> want[] = {
      {{"ads.com", Verdict::kTracking},
       {"news.com", Verdict::kFunctional},
       {"google.com", Verdict::kMixed}},
      {{"ad.google.com", Verdict::kTracking},
       {"maps.google.com", Verdict::kFunctional},
       {"cdn.google.com", Verdict::kMixed}},
      {{"sdk.js", Verdict::kTracking},
       {"stack.js", Verdict::kFunctional},
       {"clone.js", Verdict::kMixed}},
      {{"m1", Verdict::kTracking},
       {"m3", Verdict::kFunctional},
       {"m2", Verdict::kMixed}},
  };
  for (std::size_t l = 0; l < 4; ++l) {
    const auto& level = result.levels[l];
    if (level.entities.size() != want[l].size())
      return out.Fail(std::string(sift::GranularityName(level.granularity)) +
                      ": " + std::to_string(level.entities.size()) +
                      " entities");
    for (const auto& [name, verdict] : want[l]) {
      const sift::EntityStats* e = FindEntity(level, name);
      if (!e)
        return out.Fail(name + " missing");
      if (e->verdict != verdict)
        return out.Fail(name + " is " + std::string(sift::VerdictName(e->verdict)));
    }
  }
}

void FilterOracle(Outcome& out) {
  const auto& psl = testing::FixturePsl();
  const auto corpus = oracle::FilterCorpus(20240, 12000);
  std::size_t compared = 0, skipped = 0, disagreements = 0;
  for (const auto& t : corpus) {
    std::string reason;
    auto rule = sift::ParseFilterRule(t.rule, reason);
    auto expected = oracle::RegexMatch(t.rule, t.request);
    if (!rule || !expected) {
      ++skipped;
      continue;
    }
    auto parts = sift::DecomposeUrl(t.request.url, psl);
    auto ctx = sift::MakeRequestContext(
        parts, t.request.page_domain,
        *sift::ParseResourceType(t.request.resource_type));
    ++compared;
    if (sift::MatchRule(*rule, ctx) != *expected) {
      if (disagreements++ == 0)
        out.Fail("disagree on " + t.rule + " vs " + t.request.url);
    }
  }
  if (compared < 10000)
    out.Fail("only " + std::to_string(compared) + " triples comparable");
  if (disagreements)
    out.detail += " (" + std::to_string(disagreements) + " disagreements)";
  else
    out.detail = std::to_string(compared) + " triples agree, " +
                 std::to_string(skipped) + " outside the grammar";
}

void PslConformance(Outcome& out) {
  const auto& psl = testing::FixturePsl();
  std::size_t checked = 0, skipped = 0;
  for (const auto& c : testing::LoadPslCases()) {
    if (!c.input) {  // null input: there is no host to decompose
      ++skipped;
      continue;
    }
    ++checked;
    if (psl.RegistrableDomain(*c.input) != c.expected)
      out.Fail("line " + std::to_string(c.line) + ": " + *c.input);
  }
  if (checked < 60)
    out.Fail("only " + std::to_string(checked) + " cases loaded");
  if (out.pass)
    out.detail = std::to_string(checked) + " cases, " + std::to_string(skipped) +
                 " null-input skipped";
}

struct RandomRun {
  sift::SynthOutput synth;
  std::vector<sift::LabeledRecord> labeled;
  sift::SiftResult result;
};

const std::vector<RandomRun>& RandomRuns() {
  static const std::vector<RandomRun> runs = [] {
    const auto& psl = testing::FixturePsl();
    std::vector<RandomRun> v;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      RandomRun r;
      r.synth = sift::Generate(sift::RandomScenario(seed, 200), seed, &psl);
      r.labeled = testing::LabelSynth(r.synth, psl);
      r.result = sift::Sift(r.labeled, psl);
      v.push_back(std::move(r));
    }
    return v;
  }();
  return runs;
}

void Invariants(Outcome& out) {
  const auto& psl = testing::FixturePsl();
  std::uint64_t seed = 0;
  for (const RandomRun& run : RandomRuns()) {
    ++seed;
    const std::string tag = "seed " + std::to_string(seed) + ": ";
    if (run.synth.records.size() > 200)
      out.Fail(tag + "trace exceeds 200 requests");
    if (auto why = testing::CheckInvariants(run.result); !why.empty())
      out.Fail(tag + why);
    auto ref = oracle::ReferenceSift(run.labeled, psl, run.result.threshold);
    for (std::size_t l = 0; l < 4; ++l) {
      if (testing::LevelEntities(run.result, l) != ref.levels[l])
        out.Fail(tag + "reference disagrees at level " + std::to_string(l));
    }
    if (testing::SortedResidual(run.result) != ref.residual)
      out.Fail(tag + "reference residual differs");
  }
}

void Monotonicity(Outcome& out) {
  const auto grid = sift::ParseGrid("1.0:3.0:0.1");
  std::uint64_t seed = 0;
  for (const RandomRun& run : RandomRuns()) {
    ++seed;
    for (Granularity g : sift::kAllGranularities) {
      auto points = sift::Sweep(run.result, g, grid);
      for (std::size_t i = 1; i < points.size(); ++i) {
        if (!std::includes(points[i].mixed.begin(), points[i].mixed.end(),
                           points[i - 1].mixed.begin(),
                           points[i - 1].mixed.end()))
          out.Fail("seed " + std::to_string(seed) + " at tau " +
                   std::to_string(points[i].threshold));
      }
    }
  }
}

void FigureFour(Outcome& out) {
  auto synth = SynthScenario("scenarios/fig4.scenario");
  const auto& psl = testing::FixturePsl();
  auto labeled = testing::LabelSynth(synth, psl);
  auto result = sift::Sift(labeled, psl);
  auto methods = sift::AnalyzeMixedMethods(labeled, result);
  if (methods.size() != 1)
    return out.Fail(std::to_string(methods.size()) + " mixed methods");
  const auto& m = methods.front();
  if (m.divergence.empty())
    return out.Fail("no point of divergence");
  const sift::CallNode& first = m.divergence.front();
  if (!EndsWith(first.script_url, "/track.js") || first.method != "t")
    return out.Fail("first point is " + first.script_url + " " + first.method);
  std::vector<sift::CallNode> nodes = {first};
  auto replay = sift::ReplayRemoval(m.stacks, nodes);
  if (replay.tracking_stacks == 0 ||
      replay.tracking_removed != replay.tracking_stacks)
    out.Fail("replay removed " + std::to_string(replay.tracking_removed) +
             " of " + std::to_string(replay.tracking_stacks) +
             " tracking stacks");
  if (replay.functional_removed != 0)
    out.Fail("replay removed functional stacks");
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("sift_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  fs::path path_;
};

void Determinism(Outcome& out) {
  TempDir dir;
  const auto& psl = testing::FixturePsl();
  auto synth =
      sift::Generate(sift::RandomScenario(4242, 200), 4242, &psl);
  std::ofstream(dir / "trace.jsonl") << synth.TraceText();
  std::ofstream(dir / "filters.txt") << synth.filter_list;
  auto fig1 = SynthScenario("scenarios/fig1.scenario");
  std::ofstream(dir / "fig1.jsonl") << fig1.TraceText();
  std::ofstream(dir / "fig1.txt") << fig1.filter_list;

  sift::RunOptions options;
  options.inputs.traces = {dir / "trace.jsonl", dir / "fig1.jsonl"};
  options.inputs.filters = {dir / "filters.txt", dir / "fig1.txt"};
  options.inputs.psl =
      testing::SourcePath("tests/fixtures/public_suffix_list.dat");
  options.jobs = 1;
  auto a = sift::RunClassify(options);
  auto b = sift::RunClassify(options);
  options.jobs = 8;
  auto c = sift::RunClassify(options);
  std::size_t json_files = 0;
  for (const auto& [name, bytes] : a.files) {
    if (b.files.at(name) != bytes)
      out.Fail(name + " differs between identical runs");
    if (c.files.at(name) != bytes)
      out.Fail(name + " differs between 1 and 8 jobs");
    json_files += EndsWith(name, ".json");
  }
  if (json_files < 2)
    out.Fail("no JSON outputs produced");
  if (out.pass)
    out.detail = std::to_string(a.files.size()) + " output files identical";
}

}  // namespace

int main() {
  Criterion("table-1 arithmetic oracle", 1.0, TableOneOracle);
  Criterion("fig-1 end-to-end verdicts", 1.0, FigureOne);
  Criterion("filter engine agrees with regex oracle", 30.0, FilterOracle);
  Criterion("public suffix list conformance", 0, PslConformance);
  Criterion("invariants and reference agreement on 100 scenarios", 0,
            Invariants);
  Criterion("threshold monotonicity on 100 scenarios", 0, Monotonicity);
  Criterion("fig-4 divergence and replay", 0, FigureFour);
  Criterion("deterministic outputs across runs and job counts", 0,
            Determinism);
  return failures;
}
