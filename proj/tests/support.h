#ifndef SIFT_TESTS_SUPPORT_H_
#define SIFT_TESTS_SUPPORT_H_

// Shared fixtures and comparison helpers for the unit and acceptance tests.

#include <fstream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "reference_sifter.h"
#include "sift/filter_engine.h"
#include "sift/pipeline.h"
#include "sift/sifter.h"
#include "sift/synth.h"
#include "sift/url.h"

namespace testing {

inline std::string SourcePath(const std::string& relative) {
  return std::string(SIFT_SOURCE_DIR) + "/" + relative;
}

inline std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline const sift::PublicSuffixList& FixturePsl() {
  static const sift::PublicSuffixList psl = sift::PublicSuffixList::LoadFile(
      SourcePath("tests/fixtures/public_suffix_list.dat"));
  return psl;
}

struct PslCase {
  std::size_t line = 0;
  std::optional<std::string> input;
  std::optional<std::string> expected;
};

// checkPublicSuffix('host', 'expected'|null) lines of the reference file.
inline std::vector<PslCase> LoadPslCases() {
  std::ifstream in(SourcePath("tests/fixtures/test_psl.txt"));
  static const std::regex call(
      R"re(checkPublicSuffix\((null|'([^']*)'),\s*(null|'([^']*)')\);)re");
  std::vector<PslCase> cases;
  std::string text;
  for (std::size_t n = 1; std::getline(in, text); ++n) {
    std::smatch m;
    if (text.rfind("//", 0) == 0 || !std::regex_search(text, m, call))
      continue;
    PslCase c;
    c.line = n;
    if (m[1] != "null")
      c.input = m[2].str();
    if (m[3] != "null")
      c.expected = m[4].str();
    cases.push_back(std::move(c));
  }
  return cases;
}

inline sift::Scenario LoadScenario(const std::string& relative) {
  std::ifstream in(SourcePath(relative));
  return sift::ParseScenario(in);
}

// Labels a synthetic trace with its own generated filter list.
inline std::vector<sift::LabeledRecord> LabelSynth(
    const sift::SynthOutput& synth, const sift::PublicSuffixList& psl,
    unsigned jobs = 1) {
  std::istringstream list(synth.filter_list);
  sift::RuleSet rules(sift::ParseFilterList(list, "synth").rules);
  return sift::LabelRecords(synth.records, rules, psl, jobs);
}

inline oracle::RefEntity ToRef(const sift::EntityStats& e) {
  return {e.key.key, e.key.method, e.tracking_count, e.functional_count,
          std::string(sift::VerdictName(e.verdict))};
}

inline oracle::RefEntity ToRef(const sift::ExpectedEntity& e) {
  return {e.key.key, e.key.method, e.tracking, e.functional,
          std::string(sift::VerdictName(e.verdict))};
}

inline std::vector<oracle::RefEntity> LevelEntities(
    const sift::SiftResult& result, std::size_t level) {
  std::vector<oracle::RefEntity> out;
  for (const sift::EntityStats& e : result.levels[level].entities)
    out.push_back(ToRef(e));
  return out;
}

inline std::vector<oracle::RefEntity> ExpectedEntities(
    const sift::ExpectedOutcome& expected, std::size_t level) {
  std::vector<oracle::RefEntity> out;
  for (const sift::ExpectedEntity& e : expected.levels[level])
    out.push_back(ToRef(e));
  return out;
}

inline std::vector<std::string> SortedResidual(const sift::SiftResult& r) {
  std::vector<std::string> ids = r.residual;
  std::sort(ids.begin(), ids.end());
  return ids;
}

// Partition and flow conservation. Returns an empty string when both
// hold, otherwise what broke.
inline std::string CheckInvariants(const sift::SiftResult& r) {
  std::ostringstream why;
  std::size_t flowing = r.total_requests;
  for (const sift::LevelResult& level : r.levels) {
    const std::string name(sift::GranularityName(level.granularity));
    if (level.entering != flowing)
      why << name << ": entering " << level.entering << " != " << flowing
          << "; ";
    if (level.tracking_requests + level.functional_requests +
            level.mixed_requests + level.unkeyed_requests !=
        level.entering)
      why << name << ": partition does not sum to input; ";
    std::uint64_t t = 0, f = 0, m = 0;
    for (const sift::EntityStats& e : level.entities) {
      const std::uint64_t n = e.tracking_count + e.functional_count;
      (e.verdict == sift::Verdict::kTracking     ? t
       : e.verdict == sift::Verdict::kFunctional ? f
                                                 : m) += n;
    }
    if (t != level.tracking_requests || f != level.functional_requests ||
        m != level.mixed_requests)
      why << name << ": entity totals disagree with request counts; ";
    flowing = level.mixed_requests;
  }
  const auto& last = r.levels.back();
  std::size_t unkeyed = 0;
  for (const sift::LevelResult& level : r.levels)
    unkeyed += level.unkeyed_requests;
  if (r.residual.size() != last.mixed_requests + unkeyed)
    why << "residual " << r.residual.size() << " != mixed methods + unkeyed; ";
  return why.str();
}

}  // namespace testing

#endif  // SIFT_TESTS_SUPPORT_H_
