#ifndef SIFT_TESTS_ORACLES_FILTER_CORPUS_H_
#define SIFT_TESTS_ORACLES_FILTER_CORPUS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "regex_oracle.h"

namespace oracle {

struct Triple {
  std::string rule;
  OracleRequest request;
};

// Random (rule, URL, context) triples covering every anchor, the
// separator and wildcard, and each supported option. Requests are biased
// toward the rule's literals so that a good share of triples match.
std::vector<Triple> FilterCorpus(std::uint64_t seed, std::size_t count);

}  // namespace oracle

#endif  // SIFT_TESTS_ORACLES_FILTER_CORPUS_H_
