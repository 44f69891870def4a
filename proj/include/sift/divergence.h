#ifndef SIFT_DIVERGENCE_H_
#define SIFT_DIVERGENCE_H_

#include <compare>
#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sift/sifter.h"
#include "sift/stack_attribution.h"

namespace sift {

// A (script, method) pair in a merged call graph.
struct CallNode {
  std::string script_url;
  std::string method;

  auto operator<=>(const CallNode&) const = default;
  bool operator==(const CallNode&) const = default;
};

enum class Participation { kTrackingOnly, kFunctionalOnly, kBoth };

std::string_view ParticipationName(Participation p);

// Frames are most-recent-first, as in RequestRecord::call_stack.
struct LabeledStack {
  Label label = Label::kFunctional;
  std::vector<StackFrame> frames;
};

struct CallGraph {
  std::map<CallNode, Participation> nodes;
  std::set<std::pair<CallNode, CallNode>> edges;  // caller -> callee
  std::set<CallNode> roots;                       // outermost frames
};

CallGraph BuildCallGraph(std::span<const LabeledStack> stacks,
                         bool positional_identity = false);

// Tracking-only nodes ordered by shortest distance from any root, then by
// (script_url, method).
std::vector<CallNode> PointsOfDivergence(const CallGraph& graph);

struct ReplayOutcome {
  std::size_t tracking_stacks = 0;
  std::size_t tracking_removed = 0;
  std::size_t functional_stacks = 0;
  std::size_t functional_removed = 0;
};

// Drops every stack that passes through one of |nodes| and counts what was
// removed.
ReplayOutcome ReplayRemoval(std::span<const LabeledStack> stacks,
                            std::span<const CallNode> nodes,
                            bool positional_identity = false);

struct MethodDivergence {
  EntityKey method;
  std::vector<LabeledStack> stacks;
  CallGraph graph;
  std::vector<CallNode> divergence;
  // Replay through the first divergence node. Without one nothing is
  // removed but the stacks are still counted.
  ReplayOutcome replay;
};

// Runs the analysis for every Mixed method of |result|, merging only the
// stacks of requests attributed to that method. Sorted by method key.
std::vector<MethodDivergence> AnalyzeMixedMethods(
    const std::vector<LabeledRecord>& records, const SiftResult& result,
    bool positional_identity = false);

}  // namespace sift

#endif  // SIFT_DIVERGENCE_H_
