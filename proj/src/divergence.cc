#include "sift/divergence.h"

#include <algorithm>
#include <deque>
#include <unordered_map>

namespace sift {

namespace {

CallNode NodeFor(const StackFrame& frame, bool positional_identity) {
  return {frame.script_url, MethodName(frame, positional_identity)};
}

Participation Merge(Participation a, Participation b) {
  return a == b ? a : Participation::kBoth;
}

}  // namespace

std::string_view ParticipationName(Participation p) {
  switch (p) {
    case Participation::kTrackingOnly:
      return "TrackingOnly";
    case Participation::kFunctionalOnly:
      return "FunctionalOnly";
    case Participation::kBoth:
      break;
  }
  return "Both";
}

CallGraph BuildCallGraph(std::span<const LabeledStack> stacks,
                         bool positional_identity) {
  CallGraph graph;
  for (const LabeledStack& stack : stacks) {
    if (stack.frames.empty())
      continue;
    const Participation tag = stack.label == Label::kTracking
                                  ? Participation::kTrackingOnly
                                  : Participation::kFunctionalOnly;
    std::vector<CallNode> nodes;
    nodes.reserve(stack.frames.size());
    for (const StackFrame& frame : stack.frames)
      nodes.push_back(NodeFor(frame, positional_identity));
    for (const CallNode& node : nodes) {
      auto [it, inserted] = graph.nodes.emplace(node, tag);
      if (!inserted)
        it->second = Merge(it->second, tag);
    }
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
      graph.edges.emplace(nodes[i + 1], nodes[i]);
    graph.roots.insert(nodes.back());
  }
  return graph;
}

std::vector<CallNode> PointsOfDivergence(const CallGraph& graph) {
  std::map<CallNode, std::vector<const CallNode*>> callees;
  for (const auto& [caller, callee] : graph.edges)
    callees[caller].push_back(&callee);

  std::map<CallNode, std::size_t> distance;
  std::deque<const CallNode*> queue;
  for (const CallNode& root : graph.roots) {
    distance.emplace(root, 0);
    queue.push_back(&root);
  }
  while (!queue.empty()) {
    const CallNode* node = queue.front();
    queue.pop_front();
    std::size_t next = distance.at(*node) + 1;
    auto it = callees.find(*node);
    if (it == callees.end())
      continue;
    for (const CallNode* callee : it->second) {
      if (distance.emplace(*callee, next).second)
        queue.push_back(callee);
    }
  }

  std::vector<std::pair<std::size_t, CallNode>> ranked;
  for (const auto& [node, tag] : graph.nodes) {
    if (tag != Participation::kTrackingOnly)
      continue;
    auto it = distance.find(node);
    std::size_t d = it == distance.end() ? SIZE_MAX : it->second;
    ranked.emplace_back(d, node);
  }
  std::sort(ranked.begin(), ranked.end());
  std::vector<CallNode> out;
  out.reserve(ranked.size());
  for (auto& [d, node] : ranked)
    out.push_back(std::move(node));
  return out;
}

ReplayOutcome ReplayRemoval(std::span<const LabeledStack> stacks,
                            std::span<const CallNode> nodes,
                            bool positional_identity) {
  std::set<CallNode> removed(nodes.begin(), nodes.end());
  ReplayOutcome outcome;
  for (const LabeledStack& stack : stacks) {
    bool hit = std::any_of(
        stack.frames.begin(), stack.frames.end(), [&](const StackFrame& f) {
          return removed.count(NodeFor(f, positional_identity)) > 0;
        });
    if (stack.label == Label::kTracking) {
      ++outcome.tracking_stacks;
      outcome.tracking_removed += hit;
    } else {
      ++outcome.functional_stacks;
      outcome.functional_removed += hit;
    }
  }
  return outcome;
}

std::vector<MethodDivergence> AnalyzeMixedMethods(
    const std::vector<LabeledRecord>& records, const SiftResult& result,
    bool positional_identity) {
  std::vector<MethodDivergence> out;
  if (result.levels.size() <= static_cast<std::size_t>(Granularity::kMethod))
    return out;
  const LevelResult& level = result.level(Granularity::kMethod);

  std::map<EntityKey, std::size_t> slot;
  for (const EntityStats& e : level.entities) {
    if (e.verdict != Verdict::kMixed)
      continue;
    slot.emplace(e.key, out.size());
    out.push_back({e.key, {}, {}, {}, {}});
  }
  if (out.empty())
    return out;

  for (const LabeledRecord& r : records) {
    auto attributed = level.attribution.find(r.record.request_id);
    if (attributed == level.attribution.end())
      continue;
    auto it = slot.find(attributed->second);
    if (it == slot.end())
      continue;
    out[it->second].stacks.push_back({r.label, r.record.call_stack});
  }

  for (MethodDivergence& m : out) {
    m.graph = BuildCallGraph(m.stacks, positional_identity);
    m.divergence = PointsOfDivergence(m.graph);
    if (!m.divergence.empty()) {
      m.replay = ReplayRemoval(m.stacks, std::span(m.divergence).first(1),
                               positional_identity);
    } else {
      m.replay = ReplayRemoval(m.stacks, {}, positional_identity);
    }
  }
  return out;
}

}  // namespace sift
