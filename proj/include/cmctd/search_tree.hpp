#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "cmctd/plan.hpp"
#include "cmctd/proposer.hpp"

namespace cmctd {

using NodeId = std::size_t;

struct PlanNode {
  NodeId id = 0;
  std::optional<NodeId> parent;
  Plan plan;
  int depth = 0;  // stitched segments
  std::uint64_t visits = 0;
  double value_sum = 0.0;
  /// Simulations started at this node (not at a descendant).
  std::uint64_t simulations = 0;
  GuidanceSet guidance_set;
  std::vector<NodeId> children;
  bool terminal = false;
  std::optional<std::size_t> goal_hit;
};

struct TreeParams {
  double c_uct = 1.4142135623730951;
  int branching = 2;
  int max_depth = 10;
};

/// Plan-level search tree. Single writer; node ids are insertion order.
class SearchTree {
 public:
  SearchTree(State root_state, GuidanceSet guidance_set, TreeParams params);

  const PlanNode& node(NodeId id) const { return nodes_.at(id); }
  const std::vector<PlanNode>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  NodeId root() const { return 0; }
  const TreeParams& params() const { return params_; }

  /// Node with room for another child below max depth and not terminal.
  bool can_expand(NodeId id) const;
  /// True when some node in the subtree can still be expanded.
  bool subtree_open(NodeId id) const { return open_.at(id); }

  /// Appends a child whose plan is stitch(parent.plan, segment); the
  /// stitched overload takes a plan that already extends the parent's.
  /// A child is terminal once its plan reaches the goal ball.
  NodeId add_child(NodeId parent, const Plan& segment, const ScoringTask& task);
  NodeId add_stitched_child(NodeId parent, Plan stitched, const ScoringTask& task);

  void record_simulation(NodeId id) { ++nodes_.at(id).simulations; }
  /// N += 1 and W += reward on `id` and every ancestor.
  void backpropagate(NodeId id, double reward);

  double uct_score(NodeId child) const;

  /// Line-oriented dump: "node id parent visits value depth terminal x y".
  void dump(std::ostream& out) const;

 private:
  void refresh_open(NodeId from);

  std::vector<PlanNode> nodes_;
  std::vector<bool> open_;
  TreeParams params_;
};

/// Descends by UCT (unvisited children first, lowest id on ties) skipping
/// closed subtrees; returns the first expandable node. Throws
/// Error{kSaturated} when nothing can be expanded.
NodeId select_uct(const SearchTree& tree);

struct ExpansionContext {
  const TrajectoryProposer* proposer = nullptr;
  const ProposerConfig* proposer_cfg = nullptr;
  GuidanceTarget target;
  ScoringTask task;
  bool fast_replanning = true;
};

/// Best-of-N from the node's terminal state with the node's guidance set;
/// the child inherits the set. Throws Error{kSaturated}/{kDepthLimit}.
NodeId expand(SearchTree& tree, NodeId id, const ExpansionContext& ctx, std::uint64_t seed);

struct SimulationResult {
  double reward = 0.0;
  Plan completed;
};

/// Scores the node's plan to the task horizon. A plan that already hits the
/// goal at t scores (H - t) / H; otherwise it is fast-completed first unless
/// fast replanning is off.
SimulationResult simulate(const SearchTree& tree, NodeId id, const ExpansionContext& ctx, std::uint64_t seed);

inline void backpropagate(SearchTree& tree, NodeId id, double reward) { tree.backpropagate(id, reward); }

}  // namespace cmctd
