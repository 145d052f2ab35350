#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "cmctd/plan.hpp"
#include "cmctd/plan_cache.hpp"
#include "cmctd/proposer.hpp"
#include "cmctd/search_tree.hpp"

namespace cmctd {

struct OcConfig {
  int budget = 200;  // B: max expansions
  ProposerConfig proposer;
  GuidanceSet guidance_set = GuidanceSet::defaults();
  TreeParams tree;
  bool fast_replanning = true;
  /// Turn a goal-reaching fast completion into a terminal child (at most
  /// once per expansion).
  bool promote_completions = false;

  /// Throws Error{kConfig}; `L` is the horizon the config will run under.
  void validate(int L) const;
};

/// Optional plan reuse around expansion calls.
struct CacheHook {
  PlanCache* cache = nullptr;
  std::string context;
  double eps_cache = 0.5;
};

struct ComposerResult {
  std::optional<Plan> plan;
  std::size_t expansions = 0;
  std::optional<std::size_t> graph_edges;
  std::size_t cache_hits = 0;

  bool success() const { return plan.has_value(); }
};

/// One plan-level search tree driven a step at a time; shared by all three
/// composers. Step seeds derive from (seed, tree_id, new node id).
class OnlineSearch {
 public:
  OnlineSearch(const Task& task, const TrajectoryProposer& proposer, const OcConfig& cfg, std::uint64_t seed,
               std::uint64_t tree_id = 0, std::optional<GuidanceTarget> target = std::nullopt, CacheHook cache = {});

  struct Step {
    NodeId node = 0;
    double reward = 0.0;
    bool goal_reached = false;
  };

  /// select -> expand -> simulate -> backpropagate. nullopt once the tree
  /// has no expandable node.
  std::optional<Step> step();

  const SearchTree& tree() const { return tree_; }
  std::size_t expansions() const { return expansions_; }
  std::size_t cache_hits() const { return cache_hits_; }
  /// Prefix up to the first goal hit of the first node that reached the goal
  /// inside the horizon.
  const std::optional<Plan>& solution() const { return solution_; }

 private:
  bool record_if_solved(NodeId id);

  Task task_;
  const TrajectoryProposer* proposer_;
  OcConfig cfg_;
  std::uint64_t seed_;
  std::uint64_t tree_id_;
  ExpansionContext ctx_;
  CacheHook cache_;
  SearchTree tree_;
  std::size_t expansions_ = 0;
  std::size_t cache_hits_ = 0;
  std::optional<Plan> solution_;
};

/// Budgeted plan-level tree search from task.start until a node reaches the
/// goal ball. Failure is a result, not an error.
ComposerResult run_online_composer(const Task& task, const TrajectoryProposer& proposer, const OcConfig& cfg,
                                   std::uint64_t seed, std::optional<GuidanceTarget> target = std::nullopt,
                                   CacheHook cache = {});

}  // namespace cmctd
