#pragma once

#include <cstdint>
#include <vector>

#include "cmctd/composer_online.hpp"
#include "cmctd/plan_graph.hpp"

namespace cmctd {

struct PcBuildConfig {
  std::vector<State> waypoints;
  int pair_budget = 20;
  int pair_depth = 2;
  double eps_stitch = 0.5;
  /// Proposer and guidance settings of the per-pair searches; budget and
  /// depth come from the fields above.
  OcConfig search;
  bool retry_failed = true;
  std::size_t workers = 1;

  void validate() const;
};

struct PcBuildStats {
  std::size_t pairs = 0;
  std::size_t edges = 0;
  std::size_t expansions = 0;
};

/// One OC run per ordered waypoint pair, pulled toward s_j and stopping in its
/// eps_stitch ball; each success becomes edge i -> j. A failed pair is retried
/// once with a fresh seed. Pairs share no state and may run in parallel.
ConnectivityGraph build_plan_graph(const TrajectoryProposer& proposer, const PcBuildConfig& cfg, std::uint64_t seed,
                                   PcBuildStats* stats = nullptr);

struct PcInferConfig {
  /// L': state limit of a local connection; 0 means 2 * h_plan.
  int local_horizon = 0;
  int local_budget = 5;
  int local_depth = 2;
  /// Connections kept per side; nearest candidates are tried first.
  int max_local_links = 3;
  /// Hard cap on local search expansions per query.
  int max_query_expansions = 40;
  OcConfig search;

  int horizon() const { return local_horizon > 0 ? local_horizon : 2 * search.proposer.h_plan; }
  void validate(int L) const;
};

/// Joins start and goal to a working copy of `graph` with short local OC
/// runs toward waypoints within L' * v_max, then synthesizes the shortest
/// start -> goal path. Success when the plan holds at most L states. Throws
/// Error{kMazeHashMismatch} for a graph built on another maze.
ComposerResult run_preplan_inference(const Task& task, const TrajectoryProposer& proposer,
                                     const ConnectivityGraph& graph, const PcInferConfig& cfg, std::uint64_t seed,
                                     ConnectivityGraph* working_out = nullptr);

}  // namespace cmctd
