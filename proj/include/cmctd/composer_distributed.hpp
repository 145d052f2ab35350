#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cmctd/composer_online.hpp"
#include "cmctd/plan_graph.hpp"

namespace cmctd {

struct DcConfig {
  /// Extra origins; task.start is always origin 0 and duplicates are dropped.
  std::vector<State> waypoints;
  double eps_connect = 0.5;
  int max_rounds = 100;
  OcConfig tree;
  /// Scan the whole stitched plan instead of only the newest segment.
  bool whole_plan_scan = false;
  std::size_t workers = 1;

  void validate(int L) const;
};

/// Index of the state in plan[from, end) closest to target when that
/// distance is strictly below eps; the earliest index wins ties.
std::optional<std::size_t> connection_point(const Plan& plan, std::size_t from, State target, double eps);

struct ConnectionScan {
  std::size_t tree_vertex = 0;
  std::size_t scan_from = 0;
  double eps_connect = 0.5;
  double eps_goal = 0.5;
  std::size_t goal_vertex = 0;
  State goal;
};

/// Adds the edges a newly expanded node's plan offers: tree_vertex -> j for
/// every origin j the scanned states pass strictly within eps_connect of
/// (plan cut at the closest state, bridge to s_j collision-free), and
/// tree_vertex -> goal_vertex when the plan enters the goal ball (cut at the
/// first hit). The goal vertex is never a connection target. Returns the
/// number of edges added or improved.
std::size_t try_connect(ConnectivityGraph& graph, const Plan& plan, const ConnectionScan& scan, const Maze& maze);

/// Origins = {task.start} + waypoints, one tree per origin pulled toward the
/// goal; each round every tree takes one step, new edges merge at the round
/// barrier in tree order, then the shortest start->goal path is synthesized.
/// Returns the first synthesized plan of at most L states.
ComposerResult run_distributed_composer(const Task& task, const TrajectoryProposer& proposer, const DcConfig& cfg,
                                        std::uint64_t seed, ConnectivityGraph* graph_out = nullptr);

}  // namespace cmctd
