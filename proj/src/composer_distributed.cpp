#include "cmctd/composer_distributed.hpp"

#include <limits>
#include <memory>

#include "cmctd/error.hpp"
#include "cmctd/parallel.hpp"

namespace cmctd {

void DcConfig::validate(int L) const {
  if (!(eps_connect > 0.0)) throw Error(ErrorKind::kConfig, "eps_connect must be positive");
  if (max_rounds < 1) throw Error(ErrorKind::kConfig, "max_rounds must be >= 1");
  tree.validate(L);
}

std::optional<std::size_t> connection_point(const Plan& plan, std::size_t from, State target, double eps) {
  std::optional<std::size_t> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = from; i < plan.size(); ++i) {
    const double d = distance(plan[i], target);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  if (!best || !(best_d < eps)) return std::nullopt;
  return best;
}

std::size_t try_connect(ConnectivityGraph& graph, const Plan& plan, const ConnectionScan& scan, const Maze& maze) {
  std::size_t changed = 0;
  const auto& vertices = graph.vertices();
  for (std::size_t j = 0; j < vertices.size(); ++j) {
    if (j == scan.tree_vertex || j == scan.goal_vertex) continue;
    const State target = vertices[j];
    auto at = connection_point(plan, scan.scan_from, target, scan.eps_connect);
    if (!at || !segment_collision_free(plan[*at], target, maze)) continue;
    if (graph.add_edge(scan.tree_vertex, j, plan.prefix(*at + 1), scan.eps_connect)) ++changed;
  }
  if (scan.goal_vertex < vertices.size() && scan.goal_vertex != scan.tree_vertex) {
    for (std::size_t i = scan.scan_from; i < plan.size(); ++i) {
      if (distance(plan[i], scan.goal) > scan.eps_goal) continue;
      if (graph.add_edge(scan.tree_vertex, scan.goal_vertex, plan.prefix(i + 1), scan.eps_goal)) ++changed;
      break;
    }
  }
  return changed;
}

ComposerResult run_distributed_composer(const Task& task, const TrajectoryProposer& proposer, const DcConfig& cfg,
                                        std::uint64_t seed, ConnectivityGraph* graph_out) {
  cfg.validate(task.L);
  const Maze& maze = proposer.maze();

  std::vector<State> origins{task.start};
  for (State w : cfg.waypoints) {
    bool duplicate = false;
    for (State o : origins) duplicate = duplicate || o == w;
    if (!duplicate) origins.push_back(w);
  }
  std::vector<State> vertices = origins;
  vertices.push_back(task.goal);
  const std::size_t goal_vertex = origins.size();
  ConnectivityGraph graph(vertices, maze.hash(), cfg.eps_connect);

  std::vector<std::unique_ptr<OnlineSearch>> trees;
  for (std::size_t i = 0; i < origins.size(); ++i) {
    Task local{origins[i], task.goal, task.eps_goal, task.L};
    trees.push_back(std::make_unique<OnlineSearch>(local, proposer, cfg.tree, seed, i));
    if (trees.back()->solution()) graph.add_edge(i, goal_vertex, *trees.back()->solution(), task.eps_goal);
  }

  ComposerResult result;
  auto attempt = [&]() -> bool {
    auto path = shortest_path(graph, 0, goal_vertex);
    if (!path) return false;
    Plan plan = synthesize_plan(graph, *path);
    if (plan.size() > static_cast<std::size_t>(task.L)) return false;
    result.plan = std::move(plan);
    return true;
  };

  const auto finish = [&]() {
    result.expansions = 0;
    for (const auto& t : trees) result.expansions += t->expansions();
    result.graph_edges = graph.edges().size();
    if (graph_out) *graph_out = graph;
    return result;
  };
  if (attempt()) return finish();

  for (int round = 0; round < cfg.max_rounds; ++round) {
    // Each slot is written only by its own tree during the parallel phase.
    std::vector<std::optional<OnlineSearch::Step>> steps(trees.size());
    parallel_for(trees.size(), cfg.workers, [&](std::size_t i) {
      if (trees[i]->expansions() >= static_cast<std::size_t>(cfg.tree.budget)) return;
      steps[i] = trees[i]->step();
    });

    bool any = false;
    for (std::size_t i = 0; i < trees.size(); ++i) {
      if (!steps[i]) continue;
      any = true;
      const SearchTree& tree = trees[i]->tree();
      const PlanNode& node = tree.node(steps[i]->node);
      const std::size_t parent_size = tree.node(*node.parent).plan.size();
      ConnectionScan scan{i, cfg.whole_plan_scan ? 0 : parent_size - 1, cfg.eps_connect, task.eps_goal, goal_vertex,
                          task.goal};
      try_connect(graph, node.plan, scan, maze);
      // A promoted completion hangs below the expanded node.
      for (NodeId c : node.children) {
        ConnectionScan promoted = scan;
        promoted.scan_from = node.plan.size() - 1;
        try_connect(graph, tree.node(c).plan, promoted, maze);
      }
    }
    if (attempt()) return finish();
    if (!any) break;
  }
  return finish();
}

}  // namespace cmctd
