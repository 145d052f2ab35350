#include "cmctd/composer_preplan.hpp"

#include <algorithm>
#include <limits>

#include "cmctd/error.hpp"
#include "cmctd/parallel.hpp"
#include "cmctd/rng.hpp"

namespace cmctd {

namespace {

OcConfig local_search(const OcConfig& base, int budget, int depth) {
  OcConfig cfg = base;
  cfg.budget = budget;
  cfg.tree.max_depth = depth;
  cfg.promote_completions = false;
  return cfg;
}

// Plan from `from` whose end lies within tol of `to` with a collision-free
// closing gap, or nullopt.
std::optional<Plan> connect(const TrajectoryProposer& proposer, OcConfig cfg, State from, State to, double tol, int L,
                            GuidanceTarget target, std::uint64_t seed, std::size_t& expansions,
                            std::size_t budget_cap = std::numeric_limits<std::size_t>::max()) {
  if (budget_cap == 0) return std::nullopt;
  cfg.budget = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(cfg.budget), budget_cap));
  ComposerResult r = run_online_composer(Task{from, to, tol, L}, proposer, cfg, seed, target);
  expansions += r.expansions;
  if (!r.plan || !segment_collision_free(r.plan->back(), to, proposer.maze())) return std::nullopt;
  return r.plan;
}

}  // namespace

void PcBuildConfig::validate() const {
  if (waypoints.size() < 2) throw Error(ErrorKind::kConfig, "plan graph build needs at least 2 waypoints");
  if (pair_budget < 1) throw Error(ErrorKind::kConfig, "pair_budget must be >= 1");
  if (pair_depth < 1) throw Error(ErrorKind::kConfig, "pair_depth must be >= 1");
  if (!(eps_stitch > 0.0)) throw Error(ErrorKind::kConfig, "eps_stitch must be positive");
  local_search(search, pair_budget, pair_depth).validate(pair_depth * search.proposer.h_plan + 1);
}

ConnectivityGraph build_plan_graph(const TrajectoryProposer& proposer, const PcBuildConfig& cfg, std::uint64_t seed,
                                   PcBuildStats* stats) {
  cfg.validate();
  const Maze& maze = proposer.maze();
  for (State w : cfg.waypoints)
    if (!maze.is_valid(w)) throw Error(ErrorKind::kContract, "waypoint outside free space");

  const std::size_t n = cfg.waypoints.size();
  const OcConfig pair_cfg = local_search(cfg.search, cfg.pair_budget, cfg.pair_depth);
  const int pair_L = cfg.pair_depth * cfg.search.proposer.h_plan + 1;

  struct PairResult {
    std::optional<Plan> plan;
    std::size_t expansions = 0;
  };
  std::vector<PairResult> results(n * n);
  parallel_for(n * n, cfg.workers, [&](std::size_t k) {
    const std::size_t i = k / n;
    const std::size_t j = k % n;
    if (i == j) return;
    const State to = cfg.waypoints[j];
    PairResult& out = results[k];
    const int attempts = cfg.retry_failed ? 2 : 1;
    for (int a = 0; a < attempts && !out.plan; ++a) {
      out.plan = connect(proposer, pair_cfg, cfg.waypoints[i], to, cfg.eps_stitch, pair_L, GuidanceTarget::waypoint(to),
                         derive_seed(seed, {i, j, static_cast<std::uint64_t>(a)}), out.expansions);
    }
  });

  ConnectivityGraph graph(cfg.waypoints, maze.hash(), cfg.eps_stitch);
  PcBuildStats local;
  local.pairs = n * (n - 1);
  for (std::size_t k = 0; k < results.size(); ++k) {
    local.expansions += results[k].expansions;
    if (results[k].plan) graph.add_edge(k / n, k % n, *results[k].plan);
  }
  local.edges = graph.edges().size();
  if (stats) *stats = local;
  return graph;
}

void PcInferConfig::validate(int L) const {
  if (horizon() > L) throw Error(ErrorKind::kConfig, "local horizon must not exceed L");
  if (local_budget < 1) throw Error(ErrorKind::kConfig, "local_budget must be >= 1");
  if (local_depth < 1) throw Error(ErrorKind::kConfig, "local_depth must be >= 1");
  if (max_local_links < 1) throw Error(ErrorKind::kConfig, "max_local_links must be >= 1");
  if (max_query_expansions < 1) throw Error(ErrorKind::kConfig, "max_query_expansions must be >= 1");
  local_search(search, local_budget, local_depth).validate(horizon());
}

ComposerResult run_preplan_inference(const Task& task, const TrajectoryProposer& proposer,
                                     const ConnectivityGraph& graph, const PcInferConfig& cfg, std::uint64_t seed,
                                     ConnectivityGraph* working_out) {
  const Maze& maze = proposer.maze();
  if (graph.maze_hash() != maze.hash())
    throw Error(ErrorKind::kMazeHashMismatch, "graph built for maze " + graph.maze_hash() + ", got " + maze.hash());
  cfg.validate(task.L);

  ConnectivityGraph work = graph;
  const std::size_t n_waypoints = graph.vertices().size();
  std::optional<std::size_t> start_v;
  for (std::size_t i = 0; i < n_waypoints; ++i)
    if (graph.vertices()[i] == task.start) start_v = i;
  const bool start_on_waypoint = start_v.has_value();
  if (!start_v) start_v = work.add_vertex(task.start);
  const std::size_t goal_v = work.add_vertex(task.goal);

  const OcConfig local_cfg = local_search(cfg.search, cfg.local_budget, cfg.local_depth);
  const int L_local = cfg.horizon();
  const double reach = L_local * proposer.kinematics().v_max;
  std::size_t expansions = 0;
  const auto cap = static_cast<std::size_t>(cfg.max_query_expansions);
  const auto left = [&](std::size_t limit) { return expansions < limit ? limit - expansions : 0; };

  const auto nearest_first = [&](State anchor) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < n_waypoints; ++i)
      if (distance(graph.vertices()[i], anchor) <= reach) order.push_back(i);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return distance(graph.vertices()[a], anchor) < distance(graph.vertices()[b], anchor);
    });
    return order;
  };

  // Direct start -> goal connection when the goal is within local reach.
  if (distance(task.start, task.goal) <= reach) {
    if (auto p = connect(proposer, local_cfg, task.start, task.goal, task.eps_goal, L_local,
                         GuidanceTarget::goal(task.goal), derive_seed(seed, {0}), expansions, left(cap)))
      work.add_edge(*start_v, goal_v, *p, task.eps_goal);
  }

  // The start side may spend half of what is left so the goal side is never starved.
  if (!start_on_waypoint) {
    const std::size_t start_limit = expansions + left(cap) / 2;
    int links = 0;
    for (std::size_t w : nearest_first(task.start)) {
      if (links >= cfg.max_local_links || left(start_limit) == 0) break;
      const State to = graph.vertices()[w];
      if (auto p = connect(proposer, local_cfg, task.start, to, graph.eps_stitch(), L_local,
                           GuidanceTarget::waypoint(to), derive_seed(seed, {1, w}), expansions, left(start_limit))) {
        work.add_edge(*start_v, w, *p);
        ++links;
      }
    }
  }

  int links = 0;
  for (std::size_t w : nearest_first(task.goal)) {
    if (links >= cfg.max_local_links || left(cap) == 0) break;
    const State from = graph.vertices()[w];
    if (w == *start_v && work.find_edge(w, goal_v)) continue;
    if (auto p = connect(proposer, local_cfg, from, task.goal, task.eps_goal, L_local, GuidanceTarget::goal(task.goal),
                         derive_seed(seed, {2, w}), expansions, left(cap))) {
      work.add_edge(w, goal_v, *p, task.eps_goal);
      ++links;
    }
  }

  ComposerResult result;
  result.expansions = expansions;
  if (auto path = shortest_path(work, *start_v, goal_v)) {
    Plan plan = synthesize_plan(work, *path);
    if (plan.size() <= static_cast<std::size_t>(task.L)) result.plan = std::move(plan);
  }
  result.graph_edges = work.edges().size();
  if (working_out) *working_out = std::move(work);
  return result;
}

}  // namespace cmctd
