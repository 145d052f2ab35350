#include "cmctd/composer_online.hpp"

#include "cmctd/error.hpp"
#include "cmctd/rng.hpp"

namespace cmctd {

void OcConfig::validate(int L) const {
  if (budget < 1) throw Error(ErrorKind::kConfig, "budget must be >= 1");
  proposer.validate();
  if (L < proposer.h_plan)
    throw Error(ErrorKind::kConfig, "L (" + std::to_string(L) + ") must be >= h_plan (" +
                                        std::to_string(proposer.h_plan) + ")");
  if (tree.branching < 1) throw Error(ErrorKind::kConfig, "branching must be >= 1");
  if (tree.max_depth < 1) throw Error(ErrorKind::kConfig, "max_depth must be >= 1");
  if (!(tree.c_uct >= 0.0)) throw Error(ErrorKind::kConfig, "c_uct must be >= 0");
}

OnlineSearch::OnlineSearch(const Task& task, const TrajectoryProposer& proposer, const OcConfig& cfg,
                           std::uint64_t seed, std::uint64_t tree_id, std::optional<GuidanceTarget> target,
                           CacheHook cache)
    : task_(task),
      proposer_(&proposer),
      cfg_(cfg),
      seed_(seed),
      tree_id_(tree_id),
      cache_(std::move(cache)),
      tree_(task.start, cfg.guidance_set, cfg.tree) {
  cfg_.validate(task.L);
  const Maze& maze = proposer.maze();
  if (!maze.is_valid(task.start) || !maze.is_valid(task.goal))
    throw Error(ErrorKind::kContract, "task start and goal must lie in free cells");
  if (!(task.eps_goal > 0.0)) throw Error(ErrorKind::kContract, "eps_goal must be positive");
  ctx_.proposer = proposer_;
  ctx_.proposer_cfg = &cfg_.proposer;
  ctx_.target = target.value_or(GuidanceTarget::goal(task.goal));
  ctx_.task = ScoringTask::of(task);
  ctx_.fast_replanning = cfg_.fast_replanning;
  if (distance(task.start, task.goal) <= task.eps_goal) solution_ = Plan(task.start);
}

bool OnlineSearch::record_if_solved(NodeId id) {
  const PlanNode& n = tree_.node(id);
  if (!n.goal_hit || *n.goal_hit >= static_cast<std::size_t>(task_.L)) return false;
  if (!solution_) solution_ = n.plan.prefix(*n.goal_hit + 1);
  return true;
}

std::optional<OnlineSearch::Step> OnlineSearch::step() {
  if (!tree_.subtree_open(tree_.root())) return std::nullopt;
  const NodeId selected = select_uct(tree_);
  const NodeId child_id = tree_.size();
  const double v_max = proposer_->kinematics().v_max;

  NodeId child = 0;
  bool from_cache = false;
  if (cache_.cache) {
    const PlanNode& n = tree_.node(selected);
    auto hit = cache_.cache->lookup(CacheKey{cache_.context, n.plan.back(), task_.goal}, cache_.eps_cache,
                                    proposer_->maze(), v_max);
    if (hit) {
      child = tree_.add_child(selected, *hit, ctx_.task);
      from_cache = true;
      ++cache_hits_;
    }
  }
  if (!from_cache) child = expand(tree_, selected, ctx_, derive_seed(seed_, {tree_id_, child_id, 0}));
  ++expansions_;

  Step out{child, 0.0, false};
  if (record_if_solved(child)) {
    out.goal_reached = true;
    out.reward = reward(tree_.node(child).plan, task_.goal, task_.eps_goal, task_.L, v_max);
    tree_.record_simulation(child);
    backpropagate(tree_, child, out.reward);
    return out;
  }

  SimulationResult sim = simulate(tree_, child, ctx_, derive_seed(seed_, {tree_id_, child_id, 1}));
  tree_.record_simulation(child);
  out.reward = sim.reward;
  if (cfg_.promote_completions && !tree_.node(child).terminal && tree_.can_expand(child)) {
    auto hit = first_goal_hit(sim.completed, task_.goal, task_.eps_goal);
    if (hit && *hit < static_cast<std::size_t>(task_.L) && sim.completed.size() > tree_.node(child).plan.size()) {
      const NodeId promoted = tree_.add_stitched_child(child, sim.completed, ctx_.task);
      out.goal_reached = record_if_solved(promoted);
    }
  }
  backpropagate(tree_, child, out.reward);
  return out;
}

ComposerResult run_online_composer(const Task& task, const TrajectoryProposer& proposer, const OcConfig& cfg,
                                   std::uint64_t seed, std::optional<GuidanceTarget> target, CacheHook cache) {
  OnlineSearch search(task, proposer, cfg, seed, 0, target, cache);
  while (!search.solution() && search.expansions() < static_cast<std::size_t>(cfg.budget)) {
    if (!search.step()) break;
  }
  ComposerResult result;
  result.plan = search.solution();
  result.expansions = search.expansions();
  result.cache_hits = search.cache_hits();
  if (cache.cache && result.plan && result.plan->size() > 1)
    cache.cache->insert(CacheKey{cache.context, task.start, task.goal}, *result.plan, proposer.maze(),
                        proposer.kinematics().v_max);
  return result;
}

}  // namespace cmctd
