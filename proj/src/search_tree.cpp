#include "cmctd/search_tree.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "cmctd/error.hpp"

namespace cmctd {

SearchTree::SearchTree(State root_state, GuidanceSet guidance_set, TreeParams params) : params_(params) {
  if (params_.branching < 1) throw Error(ErrorKind::kConfig, "branching must be >= 1");
  if (params_.max_depth < 0) throw Error(ErrorKind::kConfig, "max_depth must be >= 0");
  nodes_.push_back(PlanNode{0, std::nullopt, Plan(root_state), 0, 0, 0.0, 0, std::move(guidance_set), {}, false,
                            std::nullopt});
  open_.push_back(can_expand(0));
}

bool SearchTree::can_expand(NodeId id) const {
  const PlanNode& n = nodes_.at(id);
  return !n.terminal && n.depth < params_.max_depth && static_cast<int>(n.children.size()) < params_.branching;
}

NodeId SearchTree::add_child(NodeId parent, const Plan& segment, const ScoringTask& task) {
  return add_stitched_child(parent, stitch(nodes_.at(parent).plan, segment), task);
}

NodeId SearchTree::add_stitched_child(NodeId parent, Plan stitched, const ScoringTask& task) {
  const PlanNode& p = nodes_.at(parent);
  if (p.terminal || static_cast<int>(p.children.size()) >= params_.branching)
    throw Error(ErrorKind::kSaturated, "node " + std::to_string(parent) + " cannot take another child");
  if (p.depth >= params_.max_depth)
    throw Error(ErrorKind::kDepthLimit, "node " + std::to_string(parent) + " is at max depth");
  const NodeId id = nodes_.size();
  PlanNode child{id, parent, std::move(stitched), p.depth + 1, 0, 0.0, 0, p.guidance_set, {}, false, std::nullopt};
  child.goal_hit = first_goal_hit(child.plan, task.goal, task.eps_goal);
  child.terminal = child.goal_hit.has_value();
  nodes_[parent].children.push_back(id);
  nodes_.push_back(std::move(child));
  open_.push_back(false);
  refresh_open(id);
  return id;
}

void SearchTree::refresh_open(NodeId from) {
  std::optional<NodeId> cur = from;
  while (cur) {
    bool open = can_expand(*cur);
    for (NodeId c : nodes_[*cur].children) open = open || open_[c];
    if (open_[*cur] == open && *cur != from) break;
    open_[*cur] = open;
    cur = nodes_[*cur].parent;
  }
}

void SearchTree::backpropagate(NodeId id, double reward) {
  std::optional<NodeId> cur = id;
  while (cur) {
    PlanNode& n = nodes_.at(*cur);
    n.visits += 1;
    n.value_sum += reward;
    cur = n.parent;
  }
}

double SearchTree::uct_score(NodeId child) const {
  const PlanNode& c = nodes_.at(child);
  if (c.visits == 0) return std::numeric_limits<double>::infinity();
  const double parent_visits = c.parent ? static_cast<double>(nodes_[*c.parent].visits) : 1.0;
  const double n = static_cast<double>(c.visits);
  const double explore = parent_visits > 1.0 ? std::sqrt(std::log(parent_visits) / n) : 0.0;
  return c.value_sum / n + params_.c_uct * explore;
}

void SearchTree::dump(std::ostream& out) const {
  const auto old_precision = out.precision(17);
  for (const PlanNode& n : nodes_) {
    out << "node " << n.id << ' ' << (n.parent ? static_cast<long long>(*n.parent) : -1LL) << ' ' << n.visits << ' '
        << n.value_sum << ' ' << n.depth << ' ' << (n.terminal ? 1 : 0) << ' ' << n.plan.back().x << ' '
        << n.plan.back().y << '\n';
  }
  out.precision(old_precision);
}

NodeId select_uct(const SearchTree& tree) {
  NodeId cur = tree.root();
  if (!tree.subtree_open(cur)) throw Error(ErrorKind::kSaturated, "no expandable node left in tree");
  while (!tree.can_expand(cur)) {
    std::optional<NodeId> best;
    double best_score = -std::numeric_limits<double>::infinity();
    for (NodeId c : tree.node(cur).children) {
      if (!tree.subtree_open(c)) continue;
      const double score = tree.uct_score(c);
      if (!best || score > best_score) {
        best = c;
        best_score = score;
      }
    }
    if (!best) throw Error(ErrorKind::kSaturated, "open flag out of sync");
    cur = *best;
  }
  return cur;
}

NodeId expand(SearchTree& tree, NodeId id, const ExpansionContext& ctx, std::uint64_t seed) {
  const PlanNode& n = tree.node(id);
  if (n.depth >= tree.params().max_depth)
    throw Error(ErrorKind::kDepthLimit, "node " + std::to_string(id) + " is at max depth");
  if (!tree.can_expand(id)) throw Error(ErrorKind::kSaturated, "node " + std::to_string(id) + " is saturated");
  Candidate best = best_of_n(*ctx.proposer, *ctx.proposer_cfg, n.plan, ctx.target, n.guidance_set, ctx.task, seed,
                             ctx.fast_replanning);
  return tree.add_child(id, best.segment, ctx.task);
}

SimulationResult simulate(const SearchTree& tree, NodeId id, const ExpansionContext& ctx, std::uint64_t seed) {
  const PlanNode& n = tree.node(id);
  const double v_max = ctx.proposer->kinematics().v_max;
  if (n.goal_hit || !ctx.fast_replanning)
    return {reward(n.plan, ctx.task.goal, ctx.task.eps_goal, ctx.task.horizon, v_max), n.plan};
  Plan completed =
      fast_complete(*ctx.proposer, *ctx.proposer_cfg, n.plan, ctx.target, ctx.task.eps_goal, ctx.task.horizon, seed);
  const double r = reward(completed, ctx.task.goal, ctx.task.eps_goal, ctx.task.horizon, v_max);
  return {r, std::move(completed)};
}

}  // namespace cmctd
