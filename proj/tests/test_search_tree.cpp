#include <cmath>
#include <limits>
#include <sstream>

#include "cmctd/composer_online.hpp"
#include "cmctd/error.hpp"
#include "cmctd/rng.hpp"
#include "cmctd/search_tree.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cmctd;

namespace {

const ScoringTask kFarGoal{{100, 100}, 0.5, 400};

Plan step_from(const PlanNode& n, double dx) { return Plan({n.plan.back(), n.plan.back() + State{dx, 0.0}}); }

}  // namespace

TEST_SUITE("search-tree") {
  TEST_CASE("root and children") {
    SearchTree t({1, 1}, GuidanceSet::defaults(), {});
    CHECK(t.size() == 1);
    CHECK(t.node(0).plan.size() == 1);
    const NodeId a = t.add_child(0, step_from(t.node(0), 0.2), kFarGoal);
    CHECK(a == 1);
    CHECK(t.node(a).depth == 1);
    CHECK(t.node(a).plan.size() == 2);
    CHECK(t.node(a).parent == 0u);
    CHECK(t.node(a).guidance_set == GuidanceSet::defaults());
    CHECK_THROWS_AS(t.add_child(0, Plan({{5, 5}, {5.1, 5}}), kFarGoal), Error);
  }

  TEST_CASE("branching and depth limits") {
    SearchTree t({1, 1}, GuidanceSet::defaults(), {1.4, 2, 2});
    t.add_child(0, step_from(t.node(0), 0.1), kFarGoal);
    t.add_child(0, step_from(t.node(0), 0.2), kFarGoal);
    CHECK_FALSE(t.can_expand(0));
    try {
      t.add_child(0, step_from(t.node(0), 0.3), kFarGoal);
      FAIL("expected saturation");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kSaturated);
    }
    const NodeId g = t.add_child(1, step_from(t.node(1), 0.1), kFarGoal);
    CHECK(t.node(g).depth == 2);
    CHECK_FALSE(t.can_expand(g));
    try {
      t.add_child(g, step_from(t.node(g), 0.1), kFarGoal);
      FAIL("expected depth limit");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kDepthLimit);
    }
  }

  TEST_CASE("goal-reaching children are terminal") {
    SearchTree t({1, 1}, GuidanceSet::defaults(), {});
    const NodeId c = t.add_child(0, Plan({{1, 1}, {1.4, 1}, {1.8, 1}}), {{1.8, 1.2}, 0.5, 100});
    CHECK(t.node(c).terminal);
    CHECK(t.node(c).goal_hit == 1u);
    CHECK_FALSE(t.can_expand(c));
  }

  TEST_CASE("uct score matches the formula") {
    SearchTree t({1, 1}, GuidanceSet::defaults(), {});
    const NodeId a = t.add_child(0, step_from(t.node(0), 0.1), kFarGoal);
    const NodeId b = t.add_child(0, step_from(t.node(0), 0.2), kFarGoal);
    CHECK(t.uct_score(a) == std::numeric_limits<double>::infinity());
    t.backpropagate(a, 0.5);
    t.backpropagate(a, 0.25);
    t.backpropagate(b, 1.0);
    const double c = std::sqrt(2.0);
    CHECK(t.uct_score(a) == doctest::Approx(0.75 / 2 + c * std::sqrt(std::log(3.0) / 2)));
    CHECK(t.uct_score(b) == doctest::Approx(1.0 + c * std::sqrt(std::log(3.0) / 1)));
  }

  TEST_CASE("selection visits unvisited children first, lowest id on ties") {
    SearchTree t({1, 1}, GuidanceSet::defaults(), {1.4, 2, 10});
    const NodeId a = t.add_child(0, step_from(t.node(0), 0.1), kFarGoal);
    const NodeId b = t.add_child(0, step_from(t.node(0), 0.2), kFarGoal);
    CHECK(select_uct(t) == a);
    t.backpropagate(a, 1.0);
    CHECK(select_uct(t) == b);
    t.backpropagate(b, 0.0);
    CHECK(select_uct(t) == a);  // higher mean, equal exploration
  }

  TEST_CASE("selection against a brute-force descent") {
    Rng rng(9);
    for (int trial = 0; trial < 100; ++trial) {
      SearchTree t({1, 1}, GuidanceSet::defaults(), {1.4, 1 + static_cast<int>(rng.index(3)), 4});
      for (int op = 0; op < 40; ++op) {
        const NodeId id = rng.index(t.size());
        if (t.can_expand(id) && rng.uniform() < 0.6) t.add_child(id, step_from(t.node(id), 0.01), kFarGoal);
        else t.backpropagate(id, rng.uniform());
      }
      // Oracle: descend from the root by maximal uct, ties to lower ids.
      const auto open = [&](auto&& self, NodeId n) -> bool {
        if (t.can_expand(n)) return true;
        for (NodeId c : t.node(n).children)
          if (self(self, c)) return true;
        return false;
      };
      if (!open(open, 0)) {
        CHECK_THROWS_AS(select_uct(t), Error);
        continue;
      }
      NodeId cur = 0;
      while (!t.can_expand(cur)) {
        NodeId best = 0;
        double score = -std::numeric_limits<double>::infinity();
        bool found = false;
        for (NodeId c : t.node(cur).children) {
          if (!open(open, c)) continue;
          const PlanNode& n = t.node(c);
          double s = std::numeric_limits<double>::infinity();
          if (n.visits > 0) {
            const double pv = static_cast<double>(t.node(cur).visits);
            s = n.value_sum / n.visits + t.params().c_uct * std::sqrt(std::log(pv) / n.visits);
          }
          if (!found || s > score) {
            best = c;
            score = s;
            found = true;
          }
        }
        cur = best;
      }
      CHECK(select_uct(t) == cur);
    }
  }

  TEST_CASE("saturated tree refuses selection") {
    SearchTree t({1, 1}, GuidanceSet::defaults(), {1.4, 1, 1});
    t.add_child(0, step_from(t.node(0), 0.1), kFarGoal);
    CHECK_FALSE(t.subtree_open(0));
    try {
      select_uct(t);
      FAIL("expected saturation");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kSaturated);
    }
  }

  TEST_CASE("expand stitches a best-of-n segment and the child inherits the set") {
    const Maze m = bundled_maze("medium");
    const ShootingProposer p(m, {});
    const Task task = sample_task(m, 4.0, 1);
    ProposerConfig pc;
    pc.n_candidates = 5;
    ExpansionContext ctx{&p, &pc, GuidanceTarget::goal(task.goal), ScoringTask::of(task), true};
    SearchTree t(task.start, GuidanceSet({0.5, 1.0}), {});
    const NodeId c = expand(t, 0, ctx, 42);
    CHECK(t.node(c).plan.size() == 41);
    CHECK(t.node(c).plan.front() == task.start);
    CHECK(t.node(c).guidance_set == GuidanceSet({0.5, 1.0}));
    CHECK(is_executable(t.node(c).plan, m, 0.5));
    const SimulationResult r = simulate(t, c, ctx, 7);
    CHECK(r.completed.prefix(41).states() == t.node(c).plan.states());
    CHECK(r.reward == reward(r.completed, task.goal, task.eps_goal, task.L, 0.5));
    ctx.fast_replanning = false;
    const SimulationResult plain = simulate(t, c, ctx, 7);
    CHECK(plain.completed == t.node(c).plan);
  }

  TEST_CASE("dump format") {
    SearchTree t({1, 1}, GuidanceSet::defaults(), {});
    t.add_child(0, step_from(t.node(0), 0.5), kFarGoal);
    t.backpropagate(1, 0.25);
    std::ostringstream out;
    t.dump(out);
    CHECK(out.str() == "node 0 -1 1 0.25 0 0 1 1\nnode 1 0 1 0.25 1 0 1.5 1\n");
  }

  TEST_CASE("selection examples") {
    SearchTree single({1, 1}, GuidanceSet::defaults(), {});
    CHECK(select_uct(single) == 0);

    SearchTree greedy({1, 1}, GuidanceSet::defaults(), {0.0, 2, 10});
    const NodeId a = greedy.add_child(0, step_from(greedy.node(0), 0.1), kFarGoal);
    const NodeId b = greedy.add_child(0, step_from(greedy.node(0), 0.2), kFarGoal);
    greedy.backpropagate(a, 1.0);
    greedy.backpropagate(b, 0.0);
    CHECK(select_uct(greedy) == a);

    SearchTree t({1, 1}, GuidanceSet::defaults(), {});
    const NodeId x = t.add_child(0, step_from(t.node(0), 0.1), kFarGoal);
    const NodeId y = t.add_child(0, step_from(t.node(0), 0.2), kFarGoal);
    for (int i = 0; i < 10; ++i) t.backpropagate(x, 0.5);
    t.backpropagate(y, 0.4);
    CHECK(t.node(0).visits == 11);
    const double c = std::sqrt(2.0);
    const double sx = 0.5 + c * std::sqrt(std::log(11.0) / 10);
    const double sy = 0.4 + c * std::sqrt(std::log(11.0) / 1);
    CHECK(t.uct_score(x) == doctest::Approx(sx));
    CHECK(t.uct_score(y) == doctest::Approx(sy));
    CHECK(select_uct(t) == (sy > sx ? y : x));
  }

  TEST_CASE("greedy selection ignores reward scale") {
    Rng rng(12);
    for (int trial = 0; trial < 50; ++trial) {
      SearchTree a({1, 1}, GuidanceSet::defaults(), {0.0, 3, 4});
      SearchTree b({1, 1}, GuidanceSet::defaults(), {0.0, 3, 4});
      const double k = rng.uniform(0.1, 10.0);
      for (int op = 0; op < 30; ++op) {
        const NodeId id = rng.index(a.size());
        if (a.can_expand(id) && rng.uniform() < 0.5) {
          a.add_child(id, step_from(a.node(id), 0.01), kFarGoal);
          b.add_child(id, step_from(b.node(id), 0.01), kFarGoal);
        } else {
          const double r = rng.uniform();
          a.backpropagate(id, r);
          b.backpropagate(id, k * r);
        }
      }
      if (!a.subtree_open(0)) continue;
      CHECK(select_uct(a) == select_uct(b));
    }
  }

  TEST_CASE("expand errors at the depth limit and draws distinct children") {
    const Maze m = bundled_maze("medium");
    const ShootingProposer p(m, {});
    const Task task = sample_task(m, 4.0, 1);
    ProposerConfig pc;
    pc.n_candidates = 4;
    const ExpansionContext ctx{&p, &pc, GuidanceTarget::goal(task.goal), ScoringTask::of(task), false};
    SearchTree t(task.start, GuidanceSet::defaults(), {1.4, 2, 1});
    const NodeId a = expand(t, 0, ctx, derive_seed(5, {1}));
    const NodeId b = expand(t, 0, ctx, derive_seed(5, {2}));
    CHECK(t.node(a).plan.states() != t.node(b).plan.states());
    try {
      expand(t, a, ctx, 3);
      FAIL("expected depth limit");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kDepthLimit);
    }
  }

  TEST_CASE("a terminal node simulates to its own reward") {
    const Maze m = testing::open_room(10, 10);
    const ShootingProposer p(m, {});
    ProposerConfig pc;
    const ScoringTask task{{3.5, 2}, 0.1, 10};
    const ExpansionContext ctx{&p, &pc, GuidanceTarget::goal(task.goal), task, true};
    SearchTree t({1, 2}, GuidanceSet::defaults(), {});
    const NodeId c = t.add_child(0, Plan({{1, 2}, {1.5, 2}, {2, 2}, {2.5, 2}, {3, 2}, {3.5, 2}}), task);
    REQUIRE(t.node(c).terminal);
    const SimulationResult r = simulate(t, c, ctx, 1);
    CHECK(r.reward == doctest::Approx(0.5));
    CHECK(r.completed == t.node(c).plan);
  }

  TEST_CASE("backpropagation touches only the path and visit counts add up") {
    SearchTree t({1, 1}, GuidanceSet::defaults(), {});
    const NodeId a = t.add_child(0, step_from(t.node(0), 0.1), kFarGoal);
    const NodeId b = t.add_child(0, step_from(t.node(0), 0.2), kFarGoal);
    t.backpropagate(a, 0.3);
    CHECK(t.node(0).visits == 1);
    CHECK(t.node(a).visits == 1);
    CHECK(t.node(b).visits == 0);
    CHECK(t.node(b).value_sum == 0.0);

    const Maze m = bundled_maze("large");
    const ShootingProposer p(m, {});
    OcConfig cfg;
    cfg.proposer.n_candidates = 5;
    const Task task = sample_task(m, 6.0, 3);
    OnlineSearch s(task, p, cfg, 8);
    OnlineSearch again(task, p, cfg, 8);
    for (int i = 0; i < 40 && s.step(); ++i) again.step();
    for (const PlanNode& n : s.tree().nodes()) {
      std::uint64_t below = n.simulations;
      for (NodeId c : n.children) below += s.tree().node(c).visits;
      CHECK(n.visits == below);
    }
    std::ostringstream da, db;
    s.tree().dump(da);
    again.tree().dump(db);
    CHECK(da.str() == db.str());
  }
}
