#include <atomic>
#include <limits>
#include <thread>

#include "cmctd/error.hpp"
#include "cmctd/plan_cache.hpp"
#include "cmctd/rng.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cmctd;

namespace {

Plan line(State a, State b) {
  std::vector<State> s{a};
  while (distance(s.back(), b) > 0.5) s.push_back(s.back() + (0.5 / distance(s.back(), b)) * (b - s.back()));
  s.push_back(b);
  return Plan(s);
}

}  // namespace

TEST_SUITE("plan-cache") {
  TEST_CASE("exact hit returns the stored plan") {
    const Maze m = testing::open_room(12, 12);
    PlanCache c;
    const Plan p = line({2, 2}, {8, 8});
    c.insert({"t", {2, 2}, {8, 8}}, p, m, 0.5);
    CHECK(c.lookup({"t", {2, 2}, {8, 8}}, 0.5, m, 0.5) == p);
    CHECK_FALSE(c.lookup({"u", {2, 2}, {8, 8}}, 0.5, m, 0.5));
    CHECK(c.stats().hits == 1);
    CHECK(c.stats().lookups == 2);
    CHECK(c.entries().front().hits == 1);
  }

  TEST_CASE("near hit is re-rooted with one bridging step") {
    const Maze m = testing::open_room(12, 12);
    PlanCache c;
    const Plan p = line({2, 2}, {8, 8});
    c.insert({"t", {2, 2}, {8, 8}}, p, m, 0.5);
    const auto hit = c.lookup({"t", {2.3, 2.1}, {8.2, 8}}, 0.5, m, 0.5);
    REQUIRE(hit);
    CHECK(hit->size() == p.size() + 1);
    CHECK(hit->front() == State{2.3, 2.1});
    CHECK(hit->prefix(2).back() == State{2, 2});
    CHECK_FALSE(c.lookup({"t", {2.6, 2}, {8, 8}}, 0.5, m, 0.5));
  }

  TEST_CASE("bridge through a wall is a miss") {
    const Maze m = parse_maze("#######\n#.....#\n#.....#\n###.###\n#.....#\n#######\n").maze;
    PlanCache c;
    c.insert({"t", {2.5, 2.9}, {3.5, 4.5}}, Plan({{2.5, 2.9}, {2.9, 2.9}, {3.35, 2.95}, {3.5, 3.4}, {3.5, 3.9}, {3.5, 4.4}}),
             m, 0.5);
    CHECK_FALSE(c.lookup({"t", {2.5, 3.2}, {3.5, 4.5}}, 0.5, m, 0.5));  // query start inside the wall row
    CHECK(c.lookup({"t", {2.4, 2.5}, {3.5, 4.5}}, 0.5, m, 0.5));
  }

  TEST_CASE("insert refuses non-executable plans and keeps the shorter duplicate") {
    const Maze m = testing::open_room(12, 12);
    PlanCache c;
    CHECK_THROWS_AS(c.insert({"t", {2, 2}, {8, 8}}, Plan({{2, 2}, {8, 8}}), m, 0.5), Error);
    c.insert({"t", {2, 2}, {3, 2}}, Plan({{2, 2}, {2.25, 2}, {2.5, 2}, {2.75, 2}, {3, 2}}), m, 0.5);
    c.insert({"t", {2, 2}, {3, 2}}, line({2, 2}, {3, 2}), m, 0.5);
    CHECK(c.size() == 1);
    CHECK(c.entries().front().plan.size() == 3);
    CHECK_THROWS_AS(c.lookup({"t", {2, 2}, {3, 2}}, 0.0, m, 0.5), Error);
  }

  TEST_CASE("lookup agrees with a linear-scan oracle") {
    const Maze m = testing::open_room(12, 12);
    Rng rng(8);
    PlanCache c;
    std::vector<CacheKey> keys;
    for (int i = 0; i < 60; ++i) {
      CacheKey k{i % 3 == 0 ? "a" : "b", {rng.uniform(2, 10), rng.uniform(2, 10)}, {rng.uniform(2, 10), rng.uniform(2, 10)}};
      c.insert(k, line(k.start, k.goal), m, 0.5);
      keys.push_back(k);
    }
    int mismatches = 0;
    for (int q = 0; q < 2000; ++q) {
      const CacheKey key{q % 2 ? "a" : "b", {rng.uniform(2, 10), rng.uniform(2, 10)}, {rng.uniform(2, 10), rng.uniform(2, 10)}};
      const double eps = rng.uniform(0.1, 3.0);
      std::optional<std::size_t> best;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < keys.size(); ++i) {
        if (keys[i].context != key.context) continue;
        const double ds = distance(keys[i].start, key.start);
        if (ds <= eps && distance(keys[i].goal, key.goal) <= eps && ds < best_d) {
          best = i;
          best_d = ds;
        }
      }
      std::optional<Plan> want;
      if (best) {
        std::vector<State> s{key.start};
        const Plan stored = line(keys[*best].start, keys[*best].goal);
        s.insert(s.end(), stored.states().begin(), stored.states().end());
        if (check_plausibility(Plan(s), 0.5)) want = Plan(s);
      }
      const auto got = c.lookup(key, eps, m, 0.5);
      if (want.has_value() != got.has_value() || (want && want->states() != got->states())) ++mismatches;
    }
    CHECK(mismatches == 0);
  }

  TEST_CASE("concurrent readers and a writer see whole entries") {
    const Maze m = testing::open_room(12, 12);
    PlanCache c;
    std::atomic<int> torn{0};
    std::thread writer([&] {
      for (int i = 0; i < 200; ++i) {
        const State s{2.0 + 0.03 * i, 2.0};
        c.insert({"t", s, {9, 9}}, line(s, {9, 9}), m, 0.5);
      }
    });
    std::vector<std::thread> readers;
    for (int r = 0; r < 3; ++r)
      readers.emplace_back([&] {
        for (int i = 0; i < 300; ++i)
          if (auto p = c.lookup({"t", {2.0 + 0.02 * i, 2.0}, {9, 9}}, 0.4, m, 0.5))
            if (p->back() != State{9, 9}) ++torn;
      });
    writer.join();
    for (auto& t : readers) t.join();
    CHECK(torn == 0);
    CHECK(c.size() == 200);
  }

  TEST_CASE("displacement examples and nearest start wins") {
    const Maze m = testing::open_room(12, 12);
    PlanCache c;
    c.insert({"t", {2, 2}, {8, 8}}, line({2, 2}, {8, 8}), m, 0.5);
    CHECK_FALSE(c.lookup({"t", {3, 2}, {8, 8}}, 0.5, m, 0.5));   // 2 eps away
    CHECK(c.lookup({"t", {2.25, 2}, {8, 8}}, 0.5, m, 0.5));      // eps / 2
    CHECK_FALSE(c.lookup({"t", {2, 2}, {9, 8}}, 0.5, m, 0.5));   // goal 2 eps away

    PlanCache two;
    const Plan near = line({2.1, 4}, {8, 4});
    two.insert({"t", {2.1, 4}, {8, 4}}, near, m, 0.5);
    two.insert({"t", {2.3, 4}, {8, 4}}, line({2.3, 4}, {8, 4}), m, 0.5);
    const auto hit = two.lookup({"t", {2, 4}, {8, 4}}, 0.5, m, 0.5);
    REQUIRE(hit);
    CHECK(hit->prefix(2).back() == State{2.1, 4});
    CHECK(hit->size() == near.size() + 1);
  }

  TEST_CASE("a shorter plan for the same key replaces a longer one") {
    const Maze m = testing::open_room(40, 12);
    PlanCache c;
    const auto straight = [](int n) {
      std::vector<State> s;
      for (int i = 0; i < n; ++i) s.push_back({2.0 + 17.55 * i / (n - 1), 5.0});
      s.back() = State{19.55, 5.0};
      return Plan(s);
    };
    const Plan p50 = straight(50), p40 = straight(40);
    REQUIRE(p50.back() == p40.back());
    c.insert({"t", p50.front(), p50.back()}, p50, m, 0.5);
    c.insert({"t", p40.front(), p40.back()}, p40, m, 0.5);
    CHECK(c.size() == 1);
    CHECK(c.entries().front().plan.size() == 40);
  }
}
