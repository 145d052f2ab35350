#include <cmath>
#include <sstream>

#include "cmctd/error.hpp"
#include "cmctd/plan.hpp"
#include "cmctd/rng.hpp"
#include "cmctd/waypoints.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cmctd;

TEST_SUITE("waypoints") {
  TEST_CASE("well-separated blobs are recovered") {
    Rng rng(4);
    const std::vector<State> truth{{2, 2}, {8, 2}, {5, 8}};
    std::vector<State> pts;
    for (int i = 0; i < 300; ++i) {
      const State c = truth[static_cast<std::size_t>(i) % 3];
      pts.push_back({c.x + rng.uniform(-0.3, 0.3), c.y + rng.uniform(-0.3, 0.3)});
    }
    const WaypointSet w = kmeans(pts, 3, 100, 1);
    REQUIRE(w.centers.size() == 3);
    for (State t : truth) {
      double best = 1e9;
      for (State c : w.centers) best = std::min(best, distance(t, c));
      CHECK(best < 0.1);
    }
  }

  TEST_CASE("reported inertia matches a recomputation") {
    Rng rng(5);
    std::vector<State> pts;
    for (int i = 0; i < 120; ++i) pts.push_back({rng.uniform(0, 10), rng.uniform(0, 10)});
    KMeansTrace trace;
    const WaypointSet w = kmeans(pts, 5, 100, 2, &trace);
    double inertia = 0.0;
    for (State p : pts) {
      double best = 1e18;
      for (State c : trace.raw_centers) best = std::min(best, (p.x - c.x) * (p.x - c.x) + (p.y - c.y) * (p.y - c.y));
      inertia += best;
    }
    CHECK(w.inertia == doctest::Approx(inertia).epsilon(1e-9));
    CHECK(trace.inertia.back() == doctest::Approx(inertia).epsilon(1e-9));
  }

  TEST_CASE("deterministic for a seed, contract on k") {
    std::vector<State> pts{{0, 0}, {1, 0}, {0, 1}, {5, 5}, {6, 5}};
    CHECK(kmeans(pts, 2, 50, 9).centers == kmeans(pts, 2, 50, 9).centers);
    CHECK_THROWS_AS(kmeans(pts, 6, 50, 9), Error);
    CHECK(kmeans(pts, 5, 50, 9).inertia == doctest::Approx(0.0));
  }

  TEST_CASE("snapping moves wall centers into free space only") {
    const Maze m = testing::split_room();
    WaypointSet w;
    w.centers = {{4.5, 2.5}, {2.2, 2.2}, {0.2, 0.2}};
    snap_to_free(w, m);
    CHECK(m.is_valid(w.centers[0]));
    CHECK(distance(w.centers[0], {4.5, 2.5}) == doctest::Approx(0.5).epsilon(1e-5));
    CHECK(w.centers[1] == State{2.2, 2.2});
    CHECK(m.is_valid(w.centers[2]));
  }

  TEST_CASE("selected waypoints lie in free space") {
    const Maze m = bundled_maze("giant");
    const auto data = generate_dataset(m, 100, 30, {}, 3);
    std::vector<State> pts;
    for (const Plan& p : data) pts.insert(pts.end(), p.states().begin(), p.states().end());
    const WaypointSet w = select_waypoints(m, pts, default_waypoint_count(m.width()), 100, 11);
    CHECK(w.centers.size() == 24);
    for (State c : w.centers) CHECK(m.is_valid(c));
    CHECK(default_waypoint_count(8) == 6);
    CHECK(default_waypoint_count(12) == 12);
  }

  TEST_CASE("waypoint file round trip") {
    const std::vector<State> c{{1.25, 2.5}, {0.1, 1.0 / 3.0}};
    std::stringstream io;
    write_waypoints(io, c);
    CHECK(read_waypoints(io) == c);
  }

  TEST_CASE("converged centers are the means of their nearest points") {
    Rng rng(14);
    std::vector<State> pts;
    for (int i = 0; i < 200; ++i) pts.push_back({rng.uniform(0, 10), rng.uniform(0, 10)});
    KMeansTrace trace;
    kmeans(pts, 4, 500, 3, &trace);
    const auto& c = trace.raw_centers;
    std::vector<State> sum(c.size());
    std::vector<int> n(c.size(), 0);
    for (State p : pts) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < c.size(); ++j)
        if (distance(p, c[j]) < distance(p, c[best])) best = j;
      sum[best] = sum[best] + p;
      ++n[best];
    }
    for (std::size_t j = 0; j < c.size(); ++j) {
      REQUIRE(n[j] > 0);
      CHECK(c[j].x == doctest::Approx(sum[j].x / n[j]).epsilon(1e-9));
      CHECK(c[j].y == doctest::Approx(sum[j].y / n[j]).epsilon(1e-9));
    }
  }

  TEST_CASE("snapping moves a center at most one cell diagonal") {
    const Maze m = bundled_maze("medium");
    Rng rng(15);
    for (int i = 0; i < 500; ++i) {
      WaypointSet w;
      const State c{rng.uniform(1.0, 7.0), rng.uniform(1.0, 7.0)};
      w.centers = {c};
      snap_to_free(w, m);
      CHECK(m.is_valid(w.centers[0]));
      // Every wall cell of this maze touches a free cell.
      CHECK(distance(w.centers[0], c) <= std::sqrt(2.0) + 1e-9);
    }
  }
}
