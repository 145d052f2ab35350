#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "cmctd/maze.hpp"

namespace cmctd {

struct WaypointSet {
  std::vector<State> centers;
  std::size_t k = 0;
  /// Sum of squared distances to the (pre-snap) assigned centers.
  double inertia = 0.0;
};

struct KMeansTrace {
  std::vector<double> inertia;  // after every Lloyd assignment step
  std::vector<State> raw_centers;  // converged centers before snapping
};

/// Lloyd's algorithm from k-means++ seeding. Empty clusters are reseeded to
/// the point farthest from its center. Throws Error{kContract} when there are
/// fewer points than k.
WaypointSet kmeans(const std::vector<State>& points, std::size_t k, int max_iters, std::uint64_t seed,
                   KMeansTrace* trace = nullptr);

/// Moves every center to the nearest point of a Free cell (kContactMargin
/// inside it); centers already in Free space stay put.
void snap_to_free(WaypointSet& set, const Maze& maze);

/// Points of every dataset state, clustered and snapped.
WaypointSet select_waypoints(const Maze& maze, const std::vector<State>& points, std::size_t k, int max_iters,
                             std::uint64_t seed);

/// Desk-scale k for a bundled maze name (6 / 12 / 24).
std::size_t default_waypoint_count(int maze_width);

void write_waypoints(std::ostream& out, const std::vector<State>& centers);
std::vector<State> read_waypoints(std::istream& in);

}  // namespace cmctd
