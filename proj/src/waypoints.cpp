#include "cmctd/waypoints.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "cmctd/error.hpp"
#include "cmctd/rng.hpp"

namespace cmctd {

namespace {

double squared(State a, State b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

std::size_t nearest(State p, const std::vector<State>& centers) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double d = squared(p, centers[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

}  // namespace

WaypointSet kmeans(const std::vector<State>& points, std::size_t k, int max_iters, std::uint64_t seed,
                   KMeansTrace* trace) {
  if (k < 1) throw Error(ErrorKind::kContract, "k must be >= 1");
  if (points.size() < k)
    throw Error(ErrorKind::kContract, "kmeans needs at least k points (" + std::to_string(points.size()) + " < " +
                                          std::to_string(k) + ")");
  Rng rng(seed);

  // k-means++ seeding.
  std::vector<State> centers{points[rng.index(points.size())]};
  std::vector<double> d2(points.size());
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      d2[i] = squared(points[i], centers[nearest(points[i], centers)]);
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double cumulative = 0.0;
      pick = points.size();
      for (std::size_t i = 0; i < points.size(); ++i) {
        cumulative += d2[i];
        if (d2[i] > 0.0 && cumulative > r) {
          pick = i;
          break;
        }
      }
      if (pick == points.size())  // rounding at the tail
        pick = static_cast<std::size_t>(std::max_element(d2.begin(), d2.end()) - d2.begin());
    } else {
      pick = rng.index(points.size());
    }
    centers.push_back(points[pick]);
  }

  std::vector<std::size_t> assignment(points.size(), 0);
  double inertia = 0.0;
  for (int iter = 0; iter < std::max(max_iters, 1); ++iter) {
    bool changed = iter == 0;
    inertia = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const std::size_t c = nearest(points[i], centers);
      if (c != assignment[i]) changed = true;
      assignment[i] = c;
      inertia += squared(points[i], centers[c]);
    }
    if (trace) trace->inertia.push_back(inertia);
    if (!changed) break;

    std::vector<State> sums(k);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      sums[assignment[i]] = sums[assignment[i]] + points[i];
      ++counts[assignment[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centers[c] = (1.0 / static_cast<double>(counts[c])) * sums[c];
        continue;
      }
      // Reseed an empty cluster at the worst-served point.
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = squared(points[i], centers[assignment[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      centers[c] = points[far];
      assignment[far] = c;
    }
  }
  // Report inertia of the centers actually returned.
  inertia = 0.0;
  for (const State& p : points) inertia += squared(p, centers[nearest(p, centers)]);
  if (trace) {
    trace->inertia.push_back(inertia);
    trace->raw_centers = centers;
  }
  return WaypointSet{std::move(centers), k, inertia};
}

void snap_to_free(WaypointSet& set, const Maze& maze) {
  const double cs = maze.cell_size();
  for (State& center : set.centers) {
    if (maze.is_valid(center)) continue;
    State best = center;
    double best_d = std::numeric_limits<double>::infinity();
    for (int r = 0; r < maze.height(); ++r) {
      for (int c = 0; c < maze.width(); ++c) {
        if (!maze.is_free_cell(c, r)) continue;
        const State p{std::clamp(center.x, c * cs + kContactMargin, (c + 1) * cs - kContactMargin),
                      std::clamp(center.y, r * cs + kContactMargin, (r + 1) * cs - kContactMargin)};
        const double d = squared(p, center);
        if (d < best_d) {
          best_d = d;
          best = p;
        }
      }
    }
    center = best;
  }
}

WaypointSet select_waypoints(const Maze& maze, const std::vector<State>& points, std::size_t k, int max_iters,
                             std::uint64_t seed) {
  WaypointSet set = kmeans(points, k, max_iters, seed);
  snap_to_free(set, maze);
  return set;
}

std::size_t default_waypoint_count(int maze_width) {
  if (maze_width <= 8) return 6;
  if (maze_width <= 12) return 12;
  return 24;
}

void write_waypoints(std::ostream& out, const std::vector<State>& centers) {
  const auto old_precision = out.precision(17);
  for (State s : centers) out << s.x << ',' << s.y << '\n';
  out.precision(old_precision);
}

std::vector<State> read_waypoints(std::istream& in) {
  std::vector<State> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    State s;
    char comma = 0;
    if (!(fields >> s.x >> comma >> s.y) || comma != ',')
      throw Error(ErrorKind::kMalformed, "bad waypoint line '" + line + "'");
    out.push_back(s);
  }
  return out;
}

}  // namespace cmctd
