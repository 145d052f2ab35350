#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cmctd/maze.hpp"

namespace cmctd {

/// Marks where a generated segment begins inside a stitched plan.
struct SegmentMarker {
  std::uint64_t segment_id = 0;
  double guidance = 0.0;
  std::size_t start_index = 0;

  friend bool operator==(const SegmentMarker&, const SegmentMarker&) = default;
};

/// Ordered, non-empty state sequence. Index t is reached after t steps.
class Plan {
 public:
  explicit Plan(State single) : states_{single} {}
  explicit Plan(std::vector<State> states, std::vector<SegmentMarker> provenance = {});

  const std::vector<State>& states() const { return states_; }
  const std::vector<SegmentMarker>& provenance() const { return provenance_; }
  std::size_t size() const { return states_.size(); }
  std::size_t steps() const { return states_.size() - 1; }
  const State& front() const { return states_.front(); }
  const State& back() const { return states_.back(); }
  const State& operator[](std::size_t i) const { return states_[i]; }

  /// First `count` states (count >= 1); markers past the cut are dropped.
  Plan prefix(std::size_t count) const;

  friend bool operator==(const Plan&, const Plan&) = default;

 private:
  std::vector<State> states_;
  std::vector<SegmentMarker> provenance_;
};

class GuidanceSet {
 public:
  /// Throws Error{kContract} when empty or any level is negative.
  explicit GuidanceSet(std::vector<double> levels);
  static GuidanceSet defaults() { return GuidanceSet({0.0, 0.1, 0.5, 1.0, 2.0}); }

  const std::vector<double>& levels() const { return levels_; }
  double max_level() const;

  friend bool operator==(const GuidanceSet&, const GuidanceSet&) = default;

 private:
  std::vector<double> levels_;
};

/// child.front() must equal parent.back() exactly; the junction is kept once.
Plan stitch(const Plan& parent, const Plan& child);

inline constexpr double kPlausibilityTolerance = 1e-9;

bool check_plausibility(const Plan& plan, double v_max);
/// Plausible and every consecutive segment collision-free.
bool is_executable(const Plan& plan, const Maze& maze, double v_max);

std::optional<std::size_t> first_goal_hit(const Plan& plan, State goal, double eps_goal);

/// (H - t) / H for the first goal hit t < H; 0 when implausible or no hit.
double reward(const Plan& plan, State goal, double eps_goal, int horizon, double v_max);

/// "t,x,y" lines.
void write_plan(std::ostream& out, const Plan& plan);
Plan read_plan(std::istream& in);

}  // namespace cmctd
