#include "cmctd/plan.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "cmctd/error.hpp"

namespace cmctd {

Plan::Plan(std::vector<State> states, std::vector<SegmentMarker> provenance)
    : states_(std::move(states)), provenance_(std::move(provenance)) {
  if (states_.empty()) throw Error(ErrorKind::kContract, "plan must hold at least one state");
}

Plan Plan::prefix(std::size_t count) const {
  count = std::clamp<std::size_t>(count, 1, states_.size());
  std::vector<State> states(states_.begin(), states_.begin() + static_cast<std::ptrdiff_t>(count));
  std::vector<SegmentMarker> markers;
  for (const auto& m : provenance_)
    if (m.start_index < count) markers.push_back(m);
  return Plan(std::move(states), std::move(markers));
}

GuidanceSet::GuidanceSet(std::vector<double> levels) : levels_(std::move(levels)) {
  if (levels_.empty()) throw Error(ErrorKind::kContract, "guidance set must be non-empty");
  for (double g : levels_)
    if (!(g >= 0.0)) throw Error(ErrorKind::kContract, "guidance levels must be non-negative");
}

double GuidanceSet::max_level() const { return *std::max_element(levels_.begin(), levels_.end()); }

Plan stitch(const Plan& parent, const Plan& child) {
  if (!(child.front() == parent.back()))
    throw Error(ErrorKind::kJunctionMismatch, "child does not start at the parent's terminal state");
  std::vector<State> states = parent.states();
  states.insert(states.end(), child.states().begin() + 1, child.states().end());
  std::vector<SegmentMarker> markers = parent.provenance();
  const std::size_t offset = parent.size() - 1;
  for (SegmentMarker m : child.provenance()) {
    m.start_index += offset;
    markers.push_back(m);
  }
  return Plan(std::move(states), std::move(markers));
}

bool check_plausibility(const Plan& plan, double v_max) {
  const double bound = v_max * (1.0 + kPlausibilityTolerance);
  const auto& s = plan.states();
  for (std::size_t i = 1; i < s.size(); ++i)
    if (distance(s[i - 1], s[i]) > bound) return false;
  return true;
}

bool is_executable(const Plan& plan, const Maze& maze, double v_max) {
  if (!check_plausibility(plan, v_max)) return false;
  const auto& s = plan.states();
  if (!maze.is_valid(s.front())) return false;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!maze.is_valid(s[i]) || !segment_collision_free(s[i - 1], s[i], maze)) return false;
  return true;
}

std::optional<std::size_t> first_goal_hit(const Plan& plan, State goal, double eps_goal) {
  const auto& s = plan.states();
  for (std::size_t t = 0; t < s.size(); ++t)
    if (distance(s[t], goal) <= eps_goal) return t;
  return std::nullopt;
}

double reward(const Plan& plan, State goal, double eps_goal, int horizon, double v_max) {
  if (horizon < 1) throw Error(ErrorKind::kContract, "reward horizon must be >= 1");
  if (!check_plausibility(plan, v_max)) return 0.0;
  const auto hit = first_goal_hit(plan, goal, eps_goal);
  if (!hit || *hit >= static_cast<std::size_t>(horizon)) return 0.0;
  return static_cast<double>(horizon - static_cast<int>(*hit)) / horizon;
}

void write_plan(std::ostream& out, const Plan& plan) {
  const auto old_precision = out.precision(17);
  for (std::size_t t = 0; t < plan.size(); ++t) out << t << ',' << plan[t].x << ',' << plan[t].y << '\n';
  out.precision(old_precision);
}

Plan read_plan(std::istream& in) {
  std::vector<State> states;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::size_t t = 0;
    char c1 = 0, c2 = 0;
    State s;
    if (!(fields >> t >> c1 >> s.x >> c2 >> s.y) || c1 != ',' || c2 != ',' || t != states.size())
      throw Error(ErrorKind::kMalformed, "bad plan line '" + line + "'");
    states.push_back(s);
  }
  if (states.empty()) throw Error(ErrorKind::kMalformed, "plan text holds no states");
  return Plan(std::move(states));
}

}  // namespace cmctd
