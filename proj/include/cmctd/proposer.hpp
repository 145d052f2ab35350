#pragma once

#include <cstdint>

#include "cmctd/maze.hpp"
#include "cmctd/plan.hpp"
#include "cmctd/rng.hpp"

namespace cmctd {

struct ProposerConfig {
  int h_plan = 40;
  int n_candidates = 50;
  /// C: a fast completion holds each sampled direction for this many steps.
  int jump_factor = 10;
  /// Guidance level used by fast completions.
  double fast_guidance = 2.0;
  /// Fast completion stops after this many rounds without getting closer.
  int no_progress_rounds = 3;

  /// w(g) = g / (g + 1): 0 at the unconditional prior, strictly increasing, < 1.
  static double drift_weight(double g) { return g / (g + 1.0); }

  void validate() const;
};

/// What a proposal is pulled toward. Both kinds drift along the unit vector to
/// `point`; the kind records intent (task goal vs. waypoint pair build).
struct GuidanceTarget {
  enum class Kind { kGoalAttraction, kWaypointAttraction };
  Kind kind = Kind::kGoalAttraction;
  State point;

  static GuidanceTarget goal(State s) { return {Kind::kGoalAttraction, s}; }
  static GuidanceTarget waypoint(State s) { return {Kind::kWaypointAttraction, s}; }
};

/// The planner boundary. Everything above it (trees, composers, graphs) only
/// sees plans that start exactly at the requested state.
class TrajectoryProposer {
 public:
  virtual ~TrajectoryProposer() = default;

  /// h steps (h + 1 states) from start; a fresh direction is drawn every
  /// `hold` steps.
  virtual Plan propose(State start, const GuidanceTarget& target, double guidance, int h, int hold,
                       std::uint64_t seed) const = 0;

  virtual const Maze& maze() const = 0;
  virtual const KinematicParams& kinematics() const = 0;

  Plan propose(State start, const GuidanceTarget& target, double guidance, int h, std::uint64_t seed) const {
    return propose(start, target, guidance, h, 1, seed);
  }
};

/// Guided shooting: each step heads along normalize(w u + (1 - w) eta), with u
/// the unit vector to the target and eta a unit-disc draw scaled by
/// noise_scale, then moves through step_dynamics.
class ShootingProposer final : public TrajectoryProposer {
 public:
  ShootingProposer(const Maze& maze, KinematicParams params) : maze_(&maze), params_(params) {}

  using TrajectoryProposer::propose;
  Plan propose(State start, const GuidanceTarget& target, double guidance, int h, int hold,
               std::uint64_t seed) const override;

  const Maze& maze() const override { return *maze_; }
  const KinematicParams& kinematics() const override { return params_; }

 private:
  const Maze* maze_;
  KinematicParams params_;
};

/// Goal ball and horizon a candidate is scored against.
struct ScoringTask {
  State goal;
  double eps_goal = 0.5;
  int horizon = 400;

  static ScoringTask of(const Task& task) { return {task.goal, task.eps_goal, task.L}; }
};

struct Candidate {
  Plan segment;
  double reward = 0.0;
  double guidance = 0.0;
  std::size_t index = 0;
};

/// Seed of candidate i inside a best-of-N draw; its plan uses
/// derive_seed(candidate_seed, {0}).
inline std::uint64_t candidate_seed(std::uint64_t seed, std::size_t index) {
  return derive_seed(seed, {static_cast<std::uint64_t>(index)});
}
inline std::uint64_t candidate_plan_seed(std::uint64_t seed, std::size_t index) {
  return derive_seed(candidate_seed(seed, index), {0});
}

/// Draws cfg.n_candidates segments from prefix.back(), each with a guidance
/// level sampled uniformly from gs, and keeps the best by reward of
/// stitch(prefix, segment), fast-completed to the task horizon when
/// `complete` is set. Ties go to the lowest index.
Candidate best_of_n(const TrajectoryProposer& proposer, const ProposerConfig& cfg, const Plan& prefix,
                    const GuidanceTarget& target, const GuidanceSet& gs, const ScoringTask& task,
                    std::uint64_t seed, bool complete = true);

/// Extends prefix toward target with coarse proposals (one direction per
/// jump_factor steps, cfg.fast_guidance) until the goal ball is hit, the
/// plan holds max_states states, or progress stalls. Round k uses
/// derive_seed(seed, {k}).
Plan fast_complete(const TrajectoryProposer& proposer, const ProposerConfig& cfg, const Plan& prefix,
                   const GuidanceTarget& target, double eps_goal, int max_states, std::uint64_t seed);

}  // namespace cmctd
