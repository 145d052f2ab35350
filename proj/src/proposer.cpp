#include "cmctd/proposer.hpp"

#include <cmath>
#include <limits>

#include "cmctd/error.hpp"
#include "cmctd/rng.hpp"

namespace cmctd {

void ProposerConfig::validate() const {
  if (h_plan < 1) throw Error(ErrorKind::kConfig, "h_plan must be >= 1");
  if (n_candidates < 1) throw Error(ErrorKind::kConfig, "n_candidates must be >= 1");
  if (jump_factor < 1) throw Error(ErrorKind::kConfig, "jump_factor must be >= 1");
  if (!(fast_guidance >= 0.0)) throw Error(ErrorKind::kConfig, "fast_guidance must be >= 0");
  if (no_progress_rounds < 1) throw Error(ErrorKind::kConfig, "no_progress_rounds must be >= 1");
}

Plan ShootingProposer::propose(State start, const GuidanceTarget& target, double guidance, int h, int hold,
                               std::uint64_t seed) const {
  if (guidance < 0.0) throw Error(ErrorKind::kContract, "guidance level must be >= 0");
  if (hold < 1) hold = 1;
  const double w = ProposerConfig::drift_weight(guidance);
  Rng rng(seed);
  std::vector<State> states;
  states.reserve(static_cast<std::size_t>(std::max(h, 0)) + 1);
  states.push_back(start);
  State s = start;
  State heading{};
  for (int step = 0; step < h; ++step) {
    if (step % hold == 0) {
      const double radius = std::sqrt(rng.uniform()) * params_.noise_scale;
      const double angle = rng.uniform(0.0, 2.0 * M_PI);
      const State eta{radius * std::cos(angle), radius * std::sin(angle)};
      const State to_target = target.point - s;
      const double dist = norm(to_target);
      const State u = dist > 0.0 ? (1.0 / dist) * to_target : State{};
      const State mix = w * u + (1.0 - w) * eta;
      const double m = norm(mix);
      heading = m > 0.0 ? (params_.v_max / m) * mix : State{};
    }
    s = step_dynamics(s, heading, params_, *maze_);
    states.push_back(s);
  }
  return Plan(std::move(states), {{seed, guidance, 0}});
}

Candidate best_of_n(const TrajectoryProposer& proposer, const ProposerConfig& cfg, const Plan& prefix,
                    const GuidanceTarget& target, const GuidanceSet& gs, const ScoringTask& task,
                    std::uint64_t seed, bool complete) {
  const double v_max = proposer.kinematics().v_max;
  std::optional<Candidate> best;
  for (int i = 0; i < cfg.n_candidates; ++i) {
    const auto index = static_cast<std::size_t>(i);
    Rng pick(derive_seed(candidate_seed(seed, index), {1}));
    const double g = gs.levels()[pick.index(gs.levels().size())];
    Plan segment = proposer.propose(prefix.back(), target, g, cfg.h_plan, candidate_plan_seed(seed, index));
    Plan full = stitch(prefix, segment);
    if (complete)
      full = fast_complete(proposer, cfg, full, target, task.eps_goal, task.horizon,
                           derive_seed(candidate_seed(seed, index), {2}));
    const double r = reward(full, task.goal, task.eps_goal, task.horizon, v_max);
    if (!best || r > best->reward) best = Candidate{std::move(segment), r, g, index};
  }
  return std::move(*best);
}

Plan fast_complete(const TrajectoryProposer& proposer, const ProposerConfig& cfg, const Plan& prefix,
                   const GuidanceTarget& target, double eps_goal, int max_states, std::uint64_t seed) {
  if (first_goal_hit(prefix, target.point, eps_goal)) return prefix;
  const auto limit = static_cast<std::size_t>(std::max(max_states, 1));
  if (prefix.size() >= limit) return prefix;

  Plan plan = prefix;
  double best = std::numeric_limits<double>::infinity();
  for (State s : prefix.states()) best = std::min(best, distance(s, target.point));
  int stalled = 0;
  for (std::uint64_t round = 0; plan.size() < limit; ++round) {
    const int remaining = static_cast<int>(limit - plan.size());
    const int h = std::min(cfg.h_plan, remaining);
    Plan piece = proposer.propose(plan.back(), target, cfg.fast_guidance, h, cfg.jump_factor,
                                  derive_seed(seed, {round}));
    plan = stitch(plan, piece);
    if (const auto hit = first_goal_hit(plan, target.point, eps_goal)) return plan.prefix(*hit + 1);

    double piece_best = std::numeric_limits<double>::infinity();
    for (State s : piece.states()) piece_best = std::min(piece_best, distance(s, target.point));
    if (piece_best < best - 1e-9) {
      best = piece_best;
      stalled = 0;
    } else if (++stalled >= cfg.no_progress_rounds) {
      break;
    }
  }
  return plan;
}

}  // namespace cmctd
