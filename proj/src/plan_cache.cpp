#include "cmctd/plan_cache.hpp"

#include <limits>
#include <mutex>

#include "cmctd/error.hpp"

namespace cmctd {

void PlanCache::insert(const CacheKey& key, const Plan& plan, const Maze& maze, double v_max) {
  if (!is_executable(plan, maze, v_max)) throw Error(ErrorKind::kContract, "refusing to cache a non-executable plan");
  std::unique_lock lock(mutex_);
  ++stats_.inserts;
  for (auto& e : entries_) {
    if (e.key == key) {
      if (plan.size() < e.plan.size()) e.plan = plan;
      return;
    }
  }
  entries_.push_back(CacheEntry{key, plan, 0});
}

std::optional<Plan> PlanCache::lookup(const CacheKey& key, double eps_cache, const Maze& maze, double v_max) const {
  if (!(eps_cache > 0.0)) throw Error(ErrorKind::kContract, "eps_cache must be positive");
  std::optional<Plan> found;
  std::size_t found_index = 0;
  {
    std::shared_lock lock(mutex_);
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& e = entries_[i];
      if (e.key.context != key.context) continue;
      const double ds = distance(e.key.start, key.start);
      if (ds > eps_cache || distance(e.key.goal, key.goal) > eps_cache) continue;
      if (ds < best_d) {
        best_d = ds;
        found = e.plan;
        found_index = i;
      }
    }
  }

  std::optional<Plan> result;
  if (found) {
    if (found->front() == key.start) {
      result = std::move(found);
    } else {
      std::vector<State> states{key.start};
      states.insert(states.end(), found->states().begin(), found->states().end());
      std::vector<SegmentMarker> markers;
      for (SegmentMarker m : found->provenance()) {
        m.start_index += 1;
        markers.push_back(m);
      }
      result = Plan(std::move(states), std::move(markers));
    }
    if (!is_executable(*result, maze, v_max)) result.reset();
  }

  std::unique_lock lock(mutex_);
  ++stats_.lookups;
  if (result) {
    ++stats_.hits;
    ++entries_[found_index].hits;  // entries are append-only, the index is stable
  }
  return result;
}

std::size_t PlanCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

CacheStats PlanCache::stats() const {
  std::shared_lock lock(mutex_);
  return stats_;
}

std::vector<CacheEntry> PlanCache::entries() const {
  std::shared_lock lock(mutex_);
  return entries_;
}

}  // namespace cmctd
