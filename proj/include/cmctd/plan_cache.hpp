#pragma once

#include <cstdint>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "cmctd/plan.hpp"

namespace cmctd {

struct CacheKey {
  std::string context;
  State start;
  State goal;

  friend bool operator==(const CacheKey&, const CacheKey&) = default;
};

struct CacheEntry {
  CacheKey key;
  Plan plan;
  std::uint64_t hits = 0;
};

struct CacheStats {
  std::uint64_t lookups = 0;
  std::uint64_t hits = 0;
  std::uint64_t inserts = 0;
};

/// Plans keyed by (context, start, goal). Readers share, writers exclude;
/// a lookup sees a whole entry or none of it.
class PlanCache {
 public:
  /// Stores the plan; an existing exact key keeps the shorter plan. Throws
  /// Error{kContract} for a plan that is not executable in `maze`.
  void insert(const CacheKey& key, const Plan& plan, const Maze& maze, double v_max);

  /// Hit when an entry shares the context and both its start and goal lie
  /// within eps_cache of the query; the nearest start wins. The plan is
  /// re-rooted at the queried start with one bridging step, and the result is
  /// re-validated against `maze`; an illegal bridge is a miss.
  std::optional<Plan> lookup(const CacheKey& key, double eps_cache, const Maze& maze, double v_max) const;

  std::size_t size() const;
  CacheStats stats() const;
  std::vector<CacheEntry> entries() const;

 private:
  mutable std::shared_mutex mutex_;
  mutable std::vector<CacheEntry> entries_;  // hit counters move on lookup
  mutable CacheStats stats_;
};

}  // namespace cmctd
