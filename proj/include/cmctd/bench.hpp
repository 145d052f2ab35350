#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cmctd/composer_distributed.hpp"
#include "cmctd/composer_online.hpp"
#include "cmctd/composer_preplan.hpp"

namespace cmctd {

enum class ComposerKind { kOnline, kDistributed, kPreplan };

std::string to_string(ComposerKind kind);
ComposerKind parse_composer(const std::string& text);

/// Full experiment configuration. Built from a flat "key = value" file plus
/// overrides with the same dotted keys; see config_keys().
struct RunConfig {
  std::string maze = "medium";
  ComposerKind composer = ComposerKind::kOnline;
  int horizon = 0;  // L in states; 0 picks the maze default
  double eps_goal = 0.5;

  int task_count = 5;
  double task_min_separation = 4.0;
  std::uint64_t task_seed = 1000;
  std::vector<Task> task_list;  // overrides task_count when non-empty
  std::vector<std::uint64_t> seeds{0, 1, 2};

  KinematicParams kinematics;
  OcConfig oc;
  std::optional<double> fixed_guidance;  // restricts the guidance set to {g*}

  double eps_stitch = 0.5;  // DC connection and PC stitching threshold
  std::size_t waypoint_k = 0;  // 0 picks the maze default
  std::string waypoint_file;
  int dataset_n = 200;
  int dataset_h_train = 40;
  std::uint64_t dataset_seed = 7;
  std::uint64_t waypoint_seed = 11;
  int kmeans_iters = 100;

  int dc_max_rounds = 100;
  bool dc_whole_plan = false;

  int pc_pair_budget = 20;
  int pc_pair_depth = 2;
  std::uint64_t pc_build_seed = 3;
  std::string graph_file;
  PcInferConfig pc_infer;

  bool cache = false;
  double eps_cache = 0.0;  // 0 means eps_goal
  std::string cache_context = "task";

  std::size_t workers = 1;

  /// Throws Error{kConfig} on unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);
  /// Throws Error{kConfig} (or Error{kIo} for missing files).
  void validate() const;

  OcConfig effective_oc() const;
};

/// Every accepted key with a one-line description.
const std::vector<std::pair<std::string, std::string>>& config_keys();

/// "key = value" lines; '#' starts a comment.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

int default_horizon(const Maze& maze);

struct RunRecord {
  std::size_t task_id = 0;
  std::uint64_t seed = 0;
  ComposerKind composer = ComposerKind::kOnline;
  bool success = false;
  double wall_time = 0.0;
  std::optional<std::size_t> plan_steps;  // present iff success
  std::size_t expansions = 0;
  std::optional<std::size_t> graph_edges;
  std::size_t cache_hits = 0;

  /// Equality on every field but wall_time.
  bool same_outcome(const RunRecord& other) const;
};

std::string to_json_line(const RunRecord& record);
/// Throws Error{kMalformed}.
RunRecord parse_record(const std::string& line);

struct Stat {
  std::size_t n = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population
};
Stat summarize(const std::vector<double>& values);

struct Aggregate {
  std::size_t runs = 0;
  Stat success;
  Stat wall_time;
  Stat plan_steps;  // over successful runs
};

struct BenchSummary {
  Aggregate overall;
  std::map<std::size_t, Aggregate> per_task;
};

BenchSummary aggregate(const std::vector<RunRecord>& records);
std::string to_json(const BenchSummary& summary);

/// Prepared world shared by every run of a benchmark: maze, proposer, tasks,
/// waypoints, plan graph, cache.
class BenchContext {
 public:
  explicit BenchContext(RunConfig cfg);

  const RunConfig& config() const { return cfg_; }
  const Maze& maze() const { return maze_; }
  const TrajectoryProposer& proposer() const { return proposer_; }
  const std::vector<Task>& tasks() const { return tasks_; }
  const std::vector<State>& waypoints() const { return waypoints_; }
  const std::optional<ConnectivityGraph>& graph() const { return graph_; }
  PlanCache& cache() { return cache_; }
  double build_seconds() const { return build_seconds_; }
  const PcBuildStats& build_stats() const { return build_stats_; }

  /// One grid cell. Plans that fail validation count as failures.
  RunRecord run(std::size_t task_id, std::uint64_t seed, std::optional<Plan>* plan_out = nullptr);

 private:
  RunConfig cfg_;
  Maze maze_;
  ShootingProposer proposer_;
  std::vector<Task> tasks_;
  std::vector<State> waypoints_;
  std::optional<ConnectivityGraph> graph_;
  PlanCache cache_;
  double build_seconds_ = 0.0;
  PcBuildStats build_stats_;
};

/// Returned plan starts at the task start, ends in the goal ball, holds at
/// most L states, and is executable in the maze.
bool validate_solution(const Plan& plan, const Task& task, const Maze& maze, double v_max);

using RecordSink = std::function<void(const RunRecord&)>;

struct BenchResult {
  std::vector<RunRecord> records;  // grid order: task-major, then seed
  BenchSummary summary;
  double build_seconds = 0.0;
};

/// Runs the task x seed grid on up to cfg.workers threads (one thread when the
/// cache is on, so hits do not depend on scheduling). The sink sees each
/// record as its run finishes, one at a time.
BenchResult run_benchmark(const RunConfig& cfg, const RecordSink& sink = {});

/// Ablation tables; each row is one configuration cell.
struct AblationRow {
  std::string table;
  std::string label;
  BenchSummary summary;
  std::optional<double> cache_hit_rate;
  std::optional<double> repeat_time_ratio;  // uncached / cached mean wall time on repeats
};

/// b1: guidance set vs fixed levels {0.1, 0.5, 1, 2}; b2: fast replanning
/// on/off x budgets {50, 100, 200}; b3: stitch threshold sweep
/// {0.1, 0.5, 1, 2, 5} x eps_scale on DC; b4: cache off/on over `repeats`
/// runs of one task.
std::vector<AblationRow> run_ablation(const std::string& which, const RunConfig& base, double eps_scale = 0.5,
                                      int repeats = 20);
std::string format_ablation_table(const std::vector<AblationRow>& rows);

}  // namespace cmctd
