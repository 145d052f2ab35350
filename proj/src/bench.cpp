#include "cmctd/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "cmctd/error.hpp"
#include "cmctd/parallel.hpp"
#include "cmctd/rng.hpp"
#include "cmctd/waypoints.hpp"

namespace cmctd {

using json = nlohmann::json;

std::string to_string(ComposerKind kind) {
  switch (kind) {
    case ComposerKind::kOnline: return "oc";
    case ComposerKind::kDistributed: return "dc";
    case ComposerKind::kPreplan: return "pc";
  }
  return "?";
}

ComposerKind parse_composer(const std::string& text) {
  if (text == "oc") return ComposerKind::kOnline;
  if (text == "dc") return ComposerKind::kDistributed;
  if (text == "pc") return ComposerKind::kPreplan;
  throw Error(ErrorKind::kConfig, "composer must be oc, dc or pc, got '" + text + "'");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& want) {
  throw Error(ErrorKind::kConfig, "key '" + key + "': expected " + want + ", got '" + value + "'");
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    bad_value(key, v, "a number");
  }
  if (used != v.size()) bad_value(key, v, "a number");
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    bad_value(key, v, "an integer");
  }
  if (used != v.size()) bad_value(key, v, "an integer");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  const long long x = to_int(key, v);
  if (x < 0) bad_value(key, v, "a non-negative integer");
  return static_cast<std::uint64_t>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  bad_value(key, v, "a boolean");
}

using Setter = void (*)(RunConfig&, const std::string&, const std::string&);

struct KeySpec {
  const char* key;
  const char* doc;
  Setter set;
};

// clang-format off
const KeySpec kKeys[] = {
  {"maze", "bundled name (medium, large, giant) or maze file path",
   [](RunConfig& c, const std::string&, const std::string& v) { c.maze = v; }},
  {"composer", "oc, dc or pc",
   [](RunConfig& c, const std::string&, const std::string& v) { c.composer = parse_composer(v); }},
  {"horizon", "L, max states of a returned plan; 0 = maze default",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.horizon = static_cast<int>(to_int(k, v)); }},
  {"eps_goal", "goal ball radius",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.eps_goal = to_double(k, v); }},
  {"tasks.count", "number of sampled tasks",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.task_count = static_cast<int>(to_int(k, v)); }},
  {"tasks.min_separation", "minimum start-goal distance of sampled tasks",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.task_min_separation = to_double(k, v); }},
  {"tasks.seed", "task sampling seed",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.task_seed = to_u64(k, v); }},
  {"tasks.list", "explicit tasks 'sx sy gx gy; ...' (overrides tasks.count)",
   [](RunConfig& c, const std::string& k, const std::string& v) {
     c.task_list.clear();
     for (const auto& item : split(v, ';')) {
       std::istringstream in(item);
       Task t;
       if (!(in >> t.start.x >> t.start.y >> t.goal.x >> t.goal.y)) bad_value(k, item, "'sx sy gx gy'");
       c.task_list.push_back(t);
     }
   }},
  {"seeds", "comma-separated run seeds",
   [](RunConfig& c, const std::string& k, const std::string& v) {
     c.seeds.clear();
     for (const auto& s : split(v, ',')) c.seeds.push_back(to_u64(k, s));
   }},
  {"kinematics.v_max", "max displacement per step",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.kinematics.v_max = to_double(k, v); }},
  {"kinematics.noise_scale", "proposal noise scale in [0, 1]",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.kinematics.noise_scale = to_double(k, v); }},
  {"oc.budget", "B, max expansions per search",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.oc.budget = static_cast<int>(to_int(k, v)); }},
  {"oc.fast_replanning", "score simulations through fast completion",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.oc.fast_replanning = to_bool(k, v); }},
  {"oc.promote_completions", "turn goal-reaching completions into tree nodes",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.oc.promote_completions = to_bool(k, v); }},
  {"proposer.h_plan", "steps per proposed plan",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.oc.proposer.h_plan = static_cast<int>(to_int(k, v)); }},
  {"proposer.n_candidates", "N of best-of-N expansion",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.oc.proposer.n_candidates = static_cast<int>(to_int(k, v)); }},
  {"proposer.jump_factor", "C, steps per direction in fast completion",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.oc.proposer.jump_factor = static_cast<int>(to_int(k, v)); }},
  {"proposer.fast_guidance", "guidance level of fast completion",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.oc.proposer.fast_guidance = to_double(k, v); }},
  {"proposer.no_progress_rounds", "fast completion stall limit",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.oc.proposer.no_progress_rounds = static_cast<int>(to_int(k, v)); }},
  {"guidance.set", "comma-separated guidance levels",
   [](RunConfig& c, const std::string& k, const std::string& v) {
     std::vector<double> levels;
     for (const auto& s : split(v, ',')) levels.push_back(to_double(k, s));
     try {
       c.oc.guidance_set = GuidanceSet(levels);
     } catch (const Error& e) {
       throw Error(ErrorKind::kConfig, std::string("guidance.set: ") + e.what());
     }
   }},
  {"guidance.fixed", "single guidance level g* replacing the set; 'none' to clear",
   [](RunConfig& c, const std::string& k, const std::string& v) {
     if (v == "none") c.fixed_guidance.reset(); else c.fixed_guidance = to_double(k, v);
   }},
  {"tree.c_uct", "UCT exploration constant",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.oc.tree.c_uct = to_double(k, v); }},
  {"tree.branching", "F, max children per node",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.oc.tree.branching = static_cast<int>(to_int(k, v)); }},
  {"tree.max_depth", "M_max, max stitched plans per branch",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.oc.tree.max_depth = static_cast<int>(to_int(k, v)); }},
  {"graph.eps_stitch", "DC connection / PC stitching threshold",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.eps_stitch = to_double(k, v); }},
  {"graph.file", "prebuilt plan graph for pc",
   [](RunConfig& c, const std::string&, const std::string& v) { c.graph_file = v; }},
  {"waypoints.k", "number of waypoints; 0 = maze default",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.waypoint_k = to_u64(k, v); }},
  {"waypoints.file", "waypoint list ('x,y' lines) instead of clustering",
   [](RunConfig& c, const std::string&, const std::string& v) { c.waypoint_file = v; }},
  {"waypoints.seed", "k-means seed",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.waypoint_seed = to_u64(k, v); }},
  {"waypoints.iters", "max Lloyd iterations",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.kmeans_iters = static_cast<int>(to_int(k, v)); }},
  {"dataset.n", "trajectories clustered for waypoints",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.dataset_n = static_cast<int>(to_int(k, v)); }},
  {"dataset.h_train", "max states per dataset trajectory",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.dataset_h_train = static_cast<int>(to_int(k, v)); }},
  {"dataset.seed", "dataset seed",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.dataset_seed = to_u64(k, v); }},
  {"dc.max_rounds", "round cap of the distributed composer",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.dc_max_rounds = static_cast<int>(to_int(k, v)); }},
  {"dc.whole_plan", "scan whole plans (not only the newest segment) for connections",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.dc_whole_plan = to_bool(k, v); }},
  {"pc.pair_budget", "expansions per waypoint pair during the build",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.pc_pair_budget = static_cast<int>(to_int(k, v)); }},
  {"pc.pair_depth", "max stitched plans per pair",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.pc_pair_depth = static_cast<int>(to_int(k, v)); }},
  {"pc.build_seed", "graph build seed",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.pc_build_seed = to_u64(k, v); }},
  {"pc.local_horizon", "L', states of a local connection; 0 = 2 * h_plan",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.pc_infer.local_horizon = static_cast<int>(to_int(k, v)); }},
  {"pc.local_budget", "expansions per local connection",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.pc_infer.local_budget = static_cast<int>(to_int(k, v)); }},
  {"pc.local_depth", "max stitched plans per local connection",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.pc_infer.local_depth = static_cast<int>(to_int(k, v)); }},
  {"pc.max_local_links", "local connections kept per side",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.pc_infer.max_local_links = static_cast<int>(to_int(k, v)); }},
  {"pc.max_query_expansions", "expansion cap per query",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.pc_infer.max_query_expansions = static_cast<int>(to_int(k, v)); }},
  {"cache.enabled", "reuse plans across runs (oc only)",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.cache = to_bool(k, v); }},
  {"cache.eps", "cache match radius; 0 = eps_goal",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.eps_cache = to_double(k, v); }},
  {"cache.context", "cache context label",
   [](RunConfig& c, const std::string&, const std::string& v) { c.cache_context = v; }},
  {"run.workers", "parallel runs (env CMCTD_WORKERS sets the default)",
   [](RunConfig& c, const std::string& k, const std::string& v) { c.workers = to_u64(k, v); }},
};
// clang-format on

}  // namespace

const std::vector<std::pair<std::string, std::string>>& config_keys() {
  static const auto keys = [] {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& k : kKeys) out.emplace_back(k.key, k.doc);
    return out;
  }();
  return keys;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const auto& k : kKeys) {
    if (key == k.key) {
      k.set(*this, key, trim(value));
      return;
    }
  }
  throw Error(ErrorKind::kConfig, "unknown config key '" + key + "'");
}

OcConfig RunConfig::effective_oc() const {
  OcConfig out = oc;
  if (fixed_guidance) out.guidance_set = GuidanceSet({*fixed_guidance});
  return out;
}

void RunConfig::validate() const {
  const bool bundled = maze == "medium" || maze == "large" || maze == "giant";
  if (!bundled && !std::filesystem::exists(maze)) throw Error(ErrorKind::kIo, "maze file not found: " + maze);
  if (!waypoint_file.empty() && !std::filesystem::exists(waypoint_file))
    throw Error(ErrorKind::kIo, "waypoint file not found: " + waypoint_file);
  if (!graph_file.empty() && !std::filesystem::exists(graph_file))
    throw Error(ErrorKind::kIo, "graph file not found: " + graph_file);
  if (horizon < 0) throw Error(ErrorKind::kConfig, "horizon must be >= 0");
  if (!(eps_goal > 0.0)) throw Error(ErrorKind::kConfig, "eps_goal must be positive");
  if (task_list.empty() && task_count < 1) throw Error(ErrorKind::kConfig, "tasks.count must be >= 1");
  if (seeds.empty()) throw Error(ErrorKind::kConfig, "seeds must not be empty");
  if (!(kinematics.v_max > 0.0)) throw Error(ErrorKind::kConfig, "kinematics.v_max must be positive");
  if (kinematics.noise_scale < 0.0 || kinematics.noise_scale > 1.0)
    throw Error(ErrorKind::kConfig, "kinematics.noise_scale must lie in [0, 1]");
  if (fixed_guidance && *fixed_guidance < 0.0) throw Error(ErrorKind::kConfig, "guidance.fixed must be >= 0");
  if (!(eps_stitch > 0.0)) throw Error(ErrorKind::kConfig, "graph.eps_stitch must be positive");
  if (eps_cache < 0.0) throw Error(ErrorKind::kConfig, "cache.eps must be >= 0");
  if (cache && composer != ComposerKind::kOnline)
    throw Error(ErrorKind::kConfig, "cache.enabled wraps online composer expansions; use composer = oc");
  if (!graph_file.empty() && composer != ComposerKind::kPreplan)
    throw Error(ErrorKind::kConfig, "graph.file is only read by composer = pc");
  if (workers < 1) throw Error(ErrorKind::kConfig, "run.workers must be >= 1");
  if (dc_max_rounds < 1) throw Error(ErrorKind::kConfig, "dc.max_rounds must be >= 1");
  if (pc_pair_budget < 1 || pc_pair_depth < 1) throw Error(ErrorKind::kConfig, "pc pair budget and depth must be >= 1");
  if (dataset_n < 1 || dataset_h_train < 1) throw Error(ErrorKind::kConfig, "dataset.n and dataset.h_train must be >= 1");
  if (horizon > 0) {
    try {
      effective_oc().validate(horizon);
    } catch (const Error& e) {
      throw Error(ErrorKind::kConfig, e.what());
    }
  }
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  if (const char* env = std::getenv("CMCTD_WORKERS")) cfg.set("run.workers", env);
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::kConfig, "line " + std::to_string(lineno) + ": expected 'key = value'");
    cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorKind::kIo, "config file not found: " + path);
  return parse_run_config(read_text_file(path));
}

int default_horizon(const Maze& maze) {
  if (maze.width() <= 12) return 400;
  return 1000;
}

bool RunRecord::same_outcome(const RunRecord& o) const {
  return task_id == o.task_id && seed == o.seed && composer == o.composer && success == o.success &&
         plan_steps == o.plan_steps && expansions == o.expansions && graph_edges == o.graph_edges &&
         cache_hits == o.cache_hits;
}

std::string to_json_line(const RunRecord& r) {
  json j;
  j["task"] = r.task_id;
  j["seed"] = r.seed;
  j["composer"] = to_string(r.composer);
  j["success"] = r.success;
  j["wall_time"] = r.wall_time;
  if (r.plan_steps) j["plan_steps"] = *r.plan_steps;
  j["expansions"] = r.expansions;
  if (r.graph_edges) j["graph_edges"] = *r.graph_edges;
  j["cache_hits"] = r.cache_hits;
  return j.dump();
}

RunRecord parse_record(const std::string& line) {
  try {
    const json j = json::parse(line);
    RunRecord r;
    r.task_id = j.at("task").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.composer = parse_composer(j.at("composer").get<std::string>());
    r.success = j.at("success").get<bool>();
    r.wall_time = j.at("wall_time").get<double>();
    if (j.contains("plan_steps")) r.plan_steps = j["plan_steps"].get<std::size_t>();
    r.expansions = j.at("expansions").get<std::size_t>();
    if (j.contains("graph_edges")) r.graph_edges = j["graph_edges"].get<std::size_t>();
    r.cache_hits = j.value("cache_hits", std::size_t{0});
    if (r.success != r.plan_steps.has_value())
      throw Error(ErrorKind::kMalformed, "plan_steps must be present exactly when success is true");
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kMalformed, std::string("bad record: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kMalformed) throw;
    throw Error(ErrorKind::kMalformed, e.what());
  }
}

Stat summarize(const std::vector<double>& values) {
  Stat s;
  s.n = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(s.n));
  return s;
}

namespace {

Aggregate aggregate_of(const std::vector<const RunRecord*>& rs) {
  std::vector<double> success;
  std::vector<double> time;
  std::vector<double> steps;
  for (const RunRecord* r : rs) {
    success.push_back(r->success ? 1.0 : 0.0);
    time.push_back(r->wall_time);
    if (r->plan_steps) steps.push_back(static_cast<double>(*r->plan_steps));
  }
  return Aggregate{rs.size(), summarize(success), summarize(time), summarize(steps)};
}

json stat_json(const Stat& s) {
  json j;
  j["n"] = s.n;
  if (s.n > 0) {
    j["mean"] = s.mean;
    j["std"] = s.stddev;
  } else {
    j["mean"] = nullptr;
    j["std"] = nullptr;
  }
  return j;
}

json aggregate_json(const Aggregate& a) {
  json j;
  j["runs"] = a.runs;
  j["success"] = stat_json(a.success);
  j["wall_time"] = stat_json(a.wall_time);
  j["plan_steps"] = stat_json(a.plan_steps);
  return j;
}

}  // namespace

BenchSummary aggregate(const std::vector<RunRecord>& records) {
  BenchSummary out;
  std::vector<const RunRecord*> all;
  std::map<std::size_t, std::vector<const RunRecord*>> by_task;
  for (const auto& r : records) {
    all.push_back(&r);
    by_task[r.task_id].push_back(&r);
  }
  out.overall = aggregate_of(all);
  for (const auto& [task, rs] : by_task) out.per_task[task] = aggregate_of(rs);
  return out;
}

std::string to_json(const BenchSummary& summary) {
  json j;
  j["overall"] = aggregate_json(summary.overall);
  json tasks = json::object();
  for (const auto& [task, a] : summary.per_task) tasks[std::to_string(task)] = aggregate_json(a);
  j["per_task"] = tasks;
  return j.dump(2);
}

bool validate_solution(const Plan& plan, const Task& task, const Maze& maze, double v_max) {
  if (plan.front() != task.start) return false;
  if (distance(plan.back(), task.goal) > task.eps_goal) return false;
  if (plan.size() > static_cast<std::size_t>(task.L)) return false;
  return is_executable(plan, maze, v_max);
}

BenchContext::BenchContext(RunConfig cfg)
    : cfg_((cfg.validate(), std::move(cfg))), maze_(load_maze(cfg_.maze)), proposer_(maze_, cfg_.kinematics) {
  const int L = cfg_.horizon > 0 ? cfg_.horizon : default_horizon(maze_);
  try {
    cfg_.effective_oc().validate(L);
  } catch (const Error& e) {
    throw Error(ErrorKind::kConfig, e.what());
  }
  if (!cfg_.task_list.empty()) {
    for (Task t : cfg_.task_list) {
      if (!maze_.is_valid(t.start) || !maze_.is_valid(t.goal))
        throw Error(ErrorKind::kConfig, "tasks.list entry outside free space");
      t.eps_goal = cfg_.eps_goal;
      t.L = L;
      tasks_.push_back(t);
    }
  } else {
    for (int t = 0; t < cfg_.task_count; ++t)
      tasks_.push_back(sample_task(maze_, cfg_.task_min_separation,
                                   derive_seed(cfg_.task_seed, {static_cast<std::uint64_t>(t)}), cfg_.eps_goal, L));
  }

  if (cfg_.composer == ComposerKind::kOnline) return;
  if (!cfg_.waypoint_file.empty()) {
    std::ifstream in(cfg_.waypoint_file);
    waypoints_ = read_waypoints(in);
  } else {
    const std::size_t k = cfg_.waypoint_k > 0 ? cfg_.waypoint_k : default_waypoint_count(maze_.width());
    std::vector<State> points;
    for (const Plan& p : generate_dataset(maze_, cfg_.dataset_n, cfg_.dataset_h_train, cfg_.kinematics,
                                          cfg_.dataset_seed))
      points.insert(points.end(), p.states().begin(), p.states().end());
    waypoints_ = select_waypoints(maze_, points, k, cfg_.kmeans_iters, cfg_.waypoint_seed).centers;
  }
  for (State w : waypoints_)
    if (!maze_.is_valid(w)) throw Error(ErrorKind::kConfig, "waypoint outside free space");

  if (cfg_.composer != ComposerKind::kPreplan) return;
  if (!cfg_.graph_file.empty()) {
    graph_ = decode_graph_for(read_text_file(cfg_.graph_file), maze_.hash());
    return;
  }
  PcBuildConfig build;
  build.waypoints = waypoints_;
  build.pair_budget = cfg_.pc_pair_budget;
  build.pair_depth = cfg_.pc_pair_depth;
  build.eps_stitch = cfg_.eps_stitch;
  build.search = cfg_.effective_oc();
  build.workers = cfg_.workers;
  const auto t0 = std::chrono::steady_clock::now();
  graph_ = build_plan_graph(proposer_, build, cfg_.pc_build_seed, &build_stats_);
  build_seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunRecord BenchContext::run(std::size_t task_id, std::uint64_t seed, std::optional<Plan>* plan_out) {
  const Task& task = tasks_.at(task_id);
  const std::uint64_t run_seed = derive_seed(seed, {static_cast<std::uint64_t>(task_id)});
  ComposerResult result;
  const auto t0 = std::chrono::steady_clock::now();
  switch (cfg_.composer) {
    case ComposerKind::kOnline: {
      CacheHook hook;
      if (cfg_.cache) hook = CacheHook{&cache_, cfg_.cache_context, cfg_.eps_cache > 0 ? cfg_.eps_cache : cfg_.eps_goal};
      result = run_online_composer(task, proposer_, cfg_.effective_oc(), run_seed, std::nullopt, hook);
      break;
    }
    case ComposerKind::kDistributed: {
      DcConfig dc;
      dc.waypoints = waypoints_;
      dc.eps_connect = cfg_.eps_stitch;
      dc.max_rounds = cfg_.dc_max_rounds;
      dc.tree = cfg_.effective_oc();
      dc.whole_plan_scan = cfg_.dc_whole_plan;
      result = run_distributed_composer(task, proposer_, dc, run_seed);
      break;
    }
    case ComposerKind::kPreplan: {
      PcInferConfig infer = cfg_.pc_infer;
      infer.search = cfg_.effective_oc();
      result = run_preplan_inference(task, proposer_, *graph_, infer, run_seed);
      break;
    }
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  RunRecord r;
  r.task_id = task_id;
  r.seed = seed;
  r.composer = cfg_.composer;
  r.wall_time = elapsed;
  r.expansions = result.expansions;
  r.graph_edges = result.graph_edges;
  r.cache_hits = result.cache_hits;
  r.success = result.plan && validate_solution(*result.plan, task, maze_, cfg_.kinematics.v_max);
  if (r.success) r.plan_steps = result.plan->steps();
  if (plan_out) *plan_out = r.success ? result.plan : std::nullopt;
  return r;
}

BenchResult run_benchmark(const RunConfig& cfg, const RecordSink& sink) {
  BenchContext ctx(cfg);
  const std::size_t n_tasks = ctx.tasks().size();
  const std::size_t n_seeds = cfg.seeds.size();
  BenchResult out;
  out.records.resize(n_tasks * n_seeds);
  std::mutex sink_mutex;
  parallel_for(out.records.size(), cfg.cache ? 1 : cfg.workers, [&](std::size_t i) {
    out.records[i] = ctx.run(i / n_seeds, cfg.seeds[i % n_seeds]);
    if (sink) {
      std::lock_guard lock(sink_mutex);
      sink(out.records[i]);
    }
  });
  out.summary = aggregate(out.records);
  out.build_seconds = ctx.build_seconds();
  return out;
}

namespace {

std::string fmt(double v, int precision = 3) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(precision) << v;
  return o.str();
}

AblationRow row_of(const std::string& table, const std::string& label, const BenchResult& result) {
  return AblationRow{table, label, result.summary, std::nullopt, std::nullopt};
}

}  // namespace

std::vector<AblationRow> run_ablation(const std::string& which, const RunConfig& base, double eps_scale,
                                      int repeats) {
  std::vector<AblationRow> rows;
  if (which == "b1") {
    RunConfig c = base;
    c.composer = ComposerKind::kOnline;
    c.fixed_guidance.reset();
    rows.push_back(row_of("B.1", "guidance set", run_benchmark(c)));
    for (double g : {0.1, 0.5, 1.0, 2.0}) {
      c.fixed_guidance = g;
      rows.push_back(row_of("B.1", "fixed g=" + fmt(g, 1), run_benchmark(c)));
    }
  } else if (which == "b2") {
    RunConfig c = base;
    c.composer = ComposerKind::kOnline;
    for (int budget : {50, 100, 200}) {
      for (bool fr : {true, false}) {
        c.oc.budget = budget;
        c.oc.fast_replanning = fr;
        rows.push_back(row_of("B.2", std::string(fr ? "fast replanning" : "no fast replanning") +
                                         " B=" + std::to_string(budget),
                              run_benchmark(c)));
      }
    }
  } else if (which == "b3") {
    RunConfig c = base;
    c.composer = ComposerKind::kDistributed;
    for (double eps : {0.1, 0.5, 1.0, 2.0, 5.0}) {
      c.eps_stitch = eps * eps_scale;
      rows.push_back(row_of("B.3", "eps=" + fmt(eps, 1) + " (scaled " + fmt(c.eps_stitch, 3) + ")", run_benchmark(c)));
    }
  } else if (which == "b4") {
    if (repeats < 2) throw Error(ErrorKind::kConfig, "cache ablation needs at least 2 repeats");
    RunConfig c = base;
    c.composer = ComposerKind::kOnline;
    c.seeds.clear();
    for (int s = 0; s < repeats; ++s) c.seeds.push_back(static_cast<std::uint64_t>(s));
    std::vector<double> repeat_time[2];
    for (bool cached : {false, true}) {
      c.cache = cached;
      BenchResult r = run_benchmark(c);
      AblationRow row = row_of("B.4", cached ? "cache on" : "cache off", r);
      std::size_t hit_runs = 0;
      double t_sum = 0.0;
      std::size_t t_n = 0;
      for (const RunRecord& rec : r.records) {
        if (rec.cache_hits > 0) ++hit_runs;
        if (rec.seed != c.seeds.front()) {
          t_sum += rec.wall_time;
          ++t_n;
        }
      }
      row.cache_hit_rate = static_cast<double>(hit_runs) / static_cast<double>(r.records.size());
      repeat_time[cached ? 1 : 0].push_back(t_n ? t_sum / static_cast<double>(t_n) : 0.0);
      rows.push_back(row);
    }
    const double cached_time = repeat_time[1].front();
    rows.back().repeat_time_ratio =
        cached_time > 0.0 ? repeat_time[0].front() / cached_time : std::numeric_limits<double>::infinity();
  } else {
    throw Error(ErrorKind::kConfig, "unknown ablation '" + which + "' (b1, b2, b3, b4)");
  }
  return rows;
}

std::string format_ablation_table(const std::vector<AblationRow>& rows) {
  std::ostringstream o;
  o << "| table | cell | runs | success | time mean (s) | time std | steps mean | steps std | cache hit-rate | "
       "repeat time ratio |\n";
  o << "|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    const Aggregate& a = r.summary.overall;
    o << "| " << r.table << " | " << r.label << " | " << a.runs << " | " << fmt(a.success.mean) << " | "
      << fmt(a.wall_time.mean, 4) << " | " << fmt(a.wall_time.stddev, 4) << " | "
      << (a.plan_steps.n ? fmt(a.plan_steps.mean, 1) : "-") << " | "
      << (a.plan_steps.n ? fmt(a.plan_steps.stddev, 1) : "-") << " | "
      << (r.cache_hit_rate ? fmt(*r.cache_hit_rate) : "-") << " | "
      << (r.repeat_time_ratio ? fmt(*r.repeat_time_ratio, 1) : "-") << " |\n";
  }
  return o.str();
}

}  // namespace cmctd
