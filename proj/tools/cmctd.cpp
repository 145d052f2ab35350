#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cmctd/bench.hpp"
#include "cmctd/error.hpp"
#include "cmctd/render.hpp"
#include "cmctd/waypoints.hpp"

using namespace cmctd;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRunFailed = 1;
constexpr int kExitConfig = 2;

// "--dotted.key value" or "--dotted.key=value" pairs left over by CLI11.
void apply_overrides(RunConfig& cfg, const std::vector<std::string>& extras) {
  for (std::size_t i = 0; i < extras.size(); ++i) {
    std::string arg = extras[i];
    if (arg.rfind("--", 0) != 0) throw Error(ErrorKind::kConfig, "unexpected argument '" + arg + "'");
    arg = arg.substr(2);
    const auto eq = arg.find('=');
    if (eq != std::string::npos) {
      cfg.set(arg.substr(0, eq), arg.substr(eq + 1));
    } else {
      if (i + 1 >= extras.size()) throw Error(ErrorKind::kConfig, "override --" + arg + " needs a value");
      cfg.set(arg, extras[++i]);
    }
  }
}

RunConfig make_config(const std::string& path, const std::vector<std::string>& extras) {
  RunConfig cfg = path.empty() ? parse_run_config("") : load_run_config(path);
  apply_overrides(cfg, extras);
  cfg.validate();
  return cfg;
}

State parse_point(const std::string& text) {
  std::istringstream in(text);
  State s;
  char comma = 0;
  if (!(in >> s.x >> comma >> s.y) || comma != ',') throw Error(ErrorKind::kConfig, "expected x,y, got " + text);
  return s;
}

Plan read_plan_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path);
  return read_plan(in);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  out << text;
}

struct RecordWriter {
  explicit RecordWriter(const std::string& path) {
    if (!path.empty() && path != "-") {
      file.open(path);
      if (!file) throw Error(ErrorKind::kIo, "cannot write " + path);
    }
  }
  void operator()(const RunRecord& r) {
    std::ostream& out = file.is_open() ? static_cast<std::ostream&>(file) : std::cout;
    out << to_json_line(r) << '\n';
    out.flush();
  }
  std::ofstream file;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compositional plan-level tree search over maze worlds"};
  app.require_subcommand(0, 1);
  bool list_keys = false;
  app.add_flag("--list-keys", list_keys, "print every config key and exit");

  auto* gen_maze = app.add_subcommand("gen-maze", "write a bundled or random maze");
  std::string gm_bundled, gm_out;
  int gm_cols = 6, gm_rows = 6, gm_corridor = 2, gm_loops = 2;
  std::uint64_t gm_seed = 1;
  gen_maze->add_option("--bundled", gm_bundled, "medium, large or giant");
  gen_maze->add_option("--cols", gm_cols, "room columns");
  gen_maze->add_option("--rows", gm_rows, "room rows");
  gen_maze->add_option("--corridor", gm_corridor, "room width in cells");
  gen_maze->add_option("--loops", gm_loops, "extra wall openings");
  gen_maze->add_option("--seed", gm_seed);
  gen_maze->add_option("--out", gm_out, "output path (stdout by default)");

  auto* gen_data = app.add_subcommand("gen-data", "random-walk dataset as id,t,x,y lines");
  std::string gd_maze = "medium", gd_out;
  int gd_n = 200, gd_h = 40;
  std::uint64_t gd_seed = 7;
  gen_data->add_option("--maze", gd_maze);
  gen_data->add_option("--n", gd_n);
  gen_data->add_option("--h-train", gd_h);
  gen_data->add_option("--seed", gd_seed);
  gen_data->add_option("--out", gd_out);

  auto* waypoints = app.add_subcommand("waypoints", "k-means waypoints over a generated dataset");
  std::string wp_maze = "medium", wp_out;
  std::size_t wp_k = 0;
  int wp_n = 200, wp_h = 40, wp_iters = 100;
  std::uint64_t wp_data_seed = 7, wp_seed = 11;
  waypoints->add_option("--maze", wp_maze);
  waypoints->add_option("--k", wp_k, "0 picks the maze default");
  waypoints->add_option("--dataset-n", wp_n);
  waypoints->add_option("--h-train", wp_h);
  waypoints->add_option("--dataset-seed", wp_data_seed);
  waypoints->add_option("--seed", wp_seed);
  waypoints->add_option("--iters", wp_iters);
  waypoints->add_option("--out", wp_out);

  std::string config_path;
  auto* build_graph = app.add_subcommand("build-graph", "prebuild the plan graph (composer pc)");
  std::string bg_out;
  build_graph->add_option("--config", config_path);
  build_graph->add_option("--out", bg_out)->required();
  build_graph->allow_extras();

  auto* run = app.add_subcommand("run", "run the task x seed grid and stream records");
  std::string run_records, run_plan_out;
  std::optional<std::size_t> run_task;
  std::optional<std::uint64_t> run_seed;
  run->add_option("--config", config_path);
  run->add_option("--records", run_records, "record stream path (stdout by default)");
  run->add_option("--task", run_task, "single task index");
  run->add_option("--seed", run_seed, "single seed");
  run->add_option("--plan-out", run_plan_out, "write the plan of a single run");
  run->allow_extras();

  auto* bench = app.add_subcommand("bench", "grid benchmark with aggregates, or an ablation table");
  std::string bench_records, bench_summary, bench_ablation;
  double eps_scale = 0.5;
  int repeats = 20;
  bool strict = false;
  bench->add_option("--config", config_path);
  bench->add_option("--records", bench_records);
  bench->add_option("--summary", bench_summary, "summary JSON path (stdout by default)");
  bench->add_option("--ablation", bench_ablation, "b1, b2, b3, b4 or all");
  bench->add_option("--eps-scale", eps_scale, "multiplier applied to the b3 sweep");
  bench->add_option("--repeats", repeats, "runs per task in b4");
  bench->add_flag("--strict", strict, "exit 1 when any run failed");
  bench->allow_extras();

  auto* render = app.add_subcommand("render", "SVG scene of a maze, plans and markers");
  std::string r_maze = "medium", r_waypoints, r_tree, r_start, r_goal, r_out;
  std::vector<std::string> r_plans, r_discarded;
  render->add_option("--maze", r_maze);
  render->add_option("--plan", r_plans, "accepted plan file (t,x,y lines)");
  render->add_option("--discarded", r_discarded, "discarded plan file");
  render->add_option("--waypoints", r_waypoints);
  render->add_option("--tree", r_tree, "tree dump file");
  render->add_option("--start", r_start, "x,y");
  render->add_option("--goal", r_goal, "x,y");
  render->add_option("--out", r_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  if (list_keys) {
    for (const auto& [k, doc] : config_keys()) std::cout << k << "  " << doc << '\n';
    return kExitOk;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return kExitConfig;
  }

  try {
    if (*gen_maze) {
      const std::string text = gm_bundled.empty()
                                   ? generate_maze_text(gm_cols, gm_rows, gm_corridor, gm_loops, gm_seed)
                                   : std::string(bundled_maze_text(gm_bundled));
      parse_maze(text);
      write_text(gm_out, text);
      return kExitOk;
    }
    if (*gen_data) {
      const Maze maze = load_maze(gd_maze);
      std::ostringstream o;
      o.precision(17);
      const auto data = generate_dataset(maze, gd_n, gd_h, KinematicParams{}, gd_seed);
      for (std::size_t i = 0; i < data.size(); ++i)
        for (std::size_t t = 0; t < data[i].size(); ++t) o << i << ',' << t << ',' << data[i][t].x << ',' << data[i][t].y << '\n';
      write_text(gd_out, o.str());
      return kExitOk;
    }
    if (*waypoints) {
      const Maze maze = load_maze(wp_maze);
      std::vector<State> points;
      for (const Plan& p : generate_dataset(maze, wp_n, wp_h, KinematicParams{}, wp_data_seed))
        points.insert(points.end(), p.states().begin(), p.states().end());
      const std::size_t k = wp_k > 0 ? wp_k : default_waypoint_count(maze.width());
      const WaypointSet set = select_waypoints(maze, points, k, wp_iters, wp_seed);
      std::ostringstream o;
      write_waypoints(o, set.centers);
      write_text(wp_out, o.str());
      return kExitOk;
    }
    if (*build_graph) {
      RunConfig cfg = make_config(config_path, build_graph->remaining());
      cfg.composer = ComposerKind::kPreplan;
      cfg.graph_file.clear();
      BenchContext ctx(cfg);
      save_graph(bg_out, *ctx.graph());
      std::cerr << "graph: " << ctx.graph()->vertices().size() << " vertices, " << ctx.graph()->edges().size()
                << " edges, " << ctx.build_stats().expansions << " expansions, " << ctx.build_seconds() << " s\n";
      return kExitOk;
    }
    if (*run) {
      const RunConfig cfg = make_config(config_path, run->remaining());
      RecordWriter writer(run_records);
      bool all_ok = true;
      if (run_task || run_seed) {
        BenchContext ctx(cfg);
        std::optional<Plan> plan;
        const RunRecord r = ctx.run(run_task.value_or(0), run_seed.value_or(cfg.seeds.front()), &plan);
        writer(r);
        if (plan && !run_plan_out.empty()) {
          std::ofstream out(run_plan_out);
          if (!out) throw Error(ErrorKind::kIo, "cannot write " + run_plan_out);
          write_plan(out, *plan);
        }
        all_ok = r.success;
      } else {
        const BenchResult result = run_benchmark(cfg, std::ref(writer));
        for (const auto& r : result.records) all_ok = all_ok && r.success;
      }
      return all_ok ? kExitOk : kExitRunFailed;
    }
    if (*bench) {
      const RunConfig cfg = make_config(config_path, bench->remaining());
      bool all_ok = true;
      if (!bench_ablation.empty()) {
        std::vector<std::string> tables;
        if (bench_ablation == "all") tables = {"b1", "b2", "b3", "b4"};
        else tables = {bench_ablation};
        std::vector<AblationRow> rows;
        for (const auto& t : tables) {
          auto part = run_ablation(t, cfg, eps_scale, repeats);
          rows.insert(rows.end(), part.begin(), part.end());
        }
        for (const auto& r : rows) all_ok = all_ok && r.summary.overall.success.mean == 1.0;
        write_text(bench_summary, format_ablation_table(rows));
      } else {
        RecordWriter writer(bench_records);
        const BenchResult result = run_benchmark(cfg, std::ref(writer));
        for (const auto& r : result.records) all_ok = all_ok && r.success;
        write_text(bench_summary, to_json(result.summary) + "\n");
      }
      return (strict && !all_ok) ? kExitRunFailed : kExitOk;
    }
    if (*render) {
      const Maze maze = load_maze(r_maze);
      std::vector<TaggedPlan> plans;
      for (const auto& p : r_plans) plans.push_back({read_plan_file(p), true, p});
      for (const auto& p : r_discarded) plans.push_back({read_plan_file(p), false, p});
      SceneMarkers markers;
      if (!r_start.empty()) markers.start = parse_point(r_start);
      if (!r_goal.empty()) markers.goal = parse_point(r_goal);
      if (!r_waypoints.empty()) {
        std::ifstream in(r_waypoints);
        if (!in) throw Error(ErrorKind::kIo, "cannot read " + r_waypoints);
        markers.waypoints = read_waypoints(in);
      }
      const std::string tree = r_tree.empty() ? "" : read_text_file(r_tree);
      write_svg(r_out, render_svg(maze, plans, markers, tree));
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}
