#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "cmctd/bench.hpp"
#include "cmctd/error.hpp"
#include "cmctd/render.hpp"
#include "cmctd/rng.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cmctd;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::kParse;  // sentinel: nothing thrown
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / ("cmctd_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(CMCTD_BIN) + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_SUITE("bench") {
  TEST_CASE("config file parsing") {
    const RunConfig c = parse_run_config(
        "# comment\n"
        "maze = large\n"
        "composer = dc   # trailing comment\n"
        "seeds = 4, 5,6\n"
        "guidance.set = 0.5,1\n"
        "oc.fast_replanning = off\n"
        "tasks.list = 1.5 1.5 3.5 1.5; 2.5 2.5 1.5 1.5\n");
    CHECK(c.maze == "large");
    CHECK(c.composer == ComposerKind::kDistributed);
    CHECK(c.seeds == std::vector<std::uint64_t>{4, 5, 6});
    CHECK(c.oc.guidance_set == GuidanceSet({0.5, 1.0}));
    CHECK_FALSE(c.oc.fast_replanning);
    REQUIRE(c.task_list.size() == 2);
    CHECK(c.task_list[1].start == State{2.5, 2.5});
  }

  TEST_CASE("config errors") {
    CHECK(kind_of([] { parse_run_config("nonsense.key = 1\n"); }) == ErrorKind::kConfig);
    CHECK(kind_of([] { parse_run_config("oc.budget = lots\n"); }) == ErrorKind::kConfig);
    CHECK(kind_of([] { parse_run_config("oc.budget = 12x\n"); }) == ErrorKind::kConfig);
    CHECK(kind_of([] { parse_run_config("just words\n"); }) == ErrorKind::kConfig);
    CHECK(kind_of([] { parse_run_config("composer = xx\n"); }) == ErrorKind::kConfig);
    CHECK(kind_of([] { parse_run_config("guidance.set = -1\n"); }) == ErrorKind::kConfig);
    CHECK(kind_of([] { parse_run_config("composer = dc\ncache.enabled = true\n").validate(); }) ==
          ErrorKind::kConfig);
    CHECK(kind_of([] { parse_run_config("maze = /no/such/maze.txt\n").validate(); }) == ErrorKind::kIo);
    CHECK(kind_of([] { parse_run_config("horizon = 10\n").validate(); }) == ErrorKind::kConfig);
    CHECK(kind_of([] { load_run_config("/no/such/config"); }) == ErrorKind::kIo);
    CHECK(config_keys().size() >= 40);
  }

  TEST_CASE("fixed guidance replaces the set") {
    RunConfig c;
    c.set("guidance.fixed", "0.5");
    CHECK(c.effective_oc().guidance_set == GuidanceSet({0.5}));
    c.set("guidance.fixed", "none");
    CHECK(c.effective_oc().guidance_set == GuidanceSet::defaults());
  }

  TEST_CASE("record json round trip") {
    RunRecord r{3, 17, ComposerKind::kPreplan, true, 0.125, 99, 12, 40, 0};
    const RunRecord back = parse_record(to_json_line(r));
    CHECK(back.same_outcome(r));
    CHECK(back.wall_time == r.wall_time);
    RunRecord f{1, 2, ComposerKind::kOnline, false, 1.5, std::nullopt, 200, std::nullopt, 3};
    CHECK(parse_record(to_json_line(f)).same_outcome(f));
    CHECK(kind_of([] { parse_record("{\"task\": 1}"); }) == ErrorKind::kMalformed);
    CHECK(kind_of([] {
            parse_record(
                "{\"task\":0,\"seed\":0,\"composer\":\"oc\",\"success\":true,\"wall_time\":1,\"expansions\":0}");
          }) == ErrorKind::kMalformed);
  }

  TEST_CASE("aggregation matches a recomputation") {
    Rng rng(6);
    std::vector<RunRecord> rs;
    for (std::size_t i = 0; i < 40; ++i) {
      RunRecord r;
      r.task_id = i % 4;
      r.seed = i;
      r.success = rng.uniform() < 0.6;
      r.wall_time = rng.uniform(0.0, 2.0);
      if (r.success) r.plan_steps = 10 + rng.index(100);
      rs.push_back(r);
    }
    const BenchSummary s = aggregate(rs);
    CHECK(s.overall.runs == 40);
    CHECK(s.per_task.size() == 4);
    for (const auto& [task, a] : s.per_task) {
      double n = 0, ok = 0, t = 0, t2 = 0;
      for (const auto& r : rs) {
        if (r.task_id != task) continue;
        n += 1;
        ok += r.success;
        t += r.wall_time;
      }
      for (const auto& r : rs)
        if (r.task_id == task) t2 += (r.wall_time - t / n) * (r.wall_time - t / n);
      CHECK(a.runs == static_cast<std::size_t>(n));
      CHECK(a.success.mean == doctest::Approx(ok / n));
      CHECK(a.wall_time.mean == doctest::Approx(t / n));
      CHECK(a.wall_time.stddev == doctest::Approx(std::sqrt(t2 / n)));
      CHECK(a.plan_steps.n == static_cast<std::size_t>(ok));
    }
    const auto j = nlohmann::json::parse(to_json(s));
    CHECK(j["overall"]["runs"] == 40);
    CHECK(j["per_task"].size() == 4);
    CHECK(aggregate({}).overall.success.n == 0);
  }

  TEST_CASE("benchmark grid order, sink, and validation") {
    RunConfig c;
    c.set("tasks.count", "2");
    c.set("seeds", "0,1,2");
    c.set("oc.budget", "40");
    std::vector<RunRecord> seen;
    const BenchResult r = run_benchmark(c, [&](const RunRecord& rec) { seen.push_back(rec); });
    REQUIRE(r.records.size() == 6);
    CHECK(seen.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
      CHECK(r.records[i].task_id == i / 3);
      CHECK(r.records[i].seed == i % 3);
      CHECK(r.records[i].success == r.records[i].plan_steps.has_value());
    }
    BenchContext ctx(c);
    std::optional<Plan> plan;
    const RunRecord one = ctx.run(1, 2, &plan);
    CHECK(one.same_outcome(r.records[5]));
    if (one.success) {
      REQUIRE(plan);
      CHECK(validate_solution(*plan, ctx.tasks()[1], ctx.maze(), 0.5));
      CHECK(*one.plan_steps == plan->steps());
    }
  }

  TEST_CASE("solution validation rejects each broken property") {
    const Maze m = testing::open_room(8, 8);
    const Task t{{2, 2}, {3, 2}, 0.5, 5};
    CHECK(validate_solution(Plan({{2, 2}, {2.5, 2}}), t, m, 0.5));
    CHECK_FALSE(validate_solution(Plan({{2.1, 2}, {2.5, 2}}), t, m, 0.5));
    CHECK_FALSE(validate_solution(Plan({{2, 2}, {2.2, 2}}), t, m, 0.5));
    CHECK_FALSE(validate_solution(Plan({{2, 2}, {2, 2}, {2, 2}, {2, 2}, {2, 2}, {2.5, 2}}), t, m, 0.5));
    CHECK_FALSE(validate_solution(Plan({{2, 2}, {3, 2}}), t, m, 0.5));
  }

  TEST_CASE("ablation tables have one row per cell") {
    RunConfig c;
    c.set("tasks.count", "1");
    c.set("seeds", "0");
    c.set("oc.budget", "20");
    const auto b1 = run_ablation("b1", c);
    CHECK(b1.size() == 5);
    const auto b2 = run_ablation("b2", c);
    CHECK(b2.size() == 6);
    const std::string md = format_ablation_table(b2);
    CHECK(count(md, "\n") >= 8);
    CHECK(kind_of([&] { run_ablation("b9", c); }) == ErrorKind::kConfig);
  }
}

TEST_SUITE("render") {
  TEST_CASE("one rect per wall cell and one polyline per plan") {
    const Maze m = bundled_maze("medium");
    const std::vector<TaggedPlan> plans{{Plan({{1.5, 1.5}, {1.9, 1.5}}), true, "a<b"},
                                        {Plan({{1.5, 1.5}, {1.5, 1.9}}), false, ""}};
    SceneMarkers mk;
    mk.start = State{1.5, 1.5};
    mk.goal = State{6.5, 6.5};
    mk.waypoints = {{2.5, 2.5}, {3.5, 3.5}};
    const std::string svg = render_svg(m, plans, mk);
    CHECK(count(svg, "class=\"wall\"") == static_cast<std::size_t>(m.wall_cell_count()));
    CHECK(count(svg, "<polyline") == 2);
    CHECK(count(svg, "class=\"plan\"") == 1);
    CHECK(count(svg, "class=\"discarded\"") == 1);
    CHECK(count(svg, "class=\"waypoint\"") == 2);
    CHECK(count(svg, "a&lt;b") == 1);
    CHECK(svg.rfind("</svg>") != std::string::npos);
  }

  TEST_CASE("tree dumps draw as lines and nodes") {
    const Maze m = testing::open_room(5, 5);
    const std::string dump = "node 0 -1 3 1.5 0 0 1.5 1.5\nnode 1 0 2 1 1 0 2 1.5\nnode 2 0 1 0.5 1 0 1.5 2\n";
    const std::string svg = render_svg(m, {}, {}, dump);
    CHECK(count(svg, "class=\"tree\"") == 2);
    CHECK(count(svg, "class=\"tree-node\"") == 3);
    CHECK(kind_of([&] { render_svg(m, {}, {}, "garbage\n"); }) == ErrorKind::kMalformed);
    CHECK(kind_of([] { write_svg("/no/such/dir/x.svg", "<svg/>"); }) == ErrorKind::kIo);
  }

  TEST_CASE("no plans still gives a walls-only document") {
    const Maze m = bundled_maze("medium");
    const std::string svg = render_svg(m, {}, {});
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.rfind("</svg>") != std::string::npos);
    CHECK(count(svg, "<polyline") == 0);
    CHECK(count(svg, "class=\"wall\"") == static_cast<std::size_t>(m.wall_cell_count()));
  }
}

TEST_SUITE("cli") {
  TEST_CASE("subcommands and exit codes") {
    const fs::path dir = scratch_dir();
    const std::string records = (dir / "r.jsonl").string();
    const std::string summary = (dir / "s.json").string();
    CHECK(run_cli("--list-keys") == 0);
    CHECK(run_cli("run --oc.budget 60 --tasks.count 1 --seeds 0 --records " + records) <= 1);
    std::ifstream in(records);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(parse_record(line).task_id == 0);
    CHECK(run_cli("bench --oc.budget 30 --tasks.count 2 --seeds 0,1 --summary " + summary) == 0);
    CHECK(nlohmann::json::parse(read_text_file(summary))["overall"]["runs"] == 4);
    CHECK(run_cli("run --no.such.key 1") == 2);
    CHECK(run_cli("run --config /no/such/file") == 2);
    CHECK(run_cli("gen-maze --bundled giant --out " + (dir / "g.txt").string()) == 0);
    CHECK(load_maze((dir / "g.txt").string()) == bundled_maze("giant"));
    CHECK(run_cli("render --maze medium --out " + (dir / "m.svg").string()) == 0);
    CHECK(count(read_text_file((dir / "m.svg").string()), "class=\"wall\"") ==
          static_cast<std::size_t>(bundled_maze("medium").wall_cell_count()));
    fs::remove_all(dir);
  }

  TEST_CASE("failed runs: run exits 1, bench only with --strict") {
    // One expansion of one candidate cannot cross the large maze.
    const std::string hard = "--maze large --tasks.min_separation 6 --oc.budget 1 --proposer.n_candidates 1 "
                             "--oc.fast_replanning off --tasks.count 1 --seeds 0";
    CHECK(run_cli("run " + hard) == 1);
    CHECK(run_cli("bench " + hard) == 0);
    CHECK(run_cli("bench --strict " + hard) == 1);
  }
}
