#include "cmctd/plan_graph.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "cmctd/error.hpp"

namespace cmctd {

std::size_t ConnectivityGraph::add_vertex(State s) {
  vertices_.push_back(s);
  return vertices_.size() - 1;
}

const GraphEdge* ConnectivityGraph::find_edge(std::size_t from, std::size_t to) const {
  for (const auto& e : edges_)
    if (e.from == from && e.to == to) return &e;
  return nullptr;
}

bool ConnectivityGraph::add_edge(std::size_t from, std::size_t to, Plan plan, std::optional<double> tolerance) {
  if (from >= vertices_.size() || to >= vertices_.size())
    throw Error(ErrorKind::kContract, "edge endpoint out of range");
  if (from == to) throw Error(ErrorKind::kContract, "self-edges are not allowed");
  if (!(plan.front() == vertices_[from]))
    throw Error(ErrorKind::kContract, "edge plan must start exactly at its from-vertex");
  const double tol = tolerance.value_or(eps_stitch_);
  if (distance(plan.back(), vertices_[to]) > tol)
    throw Error(ErrorKind::kContract, "edge plan ends " + std::to_string(distance(plan.back(), vertices_[to])) +
                                          " from its to-vertex (tolerance " + std::to_string(tol) + ")");
  const std::size_t cost = plan.size() - 1;
  for (auto& e : edges_) {
    if (e.from == from && e.to == to) {
      if (cost >= e.cost) return false;
      e.plan = std::move(plan);
      e.cost = cost;
      return true;
    }
  }
  edges_.push_back(GraphEdge{from, to, std::move(plan), cost});
  return true;
}

std::optional<GraphPath> shortest_path(const ConnectivityGraph& graph, std::size_t source, std::size_t target,
                                       std::optional<AStarHeuristic> heuristic) {
  const std::size_t n = graph.vertices().size();
  if (source >= n || target >= n) throw Error(ErrorKind::kContract, "path endpoint out of range");
  if (source == target) return GraphPath{source, target, {}, 0};

  std::vector<std::vector<std::size_t>> out(n);
  for (std::size_t i = 0; i < graph.edges().size(); ++i) out[graph.edges()[i].from].push_back(i);

  const State goal = graph.vertices()[target];
  auto h = [&](std::size_t v) -> double {
    if (!heuristic) return 0.0;
    return distance(graph.vertices()[v], goal) * heuristic->steps_per_unit * (1.0 - 1e-12);
  };

  constexpr auto kInf = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(n, kInf);
  std::vector<std::optional<std::size_t>> via(n);
  std::vector<bool> done(n, false);
  using Entry = std::tuple<double, std::size_t, std::size_t>;  // f, g, vertex
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  dist[source] = 0;
  open.emplace(h(source), 0, source);
  while (!open.empty()) {
    const auto [f, g, v] = open.top();
    open.pop();
    if (done[v] || g != dist[v]) continue;
    done[v] = true;
    if (v == target) break;
    for (std::size_t ei : out[v]) {
      const GraphEdge& e = graph.edges()[ei];
      const std::size_t cand = g + e.cost;
      if (cand < dist[e.to]) {
        dist[e.to] = cand;
        via[e.to] = ei;
        open.emplace(static_cast<double>(cand) + h(e.to), cand, e.to);
      }
    }
  }
  if (dist[target] == kInf) return std::nullopt;

  GraphPath path{source, target, {}, dist[target]};
  for (std::size_t v = target; v != source;) {
    const std::size_t ei = *via[v];
    path.edges.push_back(ei);
    v = graph.edges()[ei].from;
  }
  std::reverse(path.edges.begin(), path.edges.end());
  return path;
}

Plan synthesize_plan(const ConnectivityGraph& graph, const GraphPath& path) {
  if (path.edges.empty()) return Plan(graph.vertices().at(path.source));
  std::vector<State> states;
  std::vector<SegmentMarker> markers;
  std::optional<std::size_t> expected_from = path.source;
  for (std::size_t ei : path.edges) {
    const GraphEdge& e = graph.edges().at(ei);
    if (expected_from && e.from != *expected_from)
      throw Error(ErrorKind::kContract, "path edges are not consecutive");
    std::size_t skip = 0;
    if (!states.empty()) {
      const double gap = distance(states.back(), e.plan.front());
      if (gap > graph.eps_stitch())
        throw Error(ErrorKind::kJunctionMismatch, "junction gap " + std::to_string(gap) + " exceeds eps_stitch");
      if (gap == 0.0) skip = 1;
    }
    // e.plan[k] lands at base + k - skip; with skip = 1 the shared junction
    // already sits at base - 1.
    const std::size_t base = states.size();
    for (SegmentMarker m : e.plan.provenance()) {
      m.start_index = base + m.start_index - skip;
      markers.push_back(m);
    }
    states.insert(states.end(), e.plan.states().begin() + static_cast<std::ptrdiff_t>(skip), e.plan.states().end());
    expected_from = e.to;
  }
  if (expected_from != path.target) throw Error(ErrorKind::kContract, "path does not end at its target");
  return Plan(std::move(states), std::move(markers));
}

namespace {

using nlohmann::json;

json encode_plan(const Plan& plan) {
  json states = json::array();
  for (State s : plan.states()) states.push_back({s.x, s.y});
  json marks = json::array();
  for (const auto& m : plan.provenance()) marks.push_back({m.segment_id, m.guidance, m.start_index});
  return {{"states", states}, {"segments", marks}};
}

State decode_state(const json& j) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorKind::kMalformed, "state must be [x, y]");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

}  // namespace

std::string encode_graph(const ConnectivityGraph& graph) {
  json vertices = json::array();
  for (State s : graph.vertices()) vertices.push_back({s.x, s.y});
  json edges = json::array();
  for (const auto& e : graph.edges()) {
    json plan = encode_plan(e.plan);
    edges.push_back({{"from", e.from}, {"to", e.to}, {"cost", e.cost}, {"states", plan["states"]},
                     {"segments", plan["segments"]}});
  }
  json doc = {{"version", kGraphFormatVersion}, {"maze_hash", graph.maze_hash()},
              {"eps_stitch", graph.eps_stitch()}, {"vertices", vertices},
              {"edges", edges}};
  return doc.dump(1) + "\n";
}

ConnectivityGraph decode_graph(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kMalformed, e.what());
  }
  try {
    if (!doc.is_object() || !doc.contains("version")) throw Error(ErrorKind::kMalformed, "missing version");
    const int version = doc.at("version").get<int>();
    if (version != kGraphFormatVersion)
      throw Error(ErrorKind::kCodecVersion, "graph format version " + std::to_string(version) + ", expected " +
                                                std::to_string(kGraphFormatVersion));
    std::vector<State> vertices;
    for (const auto& v : doc.at("vertices")) vertices.push_back(decode_state(v));
    ConnectivityGraph graph(std::move(vertices), doc.at("maze_hash").get<std::string>(),
                            doc.at("eps_stitch").get<double>());
    for (const auto& e : doc.at("edges")) {
      std::vector<State> states;
      for (const auto& s : e.at("states")) states.push_back(decode_state(s));
      std::vector<SegmentMarker> marks;
      for (const auto& m : e.at("segments"))
        marks.push_back({m.at(0).get<std::uint64_t>(), m.at(1).get<double>(), m.at(2).get<std::size_t>()});
      Plan plan(std::move(states), std::move(marks));
      const auto from = e.at("from").get<std::size_t>();
      const auto to = e.at("to").get<std::size_t>();
      if (e.at("cost").get<std::size_t>() != plan.size() - 1)
        throw Error(ErrorKind::kMalformed, "edge cost does not match its plan");
      // Stored edges carry their own tolerance (goal edges may use eps_goal).
      graph.add_edge(from, to, std::move(plan), std::numeric_limits<double>::infinity());
    }
    return graph;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kMalformed, e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kContract) throw Error(ErrorKind::kMalformed, e.what());
    throw;
  }
}

ConnectivityGraph decode_graph_for(const std::string& text, const std::string& maze_hash) {
  ConnectivityGraph graph = decode_graph(text);
  if (graph.maze_hash() != maze_hash)
    throw Error(ErrorKind::kMazeHashMismatch, "graph built for maze " + graph.maze_hash() + ", not " + maze_hash);
  return graph;
}

void save_graph(const std::string& path, const ConnectivityGraph& graph) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  out << encode_graph(graph);
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace cmctd
