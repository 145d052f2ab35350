#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cmctd/plan.hpp"

namespace cmctd {

struct GraphEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  Plan plan;
  std::size_t cost = 0;  // steps, plan.size() - 1

  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

/// Directed connectivity graph whose edges carry executable plans. Each
/// edge plan starts exactly at its from-vertex and ends within the edge
/// tolerance of its to-vertex; at most one edge per ordered pair.
class ConnectivityGraph {
 public:
  ConnectivityGraph() = default;
  ConnectivityGraph(std::vector<State> vertices, std::string maze_hash, double eps_stitch)
      : vertices_(std::move(vertices)), maze_hash_(std::move(maze_hash)), eps_stitch_(eps_stitch) {}

  const std::vector<State>& vertices() const { return vertices_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }
  const std::string& maze_hash() const { return maze_hash_; }
  double eps_stitch() const { return eps_stitch_; }

  std::size_t add_vertex(State s);
  const GraphEdge* find_edge(std::size_t from, std::size_t to) const;

  /// Inserts (from -> to, plan), keeping the cheaper of parallel edges.
  /// `tolerance` defaults to eps_stitch. Returns true when the graph changed.
  /// Throws Error{kContract} on self-edges or endpoint violations.
  bool add_edge(std::size_t from, std::size_t to, Plan plan, std::optional<double> tolerance = std::nullopt);

  friend bool operator==(const ConnectivityGraph&, const ConnectivityGraph&) = default;

 private:
  std::vector<State> vertices_;
  std::vector<GraphEdge> edges_;
  std::string maze_hash_;
  double eps_stitch_ = 0.5;
};

struct GraphPath {
  std::size_t source = 0;
  std::size_t target = 0;
  std::vector<std::size_t> edges;  // indices into graph.edges()
  std::size_t cost = 0;
};

/// Euclidean A* bound. Exact when every edge cost is at least
/// steps_per_unit times the distance between its vertices (1 / v_max for
/// edges that end on their vertex); edges closing a stitch gap can undercut
/// that by a step, so composers stay on Dijkstra.
struct AStarHeuristic {
  double steps_per_unit = 2.0;
};

/// Dijkstra over step costs, or A* with a Euclidean lower bound when a
/// heuristic is supplied. Ties resolve toward lower vertex indices.
std::optional<GraphPath> shortest_path(const ConnectivityGraph& graph, std::size_t source, std::size_t target,
                                       std::optional<AStarHeuristic> heuristic = std::nullopt);

/// Concatenates edge plans along the path. Exact junctions are kept once; a
/// gap up to eps_stitch is traversed as one step. Throws
/// Error{kJunctionMismatch} when a gap exceeds eps_stitch.
Plan synthesize_plan(const ConnectivityGraph& graph, const GraphPath& path);

inline constexpr int kGraphFormatVersion = 1;

std::string encode_graph(const ConnectivityGraph& graph);
/// Throws Error{kCodecVersion} or Error{kMalformed}.
ConnectivityGraph decode_graph(const std::string& text);
/// decode_graph plus Error{kMazeHashMismatch} when the graph was built for a
/// different maze.
ConnectivityGraph decode_graph_for(const std::string& text, const std::string& maze_hash);

void save_graph(const std::string& path, const ConnectivityGraph& graph);
std::string read_text_file(const std::string& path);

}  // namespace cmctd
