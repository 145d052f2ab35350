#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cmctd/maze.hpp"
#include "cmctd/plan.hpp"

namespace cmctd {

struct TaggedPlan {
  Plan plan;
  bool accepted = true;  // discarded plans are drawn gray
  std::string label;
};

struct SceneMarkers {
  std::optional<State> start;
  std::optional<State> goal;
  std::vector<State> waypoints;
};

/// Walls as one rect per Wall cell, one polyline per plan, markers as
/// circles, and an optional tree dump drawn as parent-child lines.
std::string render_svg(const Maze& maze, const std::vector<TaggedPlan>& plans, const SceneMarkers& markers = {},
                       const std::string& tree_dump = "");

/// Throws Error{kIo} when the file cannot be written.
void write_svg(const std::string& path, const std::string& svg);

}  // namespace cmctd
