#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cmctd {

class Plan;

/// A 2-D position in world units. x grows along columns, y along rows.
struct State {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const State&, const State&) = default;
};

inline State operator+(State a, State b) { return {a.x + b.x, a.y + b.y}; }
inline State operator-(State a, State b) { return {a.x - b.x, a.y - b.y}; }
inline State operator*(double k, State a) { return {k * a.x, k * a.y}; }
inline double norm(State v) { return std::hypot(v.x, v.y); }
inline double distance(State a, State b) { return norm(a - b); }

enum class Cell : std::uint8_t { kWall, kFree };

/// Stop-at-wall keeps states this far (world units) from any wall face.
inline constexpr double kContactMargin = 1e-6;

struct KinematicParams {
  double v_max = 0.5;
  double noise_scale = 1.0;
};

struct Task {
  State start;
  State goal;
  double eps_goal = 0.5;
  int L = 400;
};

/// Occupancy grid. Cell (col, row) covers [col, col+1) x [row, row+1) scaled by
/// cell_size; row 0 is the first text line. Immutable after construction.
class Maze {
 public:
  Maze(int width, int height, std::vector<Cell> cells, double cell_size = 1.0);

  int width() const { return width_; }
  int height() const { return height_; }
  double cell_size() const { return cell_size_; }
  double world_width() const { return width_ * cell_size_; }
  double world_height() const { return height_ * cell_size_; }

  Cell cell(int col, int row) const { return cells_[static_cast<std::size_t>(row) * width_ + col]; }
  bool is_free_cell(int col, int row) const;
  int free_cell_count() const;
  int wall_cell_count() const { return width_ * height_ - free_cell_count(); }

  bool in_bounds(State s) const;
  /// True iff s lies inside the grid and in a Free cell.
  bool is_valid(State s) const;
  State cell_center(int col, int row) const;

  /// Normalized grid text ('#' and '.', one row per line, trailing newline).
  std::string to_text() const;
  /// Hex content digest of to_text(); binds persisted graphs to this maze.
  std::string hash() const;

  friend bool operator==(const Maze& a, const Maze& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.cell_size_ == b.cell_size_ &&
           a.cells_ == b.cells_;
  }

 private:
  int width_;
  int height_;
  double cell_size_;
  std::vector<Cell> cells_;
};

struct ParsedMaze {
  Maze maze;
  std::optional<State> start;  // center of the 'S' cell
  std::optional<State> goal;   // center of the 'G' cell
};

/// Parses '#' (wall), '.', 'S', 'G' (free) rows. The outer ring is forced to
/// Wall. Throws Error{kParse} on empty input, ragged rows, bad characters, or
/// no free cell.
ParsedMaze parse_maze(std::string_view text, double cell_size = 1.0);
Maze load_maze(const std::string& path);

/// Moves s by action clipped to v_max; stops kContactMargin short of the first
/// wall the segment would enter.
State step_dynamics(State s, State action, const KinematicParams& params, const Maze& maze);

/// True iff the closed segment p0-p1 touches only Free cells.
bool segment_collision_free(State p0, State p1, const Maze& maze);

/// Random-walk trajectories with at most h_train states each.
std::vector<Plan> generate_dataset(const Maze& maze, int n, int h_train, const KinematicParams& params,
                                   std::uint64_t seed);

/// Start and goal at Free-cell centers at least min_separation apart.
/// Throws Error{kNoTask} when no pair qualifies within the attempt bound.
Task sample_task(const Maze& maze, double min_separation, std::uint64_t seed, double eps_goal = 0.5,
                 int L = 400);

/// Bundled desk-scale mazes: "medium" (8x8), "large" (12x12), "giant" (20x20).
std::string_view bundled_maze_text(std::string_view name);
Maze bundled_maze(std::string_view name);

/// Random perfect maze on a cols x rows lattice of rooms `corridor` cells
/// wide, separated by one-cell walls, plus `extra_openings` knocked-out walls
/// that add loops. ASCII grid in parse_maze format.
std::string generate_maze_text(int cols, int rows, int corridor, int extra_openings, std::uint64_t seed);

}  // namespace cmctd
