#include "cmctd/maze.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "cmctd/error.hpp"
#include "cmctd/plan.hpp"
#include "cmctd/rng.hpp"

namespace cmctd {

Maze::Maze(int width, int height, std::vector<Cell> cells, double cell_size)
    : width_(width), height_(height), cell_size_(cell_size), cells_(std::move(cells)) {
  if (width_ <= 0 || height_ <= 0 || cells_.size() != static_cast<std::size_t>(width_) * height_)
    throw Error(ErrorKind::kContract, "maze dimensions do not match cell count");
  if (!(cell_size_ > 0.0)) throw Error(ErrorKind::kContract, "cell_size must be positive");
  for (int c = 0; c < width_; ++c) {
    cells_[c] = Cell::kWall;
    cells_[static_cast<std::size_t>(height_ - 1) * width_ + c] = Cell::kWall;
  }
  for (int r = 0; r < height_; ++r) {
    cells_[static_cast<std::size_t>(r) * width_] = Cell::kWall;
    cells_[static_cast<std::size_t>(r) * width_ + width_ - 1] = Cell::kWall;
  }
  if (free_cell_count() == 0) throw Error(ErrorKind::kParse, "maze has no free cell");
}

bool Maze::is_free_cell(int col, int row) const {
  if (col < 0 || row < 0 || col >= width_ || row >= height_) return false;
  return cell(col, row) == Cell::kFree;
}

int Maze::free_cell_count() const {
  return static_cast<int>(std::count(cells_.begin(), cells_.end(), Cell::kFree));
}

bool Maze::in_bounds(State s) const {
  return s.x >= 0.0 && s.y >= 0.0 && s.x < world_width() && s.y < world_height();
}

bool Maze::is_valid(State s) const {
  if (!in_bounds(s)) return false;
  return is_free_cell(static_cast<int>(std::floor(s.x / cell_size_)),
                      static_cast<int>(std::floor(s.y / cell_size_)));
}

State Maze::cell_center(int col, int row) const {
  return {(col + 0.5) * cell_size_, (row + 0.5) * cell_size_};
}

std::string Maze::to_text() const {
  std::string out;
  out.reserve(static_cast<std::size_t>(width_ + 1) * height_);
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) out += cell(c, r) == Cell::kWall ? '#' : '.';
    out += '\n';
  }
  return out;
}

std::string Maze::hash() const {
  // FNV-1a over the normalized text, cell size folded in.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](unsigned char byte) {
    h ^= byte;
    h *= 0x100000001b3ULL;
  };
  for (char ch : to_text()) feed(static_cast<unsigned char>(ch));
  char size_text[32];
  std::snprintf(size_text, sizeof size_text, "cs=%.17g", cell_size_);
  for (const char* p = size_text; *p; ++p) feed(static_cast<unsigned char>(*p));
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

ParsedMaze parse_maze(std::string_view text, double cell_size) {
  std::vector<std::string> rows;
  std::string current;
  for (char ch : text) {
    if (ch == '\r') continue;
    if (ch == '\n') {
      rows.push_back(current);
      current.clear();
    } else {
      current += ch;
    }
  }
  if (!current.empty()) rows.push_back(current);
  while (!rows.empty() && rows.back().empty()) rows.pop_back();
  if (rows.empty()) throw Error(ErrorKind::kParse, "empty maze text");

  const std::size_t width = rows.front().size();
  if (width == 0) throw Error(ErrorKind::kParse, "empty first row");
  std::vector<Cell> cells;
  cells.reserve(width * rows.size());
  std::optional<std::pair<int, int>> start_cell, goal_cell;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != width)
      throw Error(ErrorKind::kParse, "ragged rows: row " + std::to_string(r) + " has width " +
                                         std::to_string(rows[r].size()) + ", expected " +
                                         std::to_string(width));
    for (std::size_t c = 0; c < width; ++c) {
      switch (rows[r][c]) {
        case '#': cells.push_back(Cell::kWall); break;
        case '.': cells.push_back(Cell::kFree); break;
        case 'S':
          cells.push_back(Cell::kFree);
          start_cell = {static_cast<int>(c), static_cast<int>(r)};
          break;
        case 'G':
          cells.push_back(Cell::kFree);
          goal_cell = {static_cast<int>(c), static_cast<int>(r)};
          break;
        default:
          throw Error(ErrorKind::kParse, std::string("unexpected character '") + rows[r][c] + "'");
      }
    }
  }
  ParsedMaze parsed{Maze(static_cast<int>(width), static_cast<int>(rows.size()), std::move(cells), cell_size),
                    std::nullopt, std::nullopt};
  auto center_if_free = [&parsed](const std::optional<std::pair<int, int>>& at) -> std::optional<State> {
    if (!at || !parsed.maze.is_free_cell(at->first, at->second)) return std::nullopt;
    return parsed.maze.cell_center(at->first, at->second);
  };
  parsed.start = center_if_free(start_cell);
  parsed.goal = center_if_free(goal_cell);
  return parsed;
}

Maze load_maze(const std::string& path) {
  if (path == "medium" || path == "large" || path == "giant") return bundled_maze(path);
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open maze file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_maze(buffer.str()).maze;
}

namespace {

/// Earliest parameter t in [0, 1] at which p0 + t (p1 - p0) touches the closed
/// box [lo, hi]; nullopt when it never does.
std::optional<double> segment_box_entry(State p0, State d, State lo, State hi) {
  double t_min = 0.0;
  double t_max = 1.0;
  const double origin[2] = {p0.x, p0.y};
  const double delta[2] = {d.x, d.y};
  const double box_lo[2] = {lo.x, lo.y};
  const double box_hi[2] = {hi.x, hi.y};
  for (int axis = 0; axis < 2; ++axis) {
    if (delta[axis] == 0.0) {
      if (origin[axis] < box_lo[axis] || origin[axis] > box_hi[axis]) return std::nullopt;
      continue;
    }
    double t0 = (box_lo[axis] - origin[axis]) / delta[axis];
    double t1 = (box_hi[axis] - origin[axis]) / delta[axis];
    if (t0 > t1) std::swap(t0, t1);
    t_min = std::max(t_min, t0);
    t_max = std::min(t_max, t1);
    if (t_min > t_max) return std::nullopt;
  }
  return t_min;
}

/// Earliest wall contact along the segment, over every wall cell whose closed
/// box can touch it.
std::optional<double> first_wall_contact(State p0, State p1, const Maze& maze) {
  const double cs = maze.cell_size();
  const int c0 = static_cast<int>(std::floor(std::min(p0.x, p1.x) / cs)) - 1;
  const int c1 = static_cast<int>(std::floor(std::max(p0.x, p1.x) / cs)) + 1;
  const int r0 = static_cast<int>(std::floor(std::min(p0.y, p1.y) / cs)) - 1;
  const int r1 = static_cast<int>(std::floor(std::max(p0.y, p1.y) / cs)) + 1;
  const State d = p1 - p0;
  std::optional<double> best;
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      if (maze.is_free_cell(c, r)) continue;
      const auto t = segment_box_entry(p0, d, {c * cs, r * cs}, {(c + 1) * cs, (r + 1) * cs});
      if (t && (!best || *t < *best)) best = t;
    }
  }
  return best;
}

}  // namespace

bool segment_collision_free(State p0, State p1, const Maze& maze) {
  return !first_wall_contact(p0, p1, maze).has_value();
}

State step_dynamics(State s, State action, const KinematicParams& params, const Maze& maze) {
  const double magnitude = norm(action);
  if (magnitude == 0.0 || !maze.is_valid(s)) return s;
  const State d = magnitude > params.v_max ? (params.v_max / magnitude) * action : action;
  const State target = s + d;
  const auto contact = first_wall_contact(s, target, maze);
  if (!contact) return target;

  const double length = norm(d);
  const State dir = (1.0 / length) * d;
  double travel = *contact * length - kContactMargin;
  // Grazing contacts can round a hair past the face; back off until legal.
  for (int attempt = 0; attempt < 8 && travel > 0.0; ++attempt) {
    const State candidate = s + travel * dir;
    if (maze.is_valid(candidate) && segment_collision_free(s, candidate, maze)) return candidate;
    travel = attempt < 4 ? travel - kContactMargin : travel * 0.5;
  }
  return s;
}

std::vector<Plan> generate_dataset(const Maze& maze, int n, int h_train, const KinematicParams& params,
                                   std::uint64_t seed) {
  if (n < 0 || h_train < 1) throw Error(ErrorKind::kContract, "generate_dataset needs n >= 0, h_train >= 1");
  std::vector<std::pair<int, int>> free_cells;
  for (int r = 0; r < maze.height(); ++r)
    for (int c = 0; c < maze.width(); ++c)
      if (maze.is_free_cell(c, r)) free_cells.emplace_back(c, r);

  std::vector<Plan> dataset;
  dataset.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    const auto [col, row] = free_cells[rng.index(free_cells.size())];
    const double cs = maze.cell_size();
    State s{(col + rng.uniform(0.05, 0.95)) * cs, (row + rng.uniform(0.05, 0.95)) * cs};
    std::vector<State> states{s};
    for (int t = 1; t < h_train; ++t) {
      const double angle = rng.uniform(0.0, 2.0 * M_PI);
      s = step_dynamics(s, {params.v_max * std::cos(angle), params.v_max * std::sin(angle)}, params, maze);
      states.push_back(s);
    }
    dataset.emplace_back(std::move(states), std::vector<SegmentMarker>{{static_cast<std::uint64_t>(i), 0.0, 0}});
  }
  return dataset;
}

Task sample_task(const Maze& maze, double min_separation, std::uint64_t seed, double eps_goal, int L) {
  std::vector<State> centers;
  for (int r = 0; r < maze.height(); ++r)
    for (int c = 0; c < maze.width(); ++c)
      if (maze.is_free_cell(c, r)) centers.push_back(maze.cell_center(c, r));
  if (centers.size() < 2) throw Error(ErrorKind::kNoTask, "maze needs at least two free cells");

  Rng rng(derive_seed(seed, {0x7a5c}));
  constexpr int kAttempts = 10000;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    const State start = centers[rng.index(centers.size())];
    const State goal = centers[rng.index(centers.size())];
    if (start == goal) continue;
    if (distance(start, goal) >= min_separation) return Task{start, goal, eps_goal, L};
  }
  throw Error(ErrorKind::kNoTask, "no free pair at separation " + std::to_string(min_separation));
}

namespace {

constexpr std::string_view kMediumMaze =
    "########\n"
    "#..#...#\n"
    "#..#.#.#\n"
    "#....#.#\n"
    "###.##.#\n"
    "#......#\n"
    "#.#..#.#\n"
    "########\n";

constexpr std::string_view kLargeMaze =
    "############\n"
    "#..........#\n"
    "#..........#\n"
    "#########..#\n"
    "#..........#\n"
    "#..........#\n"
    "#..#########\n"
    "#..........#\n"
    "#..........#\n"
    "#########..#\n"
    "#..........#\n"
    "############\n";

constexpr std::string_view kGiantMaze =
    "####################\n"
    "#..#..............##\n"
    "#..#..............##\n"
    "#..#..##########..##\n"
    "#..#..#...........##\n"
    "#..#..#...........##\n"
    "#..#..##########..##\n"
    "#..#...........#..##\n"
    "#..#...........#..##\n"
    "#..##########..#..##\n"
    "#.....#........#..##\n"
    "#.....#........#..##\n"
    "####..#..#######..##\n"
    "#.....#..#.....#..##\n"
    "#.....#..#.....#..##\n"
    "#..#..#..#..#..#..##\n"
    "#........#..#.....##\n"
    "#........#..#.....##\n"
    "####################\n"
    "####################\n";

}  // namespace

std::string_view bundled_maze_text(std::string_view name) {
  if (name == "medium") return kMediumMaze;
  if (name == "large") return kLargeMaze;
  if (name == "giant") return kGiantMaze;
  throw Error(ErrorKind::kConfig, "unknown bundled maze '" + std::string(name) + "'");
}

Maze bundled_maze(std::string_view name) { return parse_maze(bundled_maze_text(name)).maze; }

std::string generate_maze_text(int cols, int rows, int corridor, int extra_openings, std::uint64_t seed) {
  if (cols < 1 || rows < 1 || corridor < 1 || extra_openings < 0)
    throw Error(ErrorKind::kContract, "maze lattice dimensions must be positive");
  const int pitch = corridor + 1;
  const int width = 1 + cols * pitch;
  const int height = 1 + rows * pitch;
  std::vector<std::string> grid(static_cast<std::size_t>(height), std::string(static_cast<std::size_t>(width), '#'));
  const auto open_room = [&](int i, int j) {
    for (int a = 0; a < corridor; ++a)
      for (int b = 0; b < corridor; ++b) grid[1 + j * pitch + a][1 + i * pitch + b] = '.';
  };
  // Wall between room (i, j) and its right (dir 0) or lower (dir 1) neighbor.
  const auto open_wall = [&](int i, int j, int dir) {
    for (int a = 0; a < corridor; ++a) {
      if (dir == 0) grid[1 + j * pitch + a][(i + 1) * pitch] = '.';
      else grid[(j + 1) * pitch][1 + i * pitch + a] = '.';
    }
  };

  Rng rng(seed);
  std::vector<char> seen(static_cast<std::size_t>(cols * rows), 0);
  std::vector<std::pair<int, int>> stack{{0, 0}};
  seen[0] = 1;
  open_room(0, 0);
  while (!stack.empty()) {
    const auto [i, j] = stack.back();
    std::vector<std::pair<int, int>> next;
    const int di[] = {1, -1, 0, 0};
    const int dj[] = {0, 0, 1, -1};
    for (int d = 0; d < 4; ++d) {
      const int a = i + di[d];
      const int b = j + dj[d];
      if (a >= 0 && a < cols && b >= 0 && b < rows && !seen[static_cast<std::size_t>(b * cols + a)])
        next.emplace_back(a, b);
    }
    if (next.empty()) {
      stack.pop_back();
      continue;
    }
    const auto [a, b] = next[rng.index(next.size())];
    seen[static_cast<std::size_t>(b * cols + a)] = 1;
    open_room(a, b);
    if (a != i) open_wall(std::min(a, i), j, 0);
    else open_wall(i, std::min(b, j), 1);
    stack.emplace_back(a, b);
  }
  for (int k = 0; k < extra_openings; ++k) {
    const bool horizontal = cols > 1 && (rows == 1 || rng.uniform() < 0.5);
    if (horizontal) open_wall(static_cast<int>(rng.index(static_cast<std::size_t>(cols - 1))),
                              static_cast<int>(rng.index(static_cast<std::size_t>(rows))), 0);
    else if (rows > 1) open_wall(static_cast<int>(rng.index(static_cast<std::size_t>(cols))),
                                 static_cast<int>(rng.index(static_cast<std::size_t>(rows - 1))), 1);
  }
  std::string out;
  for (const auto& row : grid) out += row + "\n";
  return out;
}

}  // namespace cmctd
