#include "cmctd/render.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "cmctd/error.hpp"

namespace cmctd {

namespace {

constexpr double kScale = 20.0;  // px per world unit

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void circle(std::ostringstream& o, State s, double r, const char* fill, const char* cls) {
  o << "  <circle class=\"" << cls << "\" cx=\"" << s.x * kScale << "\" cy=\"" << s.y * kScale << "\" r=\"" << r
    << "\" fill=\"" << fill << "\"/>\n";
}

}  // namespace

std::string render_svg(const Maze& maze, const std::vector<TaggedPlan>& plans, const SceneMarkers& markers,
                       const std::string& tree_dump) {
  const double cs = maze.cell_size();
  const double w = maze.width() * cs * kScale;
  const double h = maze.height() * cs * kScale;
  std::ostringstream o;
  o.precision(6);
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
    << ' ' << h << "\">\n";
  o << "  <rect class=\"floor\" x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h << "\" fill=\"#ffffff\"/>\n";
  for (int r = 0; r < maze.height(); ++r) {
    for (int c = 0; c < maze.width(); ++c) {
      if (maze.is_free_cell(c, r)) continue;
      o << "  <rect class=\"wall\" x=\"" << c * cs * kScale << "\" y=\"" << r * cs * kScale << "\" width=\""
        << cs * kScale << "\" height=\"" << cs * kScale << "\" fill=\"#333333\"/>\n";
    }
  }

  if (!tree_dump.empty()) {
    std::map<long long, State> pos;
    std::vector<std::pair<long long, long long>> links;
    std::istringstream in(tree_dump);
    std::string line;
    while (std::getline(in, line)) {
      std::istringstream f(line);
      std::string tag;
      long long id = 0, parent = 0;
      double visits = 0, value = 0, x = 0, y = 0;
      int depth = 0, terminal = 0;
      if (!(f >> tag >> id >> parent >> visits >> value >> depth >> terminal >> x >> y) || tag != "node")
        throw Error(ErrorKind::kMalformed, "bad tree dump line '" + line + "'");
      pos[id] = State{x, y};
      if (parent >= 0) links.emplace_back(parent, id);
    }
    for (auto [p, c] : links) {
      if (!pos.count(p)) continue;
      o << "  <line class=\"tree\" x1=\"" << pos[p].x * kScale << "\" y1=\"" << pos[p].y * kScale << "\" x2=\""
        << pos[c].x * kScale << "\" y2=\"" << pos[c].y * kScale
        << "\" stroke=\"#6a8caf\" stroke-width=\"1\" stroke-dasharray=\"3,2\"/>\n";
    }
    for (const auto& [id, s] : pos) circle(o, s, 2.0, "#6a8caf", "tree-node");
  }

  // Discarded plans first so accepted ones draw on top.
  for (int pass = 0; pass < 2; ++pass) {
    for (const TaggedPlan& tp : plans) {
      if (tp.accepted != (pass == 1)) continue;
      o << "  <polyline class=\"" << (tp.accepted ? "plan" : "discarded") << "\" fill=\"none\" stroke=\""
        << (tp.accepted ? "#d62728" : "#aaaaaa") << "\" stroke-width=\"" << (tp.accepted ? 2 : 1) << "\" points=\"";
      for (std::size_t i = 0; i < tp.plan.size(); ++i) {
        if (i) o << ' ';
        o << tp.plan[i].x * kScale << ',' << tp.plan[i].y * kScale;
      }
      o << "\">";
      if (!tp.label.empty()) o << "<title>" << escape(tp.label) << "</title>";
      o << "</polyline>\n";
    }
  }

  for (State s : markers.waypoints) circle(o, s, 4.0, "#1f77b4", "waypoint");
  if (markers.start) circle(o, *markers.start, 6.0, "#2ca02c", "start");
  if (markers.goal) circle(o, *markers.goal, 6.0, "#ff7f0e", "goal");
  o << "</svg>\n";
  return o.str();
}

void write_svg(const std::string& path, const std::string& svg) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  out << svg;
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path);
}

}  // namespace cmctd
