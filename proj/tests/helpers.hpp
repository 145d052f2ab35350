#pragma once

#include <string>

#include "cmctd/maze.hpp"

namespace testing {

inline cmctd::Maze open_room(int w, int h) {
  std::string text;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) text += (r == 0 || c == 0 || r == h - 1 || c == w - 1) ? '#' : '.';
    text += '\n';
  }
  return cmctd::parse_maze(text).maze;
}

// Two rooms joined by nothing: the right room is unreachable from the left.
inline cmctd::Maze split_room() {
  return cmctd::parse_maze(
             "#########\n"
             "#...#...#\n"
             "#...#...#\n"
             "#...#...#\n"
             "#########\n")
      .maze;
}

}  // namespace testing
