#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ckt {

// Binary prerequisite graph over dense skill indices. Entry
// (dependent, prerequisite) == 1 means the prerequisite skill feeds the
// dependent one. Reported graphs keep a zero diagonal.
struct AdjacencyMatrix {
  std::size_t size = 0;
  std::vector<std::uint8_t> cells;

  AdjacencyMatrix() = default;
  explicit AdjacencyMatrix(std::size_t n) : size(n), cells(n * n, 0) {}

  bool at(std::size_t dependent, std::size_t prereq) const {
    return cells[dependent * size + prereq] != 0;
  }
  void set(std::size_t dependent, std::size_t prereq, bool v) {
    cells[dependent * size + prereq] = v ? 1 : 0;
  }
  std::size_t edge_count() const {
    std::size_t n = 0;
    for (auto c : cells) n += c;
    return n;
  }

  bool operator==(const AdjacencyMatrix&) const = default;
};

}  // namespace ckt
