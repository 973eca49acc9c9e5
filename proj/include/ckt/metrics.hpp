#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ckt/adjacency.hpp"
#include "ckt/data.hpp"

namespace ckt {

// Directed relationship of an unordered skill pair (i < j).
enum class PairRelation {
  kNone,
  kForward,   // i is a prerequisite of j
  kBackward,  // j is a prerequisite of i
  kBoth,
};

PairRelation pair_relation(const AdjacencyMatrix& adj, std::size_t i, std::size_t j);

struct StructuralScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Pairwise-relationship F1: every unordered pair is classified in both
// matrices; recall counts exact class matches among the truth's non-none
// pairs, precision among the prediction's non-none pairs. Zero when a
// denominator is zero.
StructuralScore structural_f1(const AdjacencyMatrix& predicted, const AdjacencyMatrix& truth);

struct DagCheck {
  bool is_dag = false;
  std::vector<std::size_t> order;  // topological order when is_dag
  std::vector<std::size_t> cycle;  // witness cycle (first == last) otherwise
};

// Kahn's algorithm over prerequisite -> dependent edges.
DagCheck topological_order(const AdjacencyMatrix& adj);

// Edge list as (prerequisite, dependent) pairs of original ids, sorted.
std::vector<std::pair<std::string, std::string>> edge_list(const AdjacencyMatrix& adj,
                                                           const SkillIndex& skills);

void write_edge_csv(const std::string& path, const AdjacencyMatrix& adj,
                    const SkillIndex& skills);
std::vector<std::pair<std::string, std::string>> read_edge_csv(const std::string& path);

// DOT digraph with prerequisite -> dependent arrows, nodes labeled by
// original ids.
std::string to_dot(const AdjacencyMatrix& adj, const SkillIndex& skills);

}  // namespace ckt
