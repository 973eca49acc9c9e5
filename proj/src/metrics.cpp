#include "ckt/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ckt {

PairRelation pair_relation(const AdjacencyMatrix& adj, std::size_t i, std::size_t j) {
  bool forward = adj.at(j, i);   // i prerequisite of j
  bool backward = adj.at(i, j);  // j prerequisite of i
  if (forward && backward) return PairRelation::kBoth;
  if (forward) return PairRelation::kForward;
  if (backward) return PairRelation::kBackward;
  return PairRelation::kNone;
}

StructuralScore structural_f1(const AdjacencyMatrix& predicted, const AdjacencyMatrix& truth) {
  if (predicted.size != truth.size) {
    throw std::invalid_argument("structural_f1: size mismatch " +
                                std::to_string(predicted.size) + " vs " +
                                std::to_string(truth.size));
  }
  std::size_t matches = 0, truth_pairs = 0, predicted_pairs = 0;
  for (std::size_t i = 0; i < truth.size; ++i) {
    for (std::size_t j = i + 1; j < truth.size; ++j) {
      PairRelation t = pair_relation(truth, i, j);
      PairRelation p = pair_relation(predicted, i, j);
      if (t != PairRelation::kNone) ++truth_pairs;
      if (p != PairRelation::kNone) ++predicted_pairs;
      // An exact class match with a non-none class counts toward both
      // numerators at once.
      if (t == p && t != PairRelation::kNone) ++matches;
    }
  }
  StructuralScore score;
  score.recall = truth_pairs ? static_cast<double>(matches) / truth_pairs : 0.0;
  score.precision = predicted_pairs ? static_cast<double>(matches) / predicted_pairs : 0.0;
  score.f1 = (score.precision + score.recall) > 0.0
                 ? 2.0 * score.precision * score.recall / (score.precision + score.recall)
                 : 0.0;
  return score;
}

DagCheck topological_order(const AdjacencyMatrix& adj) {
  std::size_t n = adj.size;
  // indegree of a node = number of prerequisites it depends on
  std::vector<std::size_t> indegree(n, 0);
  for (std::size_t dep = 0; dep < n; ++dep) {
    for (std::size_t pre = 0; pre < n; ++pre) {
      if (adj.at(dep, pre)) ++indegree[dep];
    }
  }

  DagCheck check;
  std::vector<std::size_t> ready;
  for (std::size_t v = 0; v < n; ++v) {
    if (indegree[v] == 0) ready.push_back(v);
  }
  std::vector<bool> emitted(n, false);
  while (!ready.empty()) {
    std::size_t pre = ready.back();
    ready.pop_back();
    emitted[pre] = true;
    check.order.push_back(pre);
    for (std::size_t dep = 0; dep < n; ++dep) {
      if (adj.at(dep, pre) && --indegree[dep] == 0) ready.push_back(dep);
    }
  }
  if (check.order.size() == n) {
    check.is_dag = true;
    return check;
  }

  // Walk prerequisite links inside the leftover subgraph until a node
  // repeats; the segment from its first visit closes a witness cycle.
  check.order.clear();
  std::size_t start = 0;
  while (emitted[start]) ++start;
  std::vector<std::size_t> path;
  std::vector<std::size_t> seen_at(n, n);
  std::size_t v = start;
  while (seen_at[v] == n) {
    seen_at[v] = path.size();
    path.push_back(v);
    for (std::size_t pre = 0; pre < n; ++pre) {
      if (adj.at(v, pre) && !emitted[pre]) {
        v = pre;
        break;
      }
    }
  }
  check.cycle.assign(path.begin() + seen_at[v], path.end());
  check.cycle.push_back(v);
  return check;
}

std::vector<std::pair<std::string, std::string>> edge_list(const AdjacencyMatrix& adj,
                                                           const SkillIndex& skills) {
  if (skills.size() != adj.size) {
    throw std::invalid_argument("edge_list: skill index size does not match adjacency size");
  }
  std::vector<std::pair<std::string, std::string>> edges;
  for (std::size_t dep = 0; dep < adj.size; ++dep) {
    for (std::size_t pre = 0; pre < adj.size; ++pre) {
      if (adj.at(dep, pre)) edges.emplace_back(skills.id_of[pre], skills.id_of[dep]);
    }
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

void write_edge_csv(const std::string& path, const AdjacencyMatrix& adj,
                    const SkillIndex& skills) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_edge_csv: cannot write " + path);
  out << "src_skill_id,dst_skill_id\n";
  for (const auto& [src, dst] : edge_list(adj, skills)) out << src << "," << dst << "\n";
}

std::vector<std::pair<std::string, std::string>> read_edge_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_edge_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_edge_csv: empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "src_skill_id,dst_skill_id") {
    throw std::runtime_error("read_edge_csv: unexpected header in " + path + ": " + line);
  }
  std::vector<std::pair<std::string, std::string>> edges;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw std::runtime_error("read_edge_csv: malformed row at line " +
                               std::to_string(line_no) + " of " + path);
    }
    edges.emplace_back(line.substr(0, comma), line.substr(comma + 1));
  }
  return edges;
}

std::string to_dot(const AdjacencyMatrix& adj, const SkillIndex& skills) {
  std::ostringstream os;
  os << "digraph prerequisites {\n";
  for (std::size_t v = 0; v < adj.size; ++v) {
    os << "  \"" << skills.id_of[v] << "\";\n";
  }
  for (const auto& [src, dst] : edge_list(adj, skills)) {
    os << "  \"" << src << "\" -> \"" << dst << "\";\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace ckt
