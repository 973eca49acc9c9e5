#include "ckt/causal_mask.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace ckt {

namespace {

void require_cutoff(double cutoff) {
  if (!(cutoff > 0.0 && cutoff < 1.0)) {
    throw std::invalid_argument("adjacency cutoff must lie in (0,1), got " +
                                std::to_string(cutoff));
  }
}

}  // namespace

NodeRef build_structure(Tape& tape, NodeRef structure_logits, std::size_t num_skills,
                        const MaskSettings& settings) {
  if (settings.mode == StructureMode::kFixedDense) {
    return tape.constant(Array::lower_triangle_ones(num_skills));
  }
  if (!(settings.alpha > 0.0)) {
    throw std::invalid_argument("build_structure: alpha must be positive");
  }
  const Array& lv = tape.val(structure_logits);
  if (lv.ndim() != 2 || lv.rows() != num_skills || lv.cols() != num_skills) {
    throw std::invalid_argument("build_structure: logits shape " + lv.shape_string() +
                                " does not match skill count " + std::to_string(num_skills));
  }
  // Multiplying by the strict-lower mask zeroes the upper triangle exactly
  // (and cuts its gradient); adding the identity pins the diagonal to 1.
  NodeRef soft = tape.sigmoid(tape.scale(structure_logits, settings.alpha));
  NodeRef strict = tape.mul(soft, tape.constant(Array::strict_lower_mask(num_skills)));
  return tape.add(strict, tape.constant(Array::identity(num_skills)));
}

MaskNodes build_mask(Tape& tape, NodeRef ordering_logits, NodeRef structure_logits,
                     std::size_t num_skills, const MaskSettings& settings) {
  MaskNodes nodes;
  nodes.ordering = sinkhorn(tape, ordering_logits, settings.sinkhorn);
  nodes.structure = build_structure(tape, structure_logits, num_skills, settings);
  nodes.mask = tape.matmul(tape.matmul(nodes.ordering, nodes.structure),
                           tape.transpose(nodes.ordering));
  return nodes;
}

AdjacencyMatrix extract_adjacency(const Array& structure, const Array& ordering, double cutoff) {
  require_cutoff(cutoff);
  if (structure.ndim() != 2 || structure.rows() != structure.cols() ||
      !ordering.same_shape(structure)) {
    throw std::invalid_argument("extract_adjacency: structure " + structure.shape_string() +
                                " and ordering " + ordering.shape_string() +
                                " must be square and equal-sized");
  }
  std::size_t n = structure.rows();
  std::vector<std::size_t> skill_at = round_to_permutation(ordering);
  AdjacencyMatrix adj(n);
  // Position b precedes position a, so a surviving entry (a,b) reads
  // "skill_at[b] is a prerequisite of skill_at[a]".
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      if (structure.at(a, b) >= cutoff) adj.set(skill_at[a], skill_at[b], true);
    }
  }
  return adj;
}

AdjacencyMatrix threshold_adjacency(const Array& m, double cutoff) {
  require_cutoff(cutoff);
  if (m.ndim() != 2 || m.rows() != m.cols()) {
    throw std::invalid_argument("threshold_adjacency: square matrix required, got " +
                                m.shape_string());
  }
  std::size_t n = m.rows();
  AdjacencyMatrix adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      if (i != k && m.at(i, k) >= cutoff) adj.set(i, k, true);
    }
  }
  return adj;
}

}  // namespace ckt
