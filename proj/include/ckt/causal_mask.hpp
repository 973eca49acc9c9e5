#pragma once

#include <cstddef>

#include "ckt/adjacency.hpp"
#include "ckt/array.hpp"
#include "ckt/sinkhorn.hpp"
#include "ckt/tape.hpp"

namespace ckt {

enum class StructureMode {
  kFixedDense,  // dense lower triangle, nothing learned
  kLearnable,   // sigmoid(alpha * logits) below the diagonal
};

struct MaskSettings {
  StructureMode mode = StructureMode::kLearnable;
  double alpha = 10.0;
  SinkhornConfig sinkhorn;
};

// Lower-triangular dependency matrix: diagonal pinned to exactly 1, upper
// triangle to exactly 0. In learnable mode the strict lower triangle is
// sigmoid(alpha * logits); in fixed-dense mode it is all ones.
NodeRef build_structure(Tape& tape, NodeRef structure_logits, std::size_t num_skills,
                        const MaskSettings& settings);

struct MaskNodes {
  NodeRef ordering;   // relaxed permutation from the ordering logits
  NodeRef structure;  // lower-triangular dependency matrix
  NodeRef mask;       // ordering * structure * ordering^T
};

MaskNodes build_mask(Tape& tape, NodeRef ordering_logits, NodeRef structure_logits,
                     std::size_t num_skills, const MaskSettings& settings);

// Binarizes the learned structure at the cutoff and relabels it through the
// hard rounding of the ordering, yielding a prerequisite graph over original
// skill indices. The diagonal is never reported.
AdjacencyMatrix extract_adjacency(const Array& structure, const Array& ordering, double cutoff);

// Direct thresholding of any square matrix, diagonal dropped.
AdjacencyMatrix threshold_adjacency(const Array& m, double cutoff);

}  // namespace ckt
