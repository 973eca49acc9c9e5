#pragma once

#include <cstddef>
#include <vector>

#include "ckt/array.hpp"
#include "ckt/tape.hpp"

namespace ckt {

struct SinkhornConfig {
  double temperature = 2.0;  // sharpness of the relaxation
  int unroll = 5;            // number of row+column normalization rounds
};

// Relaxes a square logit matrix into an approximately doubly stochastic
// matrix: exponentiate temperature * (logits - max), then alternate row and
// column normalizations. Columns are normalized last, so column sums come out
// at machine precision while row sums converge with the unroll count.
NodeRef sinkhorn(Tape& tape, NodeRef logits, const SinkhornConfig& config);

// Mean over rows of the row maximum; 1.0 exactly when the matrix is a
// permutation matrix, 1/C for the uniform matrix.
double hardness(const Array& p);

// Greedy rounding to a hard permutation: repeatedly fix the largest remaining
// entry and strike its row and column. Returns r with r[col] = row, i.e. the
// original index assigned to each position.
std::vector<std::size_t> round_to_permutation(const Array& p);

}  // namespace ckt
