#pragma once

#include <vector>

#include "ckt/tape.hpp"

namespace ckt {

// One GRU cell's weights as tape nodes. Recurrent matrices are C x C so the
// hidden state carries one entry per skill; input matrices are C x D_in.
struct GruWeights {
  NodeRef recurrent_update, recurrent_reset, recurrent_cand;
  NodeRef input_update, input_reset, input_cand;
  NodeRef bias_update, bias_reset, bias_cand;
};

// Hadamard-masks the three recurrent matrices; input matrices and biases pass
// through untouched.
GruWeights mask_recurrent(Tape& tape, const GruWeights& weights, NodeRef mask);

// One recurrence step:
//   z = sigmoid(Wz h + Uz x + bz)
//   r = sigmoid(Wr h + Ur x + br)
//   c = tanh(r .* (Wc h) + Uc x + bc)
//   h' = (1 - z) .* h + z .* c
// The reset gate multiplies the recurrent term after the matrix product, so
// the mask's zero pattern is exactly the sparsity of dh'/dh off the diagonal.
NodeRef gru_step(Tape& tape, NodeRef state, NodeRef input, const GruWeights& weights,
                 NodeRef ones);

// States for every step; throws with the step index if a state goes
// non-finite.
std::vector<NodeRef> unroll_sequence(Tape& tape, NodeRef initial_state,
                                     const std::vector<NodeRef>& inputs,
                                     const GruWeights& weights, NodeRef ones);

}  // namespace ckt
