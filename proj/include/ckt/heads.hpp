#pragma once

#include <cstddef>

#include "ckt/tape.hpp"

namespace ckt {

enum class InputMode {
  kEmbedding,  // learned skill embeddings, offset by a correctness vector
  kOneHot,     // +/-1 one-hot over skills, no learned input encoding
};

// Input/output head weights as tape nodes. In one-hot mode only the output
// weights are consulted.
struct HeadWeights {
  NodeRef embeddings;          // D_e x C, one column per skill
  NodeRef correctness_offset;  // D_e, added when correct, subtracted when not
  NodeRef input_weight;        // D_in x D_e affine encoder
  NodeRef input_bias;          // D_in
  NodeRef output_weight;       // 1 x (D_e + C), or 1 x C in one-hot mode
  NodeRef output_bias;         // 1
};

// GRU input vector for one observed (skill, correctness) event.
NodeRef encode_input(Tape& tape, const HeadWeights& heads, std::size_t skill, bool correct,
                     InputMode mode, std::size_t num_skills);

// Probability that the next response on `skill` is correct, read from a state
// whose entries are zeroed except the queried skill's.
NodeRef predict_response(Tape& tape, const HeadWeights& heads, NodeRef state, std::size_t skill,
                         InputMode mode);

}  // namespace ckt
