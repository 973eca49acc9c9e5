#include "ckt/heads.hpp"

#include <stdexcept>
#include <string>

namespace ckt {

namespace {

void require_skill(std::size_t skill, std::size_t num_skills, const char* op) {
  if (skill >= num_skills) {
    throw std::out_of_range(std::string(op) + ": unknown skill index " + std::to_string(skill) +
                            " (have " + std::to_string(num_skills) + ")");
  }
}

}  // namespace

NodeRef encode_input(Tape& tape, const HeadWeights& heads, std::size_t skill, bool correct,
                     InputMode mode, std::size_t num_skills) {
  require_skill(skill, num_skills, "encode_input");
  if (mode == InputMode::kOneHot) {
    return tape.constant(Array::one_hot(num_skills, skill, correct ? 1.0 : -1.0));
  }
  NodeRef embedding = tape.column(heads.embeddings, skill);
  NodeRef shifted = correct ? tape.add(embedding, heads.correctness_offset)
                            : tape.sub(embedding, heads.correctness_offset);
  return tape.add(tape.matvec(heads.input_weight, shifted), heads.input_bias);
}

NodeRef predict_response(Tape& tape, const HeadWeights& heads, NodeRef state, std::size_t skill,
                         InputMode mode) {
  const Array& sv = tape.val(state);
  std::size_t num_skills = sv.length();
  require_skill(skill, num_skills, "predict_response");
  // Zero every state entry except the queried skill's; the multiply also cuts
  // the gradient paths from the other entries.
  NodeRef masked_state = tape.mul(state, tape.constant(Array::one_hot(num_skills, skill, 1.0)));
  NodeRef head_input = mode == InputMode::kEmbedding
                           ? tape.concat(tape.column(heads.embeddings, skill), masked_state)
                           : masked_state;
  NodeRef logit = tape.add(tape.matvec(heads.output_weight, head_input), heads.output_bias);
  return tape.sigmoid(logit);
}

}  // namespace ckt
