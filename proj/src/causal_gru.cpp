#include "ckt/causal_gru.hpp"

#include <stdexcept>
#include <string>

namespace ckt {

GruWeights mask_recurrent(Tape& tape, const GruWeights& weights, NodeRef mask) {
  GruWeights masked = weights;
  masked.recurrent_update = tape.mul(mask, weights.recurrent_update);
  masked.recurrent_reset = tape.mul(mask, weights.recurrent_reset);
  masked.recurrent_cand = tape.mul(mask, weights.recurrent_cand);
  return masked;
}

NodeRef gru_step(Tape& tape, NodeRef state, NodeRef input, const GruWeights& weights,
                 NodeRef ones) {
  NodeRef update = tape.sigmoid(tape.add(
      tape.add(tape.matvec(weights.recurrent_update, state),
               tape.matvec(weights.input_update, input)),
      weights.bias_update));
  NodeRef reset = tape.sigmoid(tape.add(
      tape.add(tape.matvec(weights.recurrent_reset, state),
               tape.matvec(weights.input_reset, input)),
      weights.bias_reset));
  NodeRef cand = tape.tanh(tape.add(
      tape.add(tape.mul(reset, tape.matvec(weights.recurrent_cand, state)),
               tape.matvec(weights.input_cand, input)),
      weights.bias_cand));
  return tape.add(tape.mul(tape.sub(ones, update), state), tape.mul(update, cand));
}

std::vector<NodeRef> unroll_sequence(Tape& tape, NodeRef initial_state,
                                     const std::vector<NodeRef>& inputs,
                                     const GruWeights& weights, NodeRef ones) {
  if (inputs.empty()) throw std::invalid_argument("unroll_sequence: empty input sequence");
  std::vector<NodeRef> states;
  states.reserve(inputs.size());
  NodeRef state = initial_state;
  for (std::size_t step = 0; step < inputs.size(); ++step) {
    state = gru_step(tape, state, inputs[step], weights, ones);
    if (!tape.val(state).all_finite()) {
      throw std::runtime_error("unroll_sequence: non-finite state at step " +
                               std::to_string(step + 1));
    }
    states.push_back(state);
  }
  return states;
}

}  // namespace ckt
