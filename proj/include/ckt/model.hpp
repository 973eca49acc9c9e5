#pragma once

#include <cstddef>
#include <vector>

#include "ckt/causal_gru.hpp"
#include "ckt/causal_mask.hpp"
#include "ckt/data.hpp"
#include "ckt/heads.hpp"
#include "ckt/params.hpp"
#include "ckt/rng.hpp"
#include "ckt/tape.hpp"

namespace ckt {

struct ModelConfig {
  std::size_t num_skills = 0;
  std::size_t embedding_dim = 32;
  InputMode input_mode = InputMode::kEmbedding;
  StructureMode structure_mode = StructureMode::kLearnable;

  std::size_t input_dim() const {
    return input_mode == InputMode::kEmbedding ? embedding_dim : num_skills;
  }
  std::size_t head_dim() const {
    return input_mode == InputMode::kEmbedding ? embedding_dim + num_skills : num_skills;
  }
};

// All trainable state of the causal knowledge-tracing model: GRU matrices,
// input/output heads, skill embeddings, and the ordering/structure logits the
// mask is built from.
class Model {
 public:
  Model(const ModelConfig& config, Rng& rng);
  // Restores from a parameter snapshot; names and shapes must match the
  // layout this config produces.
  Model(const ModelConfig& config, const ParamStore& params);

  const ModelConfig& config() const { return config_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  struct Slots {
    std::size_t recurrent_update, recurrent_reset, recurrent_cand;
    std::size_t input_update, input_reset, input_cand;
    std::size_t bias_update, bias_reset, bias_cand;
    std::size_t embeddings, correctness_offset;
    std::size_t input_weight, input_bias;
    std::size_t output_weight, output_bias;
    std::size_t ordering_logits, structure_logits;
  };
  const Slots& slots() const { return slots_; }

  // Per-tape view: parameter leaves, the assembled mask, masked recurrence,
  // and a few shared constants.
  struct Bound {
    std::vector<NodeRef> leaves;  // parallel to the param store
    MaskNodes mask;
    GruWeights recurrent;  // already masked
    HeadWeights heads;
    NodeRef ones;        // length-C ones
    NodeRef one;         // scalar 1
    NodeRef zero_state;  // length-C zeros
  };
  Bound bind(Tape& tape, const MaskSettings& settings) const;

 private:
  void register_params(Rng* rng);

  ModelConfig config_;
  ParamStore params_;
  Slots slots_{};
};

// Prediction for every event from the second onward: event t is predicted
// from the state after events 1..t-1 and the skill of event t.
struct EventPrediction {
  NodeRef probability;
  bool correct;
};
std::vector<EventPrediction> predicted_events(Tape& tape, const Model::Bound& bound,
                                              const ModelConfig& config,
                                              const ResponseSequence& sequence);

// Negative mean log-likelihood over the predicted events of one sequence.
// Requires at least two events (the first only seeds the state).
NodeRef sequence_loss(Tape& tape, const Model::Bound& bound, const ModelConfig& config,
                      const ResponseSequence& sequence);

// Forward-only loss value on a fresh tape.
double sequence_loss_value(const Model& model, const MaskSettings& settings,
                           const ResponseSequence& sequence);

}  // namespace ckt
