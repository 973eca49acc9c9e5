#include "ckt/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ckt {

namespace {

Array uniform_matrix(std::vector<std::size_t> shape, double half_width, Rng* rng) {
  Array a(std::move(shape));
  if (rng) {
    for (std::size_t i = 0; i < a.numel(); ++i) a[i] = rng->uniform(-half_width, half_width);
  }
  return a;
}

Array normal_matrix(std::vector<std::size_t> shape, double stddev, Rng* rng) {
  Array a(std::move(shape));
  if (rng) {
    for (std::size_t i = 0; i < a.numel(); ++i) a[i] = stddev * rng->normal();
  }
  return a;
}

}  // namespace

Model::Model(const ModelConfig& config, Rng& rng) : config_(config) {
  if (config_.num_skills == 0) throw std::invalid_argument("Model: num_skills must be positive");
  if (config_.embedding_dim == 0) {
    throw std::invalid_argument("Model: embedding_dim must be positive");
  }
  register_params(&rng);
}

Model::Model(const ModelConfig& config, const ParamStore& params) : config_(config) {
  register_params(nullptr);
  if (params.size() != params_.size()) {
    throw std::invalid_argument("Model: snapshot has " + std::to_string(params.size()) +
                                " parameters, expected " + std::to_string(params_.size()));
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params.name(i) != params_.name(i) ||
        !params.value(i).same_shape(params_.value(i))) {
      throw std::invalid_argument("Model: snapshot parameter '" + params.name(i) +
                                  "' does not match expected '" + params_.name(i) + "' " +
                                  params_.value(i).shape_string());
    }
    params_.value(i) = params.value(i);
  }
}

void Model::register_params(Rng* rng) {
  std::size_t c = config_.num_skills;
  std::size_t d_in = config_.input_dim();
  std::size_t d_e = config_.embedding_dim;
  double rec_scale = 1.0 / std::sqrt(static_cast<double>(c));
  double emb_scale = 1.0 / std::sqrt(static_cast<double>(d_e));
  double head_scale = 1.0 / std::sqrt(static_cast<double>(config_.head_dim()));

  slots_.recurrent_update = params_.add("recurrent_update", uniform_matrix({c, c}, rec_scale, rng));
  slots_.recurrent_reset = params_.add("recurrent_reset", uniform_matrix({c, c}, rec_scale, rng));
  slots_.recurrent_cand = params_.add("recurrent_cand", uniform_matrix({c, c}, rec_scale, rng));
  slots_.input_update = params_.add("input_update", uniform_matrix({c, d_in}, rec_scale, rng));
  slots_.input_reset = params_.add("input_reset", uniform_matrix({c, d_in}, rec_scale, rng));
  slots_.input_cand = params_.add("input_cand", uniform_matrix({c, d_in}, rec_scale, rng));
  // The update gate starts biased toward keeping state: at zero bias the
  // state halves every step and evidence from a skill's previous practice
  // (typically C steps back) would be invisible to the head.
  slots_.bias_update = params_.add("bias_update", Array::full({c}, -2.0));
  slots_.bias_reset = params_.add("bias_reset", Array({c}));
  slots_.bias_cand = params_.add("bias_cand", Array({c}));
  // Embeddings and the correctness offset start at unit scale, matching the
  // magnitude the one-hot encoding would feed the same input matrices.
  slots_.embeddings = params_.add("embeddings", uniform_matrix({d_e, c}, 1.0, rng));
  slots_.correctness_offset = params_.add("correctness_offset", uniform_matrix({d_e}, 1.0, rng));
  slots_.input_weight = params_.add("input_weight", uniform_matrix({d_in, d_e}, emb_scale, rng));
  slots_.input_bias = params_.add("input_bias", Array({d_in}));
  // The state section of the output head starts at unit scale: the masked
  // state is the only per-student signal, and it reaches the logit through
  // this one coefficient per skill.
  Array head_weight = uniform_matrix({1, config_.head_dim()}, head_scale, rng);
  for (std::size_t j = config_.head_dim() - c; j < config_.head_dim(); ++j) {
    head_weight[j] /= head_scale;
  }
  slots_.output_weight = params_.add("output_weight", std::move(head_weight));
  slots_.output_bias = params_.add("output_bias", Array({1}));
  slots_.ordering_logits = params_.add("ordering_logits", normal_matrix({c, c}, 0.1, rng));
  slots_.structure_logits = params_.add("structure_logits", normal_matrix({c, c}, 0.1, rng));
}

Model::Bound Model::bind(Tape& tape, const MaskSettings& settings) const {
  Bound bound;
  bound.leaves.reserve(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) {
    bound.leaves.push_back(tape.leaf(params_.value(i)));
  }
  bound.mask = build_mask(tape, bound.leaves[slots_.ordering_logits],
                          bound.leaves[slots_.structure_logits], config_.num_skills, settings);
  GruWeights raw{bound.leaves[slots_.recurrent_update], bound.leaves[slots_.recurrent_reset],
                 bound.leaves[slots_.recurrent_cand],   bound.leaves[slots_.input_update],
                 bound.leaves[slots_.input_reset],      bound.leaves[slots_.input_cand],
                 bound.leaves[slots_.bias_update],      bound.leaves[slots_.bias_reset],
                 bound.leaves[slots_.bias_cand]};
  bound.recurrent = mask_recurrent(tape, raw, bound.mask.mask);
  bound.heads = HeadWeights{bound.leaves[slots_.embeddings],
                            bound.leaves[slots_.correctness_offset],
                            bound.leaves[slots_.input_weight],
                            bound.leaves[slots_.input_bias],
                            bound.leaves[slots_.output_weight],
                            bound.leaves[slots_.output_bias]};
  bound.ones = tape.constant(Array::full({config_.num_skills}, 1.0));
  bound.one = tape.constant(1.0);
  bound.zero_state = tape.constant(Array(std::vector<std::size_t>{config_.num_skills}));
  return bound;
}

std::vector<EventPrediction> predicted_events(Tape& tape, const Model::Bound& bound,
                                              const ModelConfig& config,
                                              const ResponseSequence& sequence) {
  if (sequence.events.size() < 2) {
    throw std::invalid_argument("predicted_events: sequence '" + sequence.user_id +
                                "' needs at least 2 events");
  }
  std::vector<EventPrediction> predictions;
  predictions.reserve(sequence.events.size() - 1);
  NodeRef state = bound.zero_state;
  for (std::size_t t = 0; t + 1 < sequence.events.size(); ++t) {
    const ResponseEvent& seen = sequence.events[t];
    NodeRef input = encode_input(tape, bound.heads, seen.skill, seen.correct, config.input_mode,
                                 config.num_skills);
    state = gru_step(tape, state, input, bound.recurrent, bound.ones);
    if (!tape.val(state).all_finite()) {
      throw std::runtime_error("predicted_events: non-finite state at step " +
                               std::to_string(t + 1) + " of sequence '" + sequence.user_id + "'");
    }
    const ResponseEvent& next = sequence.events[t + 1];
    predictions.push_back(EventPrediction{
        predict_response(tape, bound.heads, state, next.skill, config.input_mode), next.correct});
  }
  return predictions;
}

NodeRef sequence_loss(Tape& tape, const Model::Bound& bound, const ModelConfig& config,
                      const ResponseSequence& sequence) {
  std::vector<EventPrediction> predictions = predicted_events(tape, bound, config, sequence);
  NodeRef total;
  bool first = true;
  for (const EventPrediction& ep : predictions) {
    NodeRef term = ep.correct ? tape.log(ep.probability)
                              : tape.log(tape.sub(bound.one, ep.probability));
    total = first ? term : tape.add(total, term);
    first = false;
  }
  NodeRef loss = tape.scale(total, -1.0 / static_cast<double>(predictions.size()));
  if (!tape.val(loss).all_finite()) {
    throw std::runtime_error("sequence_loss: non-finite loss for sequence '" + sequence.user_id +
                             "'");
  }
  return loss;
}

double sequence_loss_value(const Model& model, const MaskSettings& settings,
                           const ResponseSequence& sequence) {
  Tape tape;
  Model::Bound bound = model.bind(tape, settings);
  return tape.val(sequence_loss(tape, bound, model.config(), sequence))[0];
}

}  // namespace ckt
