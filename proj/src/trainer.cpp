#include "ckt/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "ckt/adam.hpp"
#include "ckt/sinkhorn.hpp"

namespace ckt {

namespace {

using nlohmann::json;

double structure_sparsity(const Array& structure) {
  std::size_t n = structure.rows();
  if (n < 2) return 0.0;
  std::size_t below = 0, total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      ++total;
      if (structure.at(i, j) < 0.5) ++below;
    }
  }
  return static_cast<double>(below) / static_cast<double>(total);
}

}  // namespace

StructureMode TrainConfig::parsed_structure_mode() const {
  if (structure_mode == "learnable") return StructureMode::kLearnable;
  if (structure_mode == "fixed-dense") return StructureMode::kFixedDense;
  throw std::invalid_argument("TrainConfig: structure_mode must be 'learnable' or 'fixed-dense', got '" +
                              structure_mode + "'");
}

ModelConfig TrainConfig::model_config(std::size_t num_skills) const {
  ModelConfig mc;
  mc.num_skills = num_skills;
  mc.embedding_dim = embedding_dim;
  mc.input_mode = one_hot_input ? InputMode::kOneHot : InputMode::kEmbedding;
  mc.structure_mode = parsed_structure_mode();
  return mc;
}

void to_json(json& j, const TrainConfig& c) {
  j = json{{"epochs", c.epochs},
           {"batch_size", c.batch_size},
           {"learning_rate", c.learning_rate},
           {"init_temperature", c.init_temperature},
           {"init_unroll", c.init_unroll},
           {"temperature_increment", c.temperature_increment},
           {"unroll_increment", c.unroll_increment},
           {"schedule_period_epochs", c.schedule_period_epochs},
           {"alpha_start", c.alpha_start},
           {"alpha_increment", c.alpha_increment},
           {"alpha_cap", c.alpha_cap},
           {"adaptive_schedule", c.adaptive_schedule},
           {"multiplicative_schedule", c.multiplicative_schedule},
           {"structure_mode", c.structure_mode},
           {"one_hot_input", c.one_hot_input},
           {"kappa", c.kappa},
           {"embedding_dim", c.embedding_dim},
           {"seed", c.seed},
           {"grad_clip_norm", c.grad_clip_norm},
           {"heldout_fraction", c.heldout_fraction}};
}

void from_json(const json& j, TrainConfig& c) {
  TrainConfig defaults;
  c.epochs = j.value("epochs", defaults.epochs);
  c.batch_size = j.value("batch_size", defaults.batch_size);
  c.learning_rate = j.value("learning_rate", defaults.learning_rate);
  c.init_temperature = j.value("init_temperature", defaults.init_temperature);
  c.init_unroll = j.value("init_unroll", defaults.init_unroll);
  c.temperature_increment = j.value("temperature_increment", defaults.temperature_increment);
  c.unroll_increment = j.value("unroll_increment", defaults.unroll_increment);
  c.schedule_period_epochs = j.value("schedule_period_epochs", defaults.schedule_period_epochs);
  c.alpha_start = j.value("alpha_start", defaults.alpha_start);
  c.alpha_increment = j.value("alpha_increment", defaults.alpha_increment);
  c.alpha_cap = j.value("alpha_cap", defaults.alpha_cap);
  c.adaptive_schedule = j.value("adaptive_schedule", defaults.adaptive_schedule);
  c.multiplicative_schedule =
      j.value("multiplicative_schedule", defaults.multiplicative_schedule);
  c.structure_mode = j.value("structure_mode", defaults.structure_mode);
  c.one_hot_input = j.value("one_hot_input", defaults.one_hot_input);
  c.kappa = j.value("kappa", defaults.kappa);
  c.embedding_dim = j.value("embedding_dim", defaults.embedding_dim);
  c.seed = j.value("seed", defaults.seed);
  c.grad_clip_norm = j.value("grad_clip_norm", defaults.grad_clip_norm);
  c.heldout_fraction = j.value("heldout_fraction", defaults.heldout_fraction);
}

TrainConfig load_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_train_config: cannot open " + path);
  json j;
  in >> j;
  TrainConfig c = j.get<TrainConfig>();
  c.parsed_structure_mode();  // validate early
  return c;
}

void save_train_config(const std::string& path, const TrainConfig& config) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_train_config: cannot write " + path);
  out << json(config).dump(2) << "\n";
}

ScheduleState schedule_at(const TrainConfig& config, int epoch) {
  ScheduleState s{config.init_temperature, config.init_unroll, config.alpha_start};
  if (!config.adaptive_schedule || config.schedule_period_epochs <= 0) return s;
  int periods = epoch / config.schedule_period_epochs;
  if (config.multiplicative_schedule) {
    for (int p = 0; p < periods; ++p) {
      s.temperature *= config.temperature_increment;
      s.unroll *= config.unroll_increment;
    }
  } else {
    s.temperature += periods * config.temperature_increment;
    s.unroll += periods * config.unroll_increment;
  }
  s.alpha = std::min(config.alpha_start + periods * config.alpha_increment, config.alpha_cap);
  return s;
}

MaskSettings settings_at(const TrainConfig& config, int epoch) {
  ScheduleState s = schedule_at(config, epoch);
  MaskSettings ms;
  ms.mode = config.parsed_structure_mode();
  ms.alpha = s.alpha;
  ms.sinkhorn = SinkhornConfig{s.temperature, s.unroll};
  return ms;
}

MaskSettings final_settings(const TrainConfig& config, int epochs_completed) {
  return settings_at(config, std::max(0, epochs_completed - 1));
}

void write_history_csv(const std::string& path, const std::vector<HistoryRow>& history) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_history_csv: cannot write " + path);
  out << "epoch,loss,hardness,L_sparsity,temperature,unroll\n";
  char buf[160];
  for (const HistoryRow& row : history) {
    std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g,%.12g,%d\n", row.epoch, row.loss,
                  row.hardness, row.structure_sparsity, row.temperature, row.unroll);
    out << buf;
  }
}

TrainResult train(const std::vector<ResponseSequence>& sequences, std::size_t num_skills,
                  const TrainConfig& config) {
  Rng init_rng(derive_seed(config.seed, 0));
  return train_from(Model(config.model_config(num_skills), init_rng), sequences, config);
}

TrainResult train_from(Model model, const std::vector<ResponseSequence>& sequences,
                       const TrainConfig& config) {
  if (sequences.empty()) throw std::invalid_argument("train: empty dataset");
  if (config.batch_size < 1) throw std::invalid_argument("train: batch_size must be positive");
  if (config.epochs < 0) throw std::invalid_argument("train: epochs must be non-negative");

  ModelConfig mc = model.config();
  Rng shuffle_rng(derive_seed(config.seed, 1));

  TrainResult result{std::move(model), {}, 0, ""};
  Adam optimizer(AdamConfig{config.learning_rate}, result.model.params());

  std::vector<const ResponseSequence*> usable;
  usable.reserve(sequences.size());
  for (const ResponseSequence& seq : sequences) {
    if (seq.events.size() >= 2) {
      usable.push_back(&seq);
    } else {
      ++result.skipped_short_sequences;
    }
  }
  if (result.skipped_short_sequences > 0) {
    std::fprintf(stderr, "train: skipped %zu sequence(s) shorter than 2 events\n",
                 result.skipped_short_sequences);
  }
  if (usable.empty()) throw std::invalid_argument("train: no sequence has 2 or more events");

  std::vector<std::size_t> order(usable.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    ScheduleState sch = schedule_at(config, epoch);
    MaskSettings settings = settings_at(config, epoch);
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    std::size_t counted = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      std::size_t stop = std::min(order.size(), start + config.batch_size);
      if (stop == start) continue;

      Tape tape;
      Model::Bound bound = result.model.bind(tape, settings);
      NodeRef total;
      for (std::size_t i = start; i < stop; ++i) {
        NodeRef loss = sequence_loss(tape, bound, mc, *usable[order[i]]);
        total = i == start ? loss : tape.add(total, loss);
      }
      NodeRef batch_loss = tape.scale(total, 1.0 / static_cast<double>(stop - start));
      double batch_value = tape.val(batch_loss)[0];
      if (!std::isfinite(batch_value)) {
        throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch + 1) +
                                 ", batch " + std::to_string(start / config.batch_size + 1));
      }
      tape.backward(batch_loss);

      std::vector<Array> grads;
      grads.reserve(bound.leaves.size());
      for (NodeRef leaf : bound.leaves) grads.push_back(tape.gradient(leaf));
      clip_global_norm(grads, config.grad_clip_norm);
      optimizer.step(result.model.params(), grads);

      loss_sum += batch_value * static_cast<double>(stop - start);
      counted += stop - start;
    }

    // Epoch diagnostics from the post-step parameters.
    Tape probe;
    Model::Bound bound = result.model.bind(probe, settings);
    result.history.push_back(HistoryRow{epoch + 1, loss_sum / static_cast<double>(counted),
                                        hardness(probe.val(bound.mask.ordering)),
                                        structure_sparsity(probe.val(bound.mask.structure)),
                                        sch.temperature, sch.unroll});
  }

  result.rng_state = shuffle_rng.state();
  return result;
}

EvalMetrics evaluate_prediction(const Model& model, const MaskSettings& settings,
                                const std::vector<ResponseSequence>& sequences) {
  if (sequences.empty()) throw std::invalid_argument("evaluate_prediction: empty dataset");

  std::vector<std::pair<double, bool>> scored;  // (probability, label)
  for (const ResponseSequence& seq : sequences) {
    if (seq.events.size() < 2) continue;
    Tape tape;
    Model::Bound bound = model.bind(tape, settings);
    for (const EventPrediction& ep : predicted_events(tape, bound, model.config(), seq)) {
      scored.emplace_back(tape.val(ep.probability)[0], ep.correct);
    }
  }

  EvalMetrics metrics;
  metrics.events = scored.size();
  if (scored.empty()) return metrics;

  double log_loss = 0.0;
  std::size_t hits = 0, positives = 0;
  for (const auto& [p, y] : scored) {
    log_loss -= y ? std::log(p) : std::log(1.0 - p);
    if ((p >= 0.5) == y) ++hits;
    if (y) ++positives;
  }
  metrics.log_loss = log_loss / static_cast<double>(scored.size());
  metrics.accuracy = static_cast<double>(hits) / static_cast<double>(scored.size());
  metrics.auc = ranked_auc(std::move(scored));
  return metrics;
}

double ranked_auc(std::vector<std::pair<double, bool>> scored) {
  std::size_t positives = 0;
  for (const auto& [p, y] : scored) {
    if (y) ++positives;
  }
  std::size_t negatives = scored.size() - positives;
  if (positives == 0 || negatives == 0) return 0.5;

  // Rank statistic with averaged ranks over ties.
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < scored.size()) {
    std::size_t j = i;
    while (j < scored.size() && scored[j].first == scored[i].first) ++j;
    double mean_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
    for (std::size_t k = i; k < j; ++k) {
      if (scored[k].second) positive_rank_sum += mean_rank;
    }
    i = j;
  }
  return (positive_rank_sum -
          0.5 * static_cast<double>(positives) * static_cast<double>(positives + 1)) /
         (static_cast<double>(positives) * static_cast<double>(negatives));
}

std::pair<std::vector<ResponseSequence>, std::vector<ResponseSequence>> split_by_student(
    const std::vector<ResponseSequence>& sequences, double heldout_fraction, std::uint64_t seed) {
  if (!(heldout_fraction >= 0.0 && heldout_fraction < 1.0)) {
    throw std::invalid_argument("split_by_student: heldout fraction must lie in [0,1)");
  }
  std::vector<std::size_t> order(sequences.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(seed, 2));
  rng.shuffle(order);

  std::size_t heldout_count =
      static_cast<std::size_t>(heldout_fraction * static_cast<double>(sequences.size()));
  std::pair<std::vector<ResponseSequence>, std::vector<ResponseSequence>> split;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < heldout_count ? split.second : split.first).push_back(sequences[order[i]]);
  }
  return split;
}

}  // namespace ckt
