#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ckt/data.hpp"
#include "ckt/model.hpp"

namespace ckt {

struct TrainConfig {
  int epochs = 50;
  int batch_size = 64;
  double learning_rate = 5e-4;

  double init_temperature = 2.0;
  int init_unroll = 5;
  double temperature_increment = 2.0;
  int unroll_increment = 5;
  int schedule_period_epochs = 10;
  double alpha_start = 1.0;
  double alpha_increment = 1.0;
  double alpha_cap = 10.0;
  bool adaptive_schedule = true;         // false keeps the initial values throughout
  bool multiplicative_schedule = false;  // grow by factors instead of increments

  std::string structure_mode = "learnable";  // or "fixed-dense"
  bool one_hot_input = false;
  double kappa = 0.45;
  std::size_t embedding_dim = 32;
  std::uint64_t seed = 1;
  double grad_clip_norm = 5.0;
  double heldout_fraction = 0.1;

  StructureMode parsed_structure_mode() const;
  ModelConfig model_config(std::size_t num_skills) const;
};

TrainConfig load_train_config(const std::string& path);
void save_train_config(const std::string& path, const TrainConfig& config);

struct ScheduleState {
  double temperature = 2.0;
  int unroll = 5;
  double alpha = 1.0;
};

// Relaxation sharpness for a given 0-based epoch; steps once per period.
ScheduleState schedule_at(const TrainConfig& config, int epoch);
MaskSettings settings_at(const TrainConfig& config, int epoch);
// Settings matching the last trained epoch, for evaluation and extraction.
MaskSettings final_settings(const TrainConfig& config, int epochs_completed);

struct HistoryRow {
  int epoch = 0;  // 1-based
  double loss = 0.0;
  double hardness = 0.0;
  double structure_sparsity = 0.0;  // fraction of strictly-lower entries < 0.5
  double temperature = 0.0;
  int unroll = 0;
};

void write_history_csv(const std::string& path, const std::vector<HistoryRow>& history);

struct TrainResult {
  Model model;
  std::vector<HistoryRow> history;
  std::size_t skipped_short_sequences = 0;
  std::string rng_state;  // shuffle stream after the last epoch
};

// Full optimization loop: per epoch, update the schedule, shuffle, and for
// each mini-batch rebuild the mask once, average the sequence losses, and
// take one clipped Adam step.
TrainResult train(const std::vector<ResponseSequence>& sequences, std::size_t num_skills,
                  const TrainConfig& config);

// Same loop, continuing from an existing model instead of a fresh init.
TrainResult train_from(Model model, const std::vector<ResponseSequence>& sequences,
                       const TrainConfig& config);

struct EvalMetrics {
  double log_loss = 0.0;
  double auc = 0.5;
  double accuracy = 0.0;
  std::size_t events = 0;
};

EvalMetrics evaluate_prediction(const Model& model, const MaskSettings& settings,
                                const std::vector<ResponseSequence>& sequences);

// Rank-based AUC over (score, label) pairs, ties resolved by averaged ranks;
// 0.5 when either class is absent.
double ranked_auc(std::vector<std::pair<double, bool>> scored);

// Deterministic 90/10-style split on whole students.
std::pair<std::vector<ResponseSequence>, std::vector<ResponseSequence>> split_by_student(
    const std::vector<ResponseSequence>& sequences, double heldout_fraction, std::uint64_t seed);

}  // namespace ckt
