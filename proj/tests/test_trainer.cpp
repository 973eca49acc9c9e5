#include <doctest.h>

#include <cmath>
#include <set>

#include "ckt/checkpoint.hpp"
#include "ckt/data.hpp"
#include "ckt/sinkhorn.hpp"
#include "ckt/trainer.hpp"
#include "test_support.hpp"

#include <filesystem>

using namespace ckt;
namespace fs = std::filesystem;

namespace {

std::vector<ResponseSequence> tiny_dataset(std::size_t students, std::size_t steps,
                                           std::uint64_t seed, std::size_t skills = 4) {
  PlantedWorld world = chain_dag(skills);
  world.mastery_gain = 1.5;
  return simulate_students(world, students, steps, seed);
}

TrainConfig tiny_config(int epochs, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.batch_size = 8;
  cfg.embedding_dim = 6;
  cfg.seed = seed;
  cfg.schedule_period_epochs = 3;
  return cfg;
}

}  // namespace

TEST_CASE("schedule stepping") {
  TrainConfig cfg;  // defaults: init 2/5, +2/+5 every 10 epochs, alpha 1 +1 cap 10
  ScheduleState e0 = schedule_at(cfg, 0);
  CHECK(e0.temperature == 2.0);
  CHECK(e0.unroll == 5);
  CHECK(e0.alpha == 1.0);
  ScheduleState e9 = schedule_at(cfg, 9);
  CHECK(e9.temperature == 2.0);
  ScheduleState e10 = schedule_at(cfg, 10);
  CHECK(e10.temperature == 4.0);
  CHECK(e10.unroll == 10);
  CHECK(e10.alpha == 2.0);
  ScheduleState e25 = schedule_at(cfg, 25);
  CHECK(e25.temperature == 6.0);
  CHECK(e25.unroll == 15);
  CHECK(schedule_at(cfg, 95).alpha == 10.0);  // capped

  // non-decreasing across epochs
  ScheduleState prev = schedule_at(cfg, 0);
  for (int epoch = 1; epoch < 60; ++epoch) {
    ScheduleState cur = schedule_at(cfg, epoch);
    CHECK(cur.temperature >= prev.temperature);
    CHECK(cur.unroll >= prev.unroll);
    CHECK(cur.alpha >= prev.alpha);
    prev = cur;
  }

  TrainConfig fixed = cfg;
  fixed.adaptive_schedule = false;
  CHECK(schedule_at(fixed, 40).temperature == 2.0);
  CHECK(schedule_at(fixed, 40).unroll == 5);

  TrainConfig mult = cfg;
  mult.multiplicative_schedule = true;
  CHECK(schedule_at(mult, 10).temperature == 4.0);
  CHECK(schedule_at(mult, 20).temperature == 8.0);
  CHECK(schedule_at(mult, 20).unroll == 125);
}

TEST_CASE("zero epochs leaves the model at initialization") {
  auto data = tiny_dataset(6, 8, 31);
  TrainConfig cfg = tiny_config(0, 5);
  TrainResult result = train(data, 4, cfg);
  CHECK(result.history.empty());

  Rng rng(derive_seed(cfg.seed, 0));
  Model fresh(cfg.model_config(4), rng);
  for (std::size_t p = 0; p < fresh.params().size(); ++p) {
    CHECK(testing::max_abs_diff(fresh.params().value(p), result.model.params().value(p)) == 0.0);
  }
}

TEST_CASE("one step on one sequence descends on average") {
  double mean_delta = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto data = tiny_dataset(1, 10, seed);
    TrainConfig cfg = tiny_config(1, seed);
    cfg.batch_size = 1;
    cfg.learning_rate = 1e-3;

    MaskSettings settings = settings_at(cfg, 0);
    Rng rng(derive_seed(cfg.seed, 0));
    Model before(cfg.model_config(4), rng);
    double loss_before = sequence_loss_value(before, settings, data[0]);

    TrainResult result = train(data, 4, cfg);
    double loss_after = sequence_loss_value(result.model, settings, data[0]);
    mean_delta += loss_after - loss_before;
  }
  mean_delta /= 10.0;
  MESSAGE("mean one-step loss change: ", mean_delta);
  CHECK(mean_delta < 0.0);
}

TEST_CASE("training is deterministic in the seed") {
  auto data = tiny_dataset(12, 10, 37);
  TrainConfig cfg = tiny_config(4, 11);
  TrainResult a = train(data, 4, cfg);
  TrainResult b = train(data, 4, cfg);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].loss == b.history[i].loss);
    CHECK(a.history[i].hardness == b.history[i].hardness);
    CHECK(a.history[i].structure_sparsity == b.history[i].structure_sparsity);
  }
  for (std::size_t p = 0; p < a.model.params().size(); ++p) {
    CHECK(testing::max_abs_diff(a.model.params().value(p), b.model.params().value(p)) == 0.0);
  }
}

TEST_CASE("short sequences are skipped and counted") {
  auto data = tiny_dataset(4, 6, 41);
  data.push_back(ResponseSequence{"stub", {ResponseEvent{1, 0, true}}});
  TrainConfig cfg = tiny_config(1, 3);
  TrainResult result = train(data, 4, cfg);
  CHECK(result.skipped_short_sequences == 1);
}

TEST_CASE("relaxation hardens over a training run") {
  auto data = tiny_dataset(24, 12, 43);
  TrainConfig cfg = tiny_config(12, 7);  // schedule period 3: four steps
  TrainResult result = train(data, 4, cfg);
  REQUIRE(result.history.size() == 12);
  CHECK(result.history.back().hardness >= result.history.front().hardness - 0.05);
  // temperature/unroll columns mirror the schedule
  CHECK(result.history.front().temperature == 2.0);
  CHECK(result.history.back().temperature == 8.0);
  CHECK(result.history.back().unroll == 20);
}

TEST_CASE("checkpoints restore the exact model") {
  auto data = tiny_dataset(10, 10, 47);
  TrainConfig cfg = tiny_config(3, 13);
  TrainResult result = train(data, 4, cfg);

  SkillIndex skills;
  for (std::size_t c = 0; c < 4; ++c) skills.add(std::to_string(c));
  Checkpoint checkpoint{cfg, 4, cfg.epochs, skills, result.model.params(), result.rng_state};

  fs::path dir = fs::temp_directory_path() / "ckt_trainer_test";
  fs::create_directories(dir);
  std::string path = (dir / "checkpoint.json").string();
  save_checkpoint(path, checkpoint);
  Checkpoint loaded = load_checkpoint(path);
  fs::remove_all(dir);

  CHECK(loaded.num_skills == 4);
  CHECK(loaded.epochs_completed == cfg.epochs);
  CHECK(loaded.config.seed == cfg.seed);
  CHECK(loaded.skills.id_of == skills.id_of);
  CHECK(loaded.rng_state == result.rng_state);

  Model restored = model_from_checkpoint(loaded);
  for (std::size_t p = 0; p < restored.params().size(); ++p) {
    CHECK(testing::max_abs_diff(restored.params().value(p),
                                result.model.params().value(p)) == 0.0);
  }

  MaskSettings settings = final_settings(cfg, cfg.epochs);
  EvalMetrics before = evaluate_prediction(result.model, settings, data);
  EvalMetrics after = evaluate_prediction(restored, settings, data);
  CHECK(std::abs(before.log_loss - after.log_loss) <= 1e-12);
  CHECK(std::abs(before.auc - after.auc) <= 1e-12);
  CHECK(std::abs(before.accuracy - after.accuracy) <= 1e-12);
}

TEST_CASE("prediction metrics on a constant-half model") {
  auto data = tiny_dataset(8, 10, 53);
  TrainConfig cfg = tiny_config(0, 9);
  Rng rng(derive_seed(cfg.seed, 0));
  Model model(cfg.model_config(4), rng);
  Array& head = model.params().value(model.slots().output_weight);
  for (std::size_t i = 0; i < head.numel(); ++i) head[i] = 0.0;
  model.params().value(model.slots().output_bias)[0] = 0.0;

  EvalMetrics metrics = evaluate_prediction(model, settings_at(cfg, 0), data);
  CHECK(metrics.log_loss == doctest::Approx(std::log(2.0)));
  CHECK(metrics.auc == 0.5);
}

TEST_CASE("student split is disjoint and seeded") {
  auto data = tiny_dataset(20, 6, 59);
  auto [train_seqs, heldout] = split_by_student(data, 0.25, 5);
  CHECK(train_seqs.size() == 15);
  CHECK(heldout.size() == 5);
  std::set<std::string> train_users, heldout_users;
  for (const auto& s : train_seqs) train_users.insert(s.user_id);
  for (const auto& s : heldout) heldout_users.insert(s.user_id);
  for (const auto& u : heldout_users) CHECK(train_users.count(u) == 0);

  auto [again_train, again_heldout] = split_by_student(data, 0.25, 5);
  CHECK(again_heldout.size() == heldout.size());
  for (std::size_t i = 0; i < heldout.size(); ++i) {
    CHECK(again_heldout[i].user_id == heldout[i].user_id);
  }
}

TEST_CASE("embedding inputs hold their own against one-hot on held-out loss") {
  PlantedWorld world = chain_dag(5);
  world.mastery_gain = 1.5;
  auto data = simulate_students(world, 120, 24, 61);
  auto [train_seqs, heldout] = split_by_student(data, 0.2, 3);

  TrainConfig cfg = tiny_config(6, 17);
  cfg.batch_size = 16;
  cfg.embedding_dim = 8;

  TrainConfig one_hot_cfg = cfg;
  one_hot_cfg.one_hot_input = true;

  TrainResult embedding_run = train(train_seqs, 5, cfg);
  TrainResult one_hot_run = train(train_seqs, 5, one_hot_cfg);
  MaskSettings settings = final_settings(cfg, cfg.epochs);
  double embedding_loss = evaluate_prediction(embedding_run.model, settings, heldout).log_loss;
  double one_hot_loss = evaluate_prediction(one_hot_run.model, settings, heldout).log_loss;
  MESSAGE("held-out loss, embedding vs one-hot: ", embedding_loss, " vs ", one_hot_loss);
  CHECK(embedding_loss <= one_hot_loss);
}

TEST_CASE("ranked auc") {
  using Scored = std::vector<std::pair<double, bool>>;
  CHECK(ranked_auc(Scored{{0.9, true}, {0.8, true}, {0.2, false}, {0.1, false}}) == 1.0);
  CHECK(ranked_auc(Scored{{0.5, true}, {0.5, false}, {0.5, true}}) == 0.5);
  CHECK(ranked_auc(Scored{{0.1, false}, {0.4, true}, {0.35, true}, {0.8, false}}) == 0.5);
  CHECK(ranked_auc(Scored{{0.3, true}, {0.7, true}}) == 0.5);  // single class
}
