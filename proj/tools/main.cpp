#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ckt/checkpoint.hpp"
#include "ckt/data.hpp"
#include "ckt/metrics.hpp"
#include "ckt/model.hpp"
#include "ckt/sinkhorn.hpp"
#include "ckt/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct EvaluatedValues {
  ckt::Array structure;
  ckt::Array ordering;
};

// Structure and ordering matrices at the checkpoint's final schedule.
EvaluatedValues evaluate_mask(const ckt::Checkpoint& checkpoint, const ckt::Model& model) {
  ckt::MaskSettings settings =
      ckt::final_settings(checkpoint.config, checkpoint.epochs_completed);
  ckt::Tape tape;
  ckt::Model::Bound bound = model.bind(tape, settings);
  return EvaluatedValues{tape.val(bound.mask.structure), tape.val(bound.mask.ordering)};
}

// Edge files come either as world JSON or as src,dst CSV; both give
// (prerequisite, dependent) pairs in original ids.
std::vector<std::pair<std::string, std::string>> load_truth_edges(const std::string& path) {
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    ckt::PlantedWorld world = ckt::load_world(path);
    std::vector<std::pair<std::string, std::string>> edges;
    for (const auto& e : world.edges) {
      edges.emplace_back(std::to_string(e.prereq), std::to_string(e.dependent));
    }
    return edges;
  }
  return ckt::read_edge_csv(path);
}

// Both edge sets mapped onto the union of their skill ids so the pairwise
// metric sees one common universe.
ckt::StructuralScore score_edge_sets(
    const std::vector<std::pair<std::string, std::string>>& predicted,
    const std::vector<std::pair<std::string, std::string>>& truth) {
  std::set<std::string> ids;
  for (const auto& [a, b] : predicted) {
    ids.insert(a);
    ids.insert(b);
  }
  for (const auto& [a, b] : truth) {
    ids.insert(a);
    ids.insert(b);
  }
  std::unordered_map<std::string, std::size_t> dense;
  std::size_t next = 0;
  for (const std::string& id : ids) dense.emplace(id, next++);

  auto to_adjacency = [&](const std::vector<std::pair<std::string, std::string>>& edges) {
    ckt::AdjacencyMatrix adj(dense.size());
    for (const auto& [src, dst] : edges) adj.set(dense.at(dst), dense.at(src), true);
    return adj;
  };
  return ckt::structural_f1(to_adjacency(predicted), to_adjacency(truth));
}

void print_score_json(const ckt::StructuralScore& score) {
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "{\"precision\": %.6f, \"recall\": %.6f, \"f1\": %.6f}\n", score.precision,
                score.recall, score.f1);
  std::fputs(buf, stdout);
}

struct KappaGrid {
  double start = 0.40, stop = 0.55, step = 0.005;
};

KappaGrid parse_grid(const std::string& spec) {
  KappaGrid grid;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &grid.start, &grid.stop, &grid.step) != 3 ||
      grid.step <= 0.0 || grid.stop < grid.start) {
    throw CLI::ValidationError("--grid", "expected start:stop:step with step > 0, got '" +
                                             spec + "'");
  }
  return grid;
}

int run(int argc, char** argv) {
  CLI::App app{"Causal knowledge tracing: learn a prerequisite DAG over skills from "
               "student response sequences"};
  app.require_subcommand(1);

  // generate ----------------------------------------------------------------
  auto* generate = app.add_subcommand("generate", "Sample a planted DAG and simulate students");
  std::size_t gen_skills = 10, gen_students = 1000, gen_steps = 50;
  double gen_density = 0.2, gen_gain = 2.0, gen_noise = 0.5, gen_guess = 0.1, gen_slip = 0.1;
  std::uint64_t gen_seed = 7;
  std::string gen_dag = "random", gen_out;
  generate->add_option("--skills", gen_skills, "Number of skills")->capture_default_str();
  generate->add_option("--students", gen_students, "Number of students")->capture_default_str();
  generate->add_option("--steps", gen_steps, "Events per student")->capture_default_str();
  generate->add_option("--density", gen_density, "Forward-edge probability (random DAG)")
      ->capture_default_str();
  generate->add_option("--seed", gen_seed, "Master seed")->capture_default_str();
  generate->add_option("--dag", gen_dag, "DAG shape: random or chain")
      ->check(CLI::IsMember({"random", "chain"}))
      ->capture_default_str();
  generate->add_option("--gain", gen_gain, "Mastery gain per practice")->capture_default_str();
  generate->add_option("--noise", gen_noise, "Mastery noise scale")->capture_default_str();
  generate->add_option("--guess", gen_guess, "Lower clamp on correctness probability")
      ->capture_default_str();
  generate->add_option("--slip", gen_slip, "One minus the upper clamp")->capture_default_str();
  generate->add_option("--out", gen_out, "Output directory")->required();
  generate->callback([&] {
    fs::create_directories(gen_out);
    ckt::Rng rng(ckt::derive_seed(gen_seed, 100));
    ckt::PlantedWorld world = gen_dag == "chain" ? ckt::chain_dag(gen_skills)
                                                 : ckt::sample_dag(gen_skills, gen_density, rng);
    world.mastery_gain = gen_gain;
    world.noise_scale = gen_noise;
    world.guess = gen_guess;
    world.slip = gen_slip;
    world.seed = gen_seed;

    std::vector<ckt::ResponseSequence> sequences =
        ckt::simulate_students(world, gen_students, gen_steps, gen_seed);
    ckt::SkillIndex skills;
    for (std::size_t c = 0; c < gen_skills; ++c) skills.add(std::to_string(c));

    ckt::save_world((fs::path(gen_out) / "world.json").string(), world);
    ckt::save_responses((fs::path(gen_out) / "responses.csv").string(), sequences, skills);
    ckt::save_skill_index((fs::path(gen_out) / "skill_index.json").string(), skills);
    std::printf("wrote %zu sequences over %zu skills to %s\n", sequences.size(), gen_skills,
                gen_out.c_str());
  });

  // train ---------------------------------------------------------------
  auto* train_cmd = app.add_subcommand("train", "Fit the model and write a checkpoint");
  std::string train_data, train_config_path, train_out;
  ckt::TrainConfig cfg;
  train_cmd->add_option("--data", train_data, "Directory holding responses.csv")->required();
  train_cmd->add_option("--config", train_config_path, "JSON config; flags override its fields");
  train_cmd->add_option("--out", train_out, "Output directory")->required();
  auto* opt_epochs = train_cmd->add_option("--epochs", cfg.epochs)->capture_default_str();
  auto* opt_batch = train_cmd->add_option("--batch-size", cfg.batch_size)->capture_default_str();
  auto* opt_lr = train_cmd->add_option("--learning-rate", cfg.learning_rate)
                     ->capture_default_str();
  auto* opt_temp = train_cmd->add_option("--init-temperature", cfg.init_temperature)
                       ->capture_default_str();
  auto* opt_unroll = train_cmd->add_option("--init-unroll", cfg.init_unroll)
                         ->capture_default_str();
  auto* opt_tinc = train_cmd->add_option("--temperature-increment", cfg.temperature_increment)
                       ->capture_default_str();
  auto* opt_uinc = train_cmd->add_option("--unroll-increment", cfg.unroll_increment)
                       ->capture_default_str();
  auto* opt_period = train_cmd->add_option("--schedule-period", cfg.schedule_period_epochs)
                         ->capture_default_str();
  auto* opt_astart = train_cmd->add_option("--alpha-start", cfg.alpha_start)
                         ->capture_default_str();
  auto* opt_ainc = train_cmd->add_option("--alpha-increment", cfg.alpha_increment)
                       ->capture_default_str();
  auto* opt_acap = train_cmd->add_option("--alpha-cap", cfg.alpha_cap)->capture_default_str();
  auto* opt_adaptive = train_cmd->add_option("--adaptive", cfg.adaptive_schedule,
                                             "Step the schedule every period (true/false)")
                           ->capture_default_str();
  auto* opt_mult = train_cmd->add_option("--multiplicative-schedule",
                                         cfg.multiplicative_schedule)
                       ->capture_default_str();
  auto* opt_structure = train_cmd->add_option("--structure-mode", cfg.structure_mode,
                                              "learnable or fixed-dense")
                            ->check(CLI::IsMember({"learnable", "fixed-dense"}))
                            ->capture_default_str();
  auto* opt_onehot = train_cmd->add_option("--one-hot", cfg.one_hot_input,
                                           "Use +/-1 one-hot inputs instead of embeddings")
                         ->capture_default_str();
  auto* opt_kappa = train_cmd->add_option("--kappa", cfg.kappa)->capture_default_str();
  auto* opt_emb = train_cmd->add_option("--embedding-dim", cfg.embedding_dim)
                      ->capture_default_str();
  auto* opt_seed = train_cmd->add_option("--seed", cfg.seed)->capture_default_str();
  auto* opt_clip = train_cmd->add_option("--grad-clip", cfg.grad_clip_norm)
                       ->capture_default_str();
  auto* opt_heldout = train_cmd->add_option("--heldout-fraction", cfg.heldout_fraction)
                          ->capture_default_str();
  train_cmd->callback([&] {
    if (!train_config_path.empty()) {
      ckt::TrainConfig from_file = ckt::load_train_config(train_config_path);
      // Flags given on the command line win over the file.
      if (!*opt_epochs) cfg.epochs = from_file.epochs;
      if (!*opt_batch) cfg.batch_size = from_file.batch_size;
      if (!*opt_lr) cfg.learning_rate = from_file.learning_rate;
      if (!*opt_temp) cfg.init_temperature = from_file.init_temperature;
      if (!*opt_unroll) cfg.init_unroll = from_file.init_unroll;
      if (!*opt_tinc) cfg.temperature_increment = from_file.temperature_increment;
      if (!*opt_uinc) cfg.unroll_increment = from_file.unroll_increment;
      if (!*opt_period) cfg.schedule_period_epochs = from_file.schedule_period_epochs;
      if (!*opt_astart) cfg.alpha_start = from_file.alpha_start;
      if (!*opt_ainc) cfg.alpha_increment = from_file.alpha_increment;
      if (!*opt_acap) cfg.alpha_cap = from_file.alpha_cap;
      if (!*opt_adaptive) cfg.adaptive_schedule = from_file.adaptive_schedule;
      if (!*opt_mult) cfg.multiplicative_schedule = from_file.multiplicative_schedule;
      if (!*opt_structure) cfg.structure_mode = from_file.structure_mode;
      if (!*opt_onehot) cfg.one_hot_input = from_file.one_hot_input;
      if (!*opt_kappa) cfg.kappa = from_file.kappa;
      if (!*opt_emb) cfg.embedding_dim = from_file.embedding_dim;
      if (!*opt_seed) cfg.seed = from_file.seed;
      if (!*opt_clip) cfg.grad_clip_norm = from_file.grad_clip_norm;
      if (!*opt_heldout) cfg.heldout_fraction = from_file.heldout_fraction;
    }

    ckt::Dataset dataset = ckt::load_responses((fs::path(train_data) / "responses.csv").string());
    if (dataset.sequences.empty()) throw std::runtime_error("train: dataset has no sequences");
    auto [train_split, heldout] =
        ckt::split_by_student(dataset.sequences, cfg.heldout_fraction, cfg.seed);

    ckt::TrainResult result = ckt::train(train_split, dataset.skills.size(), cfg);

    fs::create_directories(train_out);
    ckt::write_history_csv((fs::path(train_out) / "history.csv").string(), result.history);
    ckt::Checkpoint checkpoint{cfg, dataset.skills.size(), cfg.epochs, dataset.skills,
                               result.model.params(), result.rng_state};
    ckt::save_checkpoint((fs::path(train_out) / "checkpoint.json").string(), checkpoint);

    ordered_json summary;
    summary["final_loss"] = result.history.empty() ? 0.0 : result.history.back().loss;
    if (!heldout.empty()) {
      ckt::EvalMetrics m =
          ckt::evaluate_prediction(result.model, ckt::final_settings(cfg, cfg.epochs), heldout);
      summary["heldout_log_loss"] = m.log_loss;
      summary["heldout_auc"] = m.auc;
      summary["heldout_accuracy"] = m.accuracy;
      summary["heldout_events"] = m.events;
    }
    std::cout << summary.dump() << "\n";
  });

  // extract -------------------------------------------------------------
  auto* extract = app.add_subcommand("extract", "Threshold a checkpoint into a graph");
  std::string ex_checkpoint, ex_out;
  double ex_kappa = -1.0;
  extract->add_option("--checkpoint", ex_checkpoint, "checkpoint.json")->required();
  extract->add_option("--kappa", ex_kappa, "Cutoff; defaults to the trained config's value");
  extract->add_option("--out", ex_out, "Output directory")->required();
  extract->callback([&] {
    ckt::Checkpoint checkpoint = ckt::load_checkpoint(ex_checkpoint);
    ckt::Model model = ckt::model_from_checkpoint(checkpoint);
    EvaluatedValues values = evaluate_mask(checkpoint, model);
    double kappa = ex_kappa > 0.0 ? ex_kappa : checkpoint.config.kappa;
    ckt::AdjacencyMatrix adj = ckt::extract_adjacency(values.structure, values.ordering, kappa);

    fs::create_directories(ex_out);
    ckt::write_edge_csv((fs::path(ex_out) / "adjacency.csv").string(), adj, checkpoint.skills);
    std::ofstream dot((fs::path(ex_out) / "graph.dot").string());
    dot << ckt::to_dot(adj, checkpoint.skills);

    std::vector<std::size_t> skill_at = ckt::round_to_permutation(values.ordering);
    ordered_json ordering;
    ordering["order"] = ordered_json::array();
    for (std::size_t pos = 0; pos < skill_at.size(); ++pos) {
      ordering["order"].push_back(checkpoint.skills.id_of[skill_at[pos]]);
    }
    ordering["position"] = ordered_json::object();
    for (std::size_t pos = 0; pos < skill_at.size(); ++pos) {
      ordering["position"][checkpoint.skills.id_of[skill_at[pos]]] = pos;
    }
    std::ofstream ord((fs::path(ex_out) / "ordering.json").string());
    ord << ordering.dump(2) << "\n";
    std::printf("wrote %zu edges at kappa %.3f to %s\n", adj.edge_count(), kappa,
                ex_out.c_str());
  });

  // evaluate --------------------------------------------------------------
  auto* evaluate = app.add_subcommand("evaluate", "Score a predicted graph against truth");
  std::string ev_pred, ev_truth;
  evaluate->add_option("--pred", ev_pred, "Predicted edges (CSV or world JSON)")->required();
  evaluate->add_option("--truth", ev_truth, "True edges (CSV or world JSON)")->required();
  evaluate->callback([&] {
    print_score_json(score_edge_sets(load_truth_edges(ev_pred), load_truth_edges(ev_truth)));
  });

  // sweep-kappa ---------------------------------------------------------
  auto* sweep = app.add_subcommand("sweep-kappa", "F1 across a grid of cutoffs");
  std::string sw_checkpoint, sw_truth, sw_grid = "0.40:0.55:0.005";
  sweep->add_option("--checkpoint", sw_checkpoint, "checkpoint.json")->required();
  sweep->add_option("--truth", sw_truth, "True edges (CSV or world JSON)")->required();
  sweep->add_option("--grid", sw_grid, "start:stop:step")->capture_default_str();
  sweep->callback([&] {
    KappaGrid grid = parse_grid(sw_grid);
    ckt::Checkpoint checkpoint = ckt::load_checkpoint(sw_checkpoint);
    ckt::Model model = ckt::model_from_checkpoint(checkpoint);
    EvaluatedValues values = evaluate_mask(checkpoint, model);
    auto truth = load_truth_edges(sw_truth);

    std::printf("kappa,precision,recall,f1\n");
    for (double kappa = grid.start; kappa <= grid.stop + 1e-12; kappa += grid.step) {
      ckt::AdjacencyMatrix adj = ckt::extract_adjacency(values.structure, values.ordering, kappa);
      std::vector<std::pair<std::string, std::string>> predicted;
      for (const auto& [src, dst] : ckt::edge_list(adj, checkpoint.skills)) {
        predicted.emplace_back(src, dst);
      }
      ckt::StructuralScore score = score_edge_sets(predicted, truth);
      std::printf("%.3f,%.6f,%.6f,%.6f\n", kappa, score.precision, score.recall, score.f1);
    }
  });

  CLI11_PARSE(app, argc, argv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
