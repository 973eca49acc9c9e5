#pragma once

#include <string>

#include "ckt/data.hpp"
#include "ckt/model.hpp"
#include "ckt/trainer.hpp"

namespace ckt {

// Everything needed to rebuild a trained model: config, parameter arrays,
// the skill-index mapping, and the trainer's RNG state.
struct Checkpoint {
  TrainConfig config;
  std::size_t num_skills = 0;
  int epochs_completed = 0;
  SkillIndex skills;
  ParamStore params;
  std::string rng_state;
};

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

Model model_from_checkpoint(const Checkpoint& checkpoint);

}  // namespace ckt
