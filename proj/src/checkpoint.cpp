#include "ckt/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace ckt {

namespace {

using nlohmann::json;

}  // namespace

void to_json(json& j, const TrainConfig& c);    // trainer.cpp
void from_json(const json& j, TrainConfig& c);  // trainer.cpp

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  json params = json::array();
  for (std::size_t i = 0; i < checkpoint.params.size(); ++i) {
    const Array& a = checkpoint.params.value(i);
    params.push_back(json{{"name", checkpoint.params.name(i)},
                          {"shape", a.shape()},
                          {"data", a.data()}});
  }
  json skills = json::object();
  for (std::size_t i = 0; i < checkpoint.skills.id_of.size(); ++i) {
    skills[checkpoint.skills.id_of[i]] = i;
  }
  json j{{"format_version", 1},
         {"train_config", checkpoint.config},
         {"num_skills", checkpoint.num_skills},
         {"epochs_completed", checkpoint.epochs_completed},
         {"skill_index", skills},
         {"rng_state", checkpoint.rng_state},
         {"params", params}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_checkpoint: cannot write " + path);
  out << j.dump() << "\n";
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  json j;
  in >> j;
  if (j.value("format_version", 0) != 1) {
    throw std::runtime_error("load_checkpoint: unsupported format version in " + path);
  }

  Checkpoint checkpoint;
  checkpoint.config = j.at("train_config").get<TrainConfig>();
  checkpoint.num_skills = j.at("num_skills").get<std::size_t>();
  checkpoint.epochs_completed = j.at("epochs_completed").get<int>();
  checkpoint.rng_state = j.at("rng_state").get<std::string>();

  const json& skills = j.at("skill_index");
  checkpoint.skills.id_of.resize(skills.size());
  for (auto& [id, dense] : skills.items()) {
    std::size_t d = dense.get<std::size_t>();
    if (d >= checkpoint.skills.id_of.size()) {
      throw std::runtime_error("load_checkpoint: dense skill index out of range in " + path);
    }
    checkpoint.skills.id_of[d] = id;
    checkpoint.skills.index_of.emplace(id, d);
  }

  for (const json& p : j.at("params")) {
    checkpoint.params.add(p.at("name").get<std::string>(),
                          Array(p.at("shape").get<std::vector<std::size_t>>(),
                                p.at("data").get<std::vector<double>>()));
  }
  return checkpoint;
}

Model model_from_checkpoint(const Checkpoint& checkpoint) {
  return Model(checkpoint.config.model_config(checkpoint.num_skills), checkpoint.params);
}

}  // namespace ckt
