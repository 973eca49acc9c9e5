#include "ckt/data.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ckt/tape.hpp"

namespace ckt {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace

std::size_t SkillIndex::add(const std::string& id) {
  auto it = index_of.find(id);
  if (it != index_of.end()) return it->second;
  std::size_t dense = id_of.size();
  id_of.push_back(id);
  index_of.emplace(id, dense);
  return dense;
}

Dataset load_responses(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_responses: cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_responses: empty file " + path);
  if (strip_cr(line) != "user_id,sequence,skill_id,is_correct") {
    throw std::runtime_error("load_responses: unexpected header in " + path + ": " + line);
  }

  Dataset dataset;
  std::unordered_map<std::string, std::size_t> seq_of_user;
  std::set<std::pair<std::string, int>> seen_positions;

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != 4) {
      throw std::runtime_error("load_responses: malformed row at line " +
                               std::to_string(line_no) + " (expected 4 fields)");
    }
    const std::string& user = fields[0];
    int position = 0;
    try {
      position = std::stoi(fields[1]);
    } catch (const std::exception&) {
      throw std::runtime_error("load_responses: bad sequence value at line " +
                               std::to_string(line_no));
    }
    if (!seen_positions.insert({user, position}).second) {
      throw std::runtime_error("load_responses: duplicate (user, position) at line " +
                               std::to_string(line_no));
    }
    bool correct;
    if (fields[3] == "1") {
      correct = true;
    } else if (fields[3] == "0") {
      correct = false;
    } else {
      throw std::runtime_error("load_responses: is_correct must be 0 or 1 at line " +
                               std::to_string(line_no) + ", got '" + fields[3] + "'");
    }

    auto it = seq_of_user.find(user);
    if (it == seq_of_user.end()) {
      it = seq_of_user.emplace(user, dataset.sequences.size()).first;
      dataset.sequences.push_back(ResponseSequence{user, {}});
    }
    dataset.sequences[it->second].events.push_back(
        ResponseEvent{position, dataset.skills.add(fields[2]), correct});
  }

  for (ResponseSequence& seq : dataset.sequences) {
    std::sort(seq.events.begin(), seq.events.end(),
              [](const ResponseEvent& a, const ResponseEvent& b) {
                return a.position < b.position;
              });
  }
  return dataset;
}

void save_responses(const std::string& path, const std::vector<ResponseSequence>& sequences,
                    const SkillIndex& skills) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_responses: cannot write " + path);
  out << "user_id,sequence,skill_id,is_correct\n";
  for (const ResponseSequence& seq : sequences) {
    for (const ResponseEvent& e : seq.events) {
      out << seq.user_id << "," << e.position << "," << skills.id_of[e.skill] << ","
          << (e.correct ? 1 : 0) << "\n";
    }
  }
}

void save_skill_index(const std::string& path, const SkillIndex& skills) {
  json j = json::object();
  for (std::size_t i = 0; i < skills.id_of.size(); ++i) j[skills.id_of[i]] = i;
  write_json_file(path, j);
}

SkillIndex load_skill_index(const std::string& path) {
  json j = read_json_file(path);
  SkillIndex skills;
  skills.id_of.resize(j.size());
  for (auto& [id, dense] : j.items()) {
    std::size_t d = dense.get<std::size_t>();
    if (d >= skills.id_of.size()) {
      throw std::runtime_error("load_skill_index: dense index out of range in " + path);
    }
    skills.id_of[d] = id;
    skills.index_of.emplace(id, d);
  }
  return skills;
}

AdjacencyMatrix PlantedWorld::adjacency() const {
  AdjacencyMatrix adj(num_skills);
  for (const Edge& e : edges) adj.set(e.dependent, e.prereq, true);
  return adj;
}

PlantedWorld sample_dag(std::size_t num_skills, double edge_density, Rng& rng) {
  if (num_skills < 2) throw std::invalid_argument("sample_dag: need at least 2 skills");
  if (!(edge_density > 0.0 && edge_density <= 1.0)) {
    throw std::invalid_argument("sample_dag: edge density must lie in (0,1]");
  }
  std::vector<std::size_t> order(num_skills);
  for (std::size_t i = 0; i < num_skills; ++i) order[i] = i;
  rng.shuffle(order);

  PlantedWorld world;
  world.num_skills = num_skills;
  for (std::size_t a = 0; a < num_skills; ++a) {
    for (std::size_t b = a + 1; b < num_skills; ++b) {
      if (rng.uniform() < edge_density) {
        world.edges.push_back({order[a], order[b], rng.uniform(0.5, 1.5)});
      }
    }
  }
  return world;
}

PlantedWorld chain_dag(std::size_t num_skills) {
  if (num_skills < 2) throw std::invalid_argument("chain_dag: need at least 2 skills");
  PlantedWorld world;
  world.num_skills = num_skills;
  for (std::size_t i = 0; i + 1 < num_skills; ++i) world.edges.push_back({i, i + 1, 1.0});
  return world;
}

std::vector<ResponseSequence> simulate_students(const PlantedWorld& world,
                                                std::size_t num_students, std::size_t steps,
                                                std::uint64_t seed) {
  if (num_students < 1) throw std::invalid_argument("simulate_students: need students");
  if (steps < 2) throw std::invalid_argument("simulate_students: need at least 2 steps");

  std::vector<std::vector<PlantedWorld::Edge>> parents(world.num_skills);
  for (const PlantedWorld::Edge& e : world.edges) parents[e.dependent].push_back(e);

  std::vector<ResponseSequence> sequences;
  sequences.reserve(num_students);
  for (std::size_t s = 0; s < num_students; ++s) {
    Rng rng(derive_seed(seed, s));
    std::vector<double> mastery(world.num_skills);
    for (double& m : mastery) m = rng.normal();

    ResponseSequence seq;
    seq.user_id = std::to_string(s);
    seq.events.reserve(steps);
    for (std::size_t t = 0; t < steps; ++t) {
      std::size_t skill = rng.index(world.num_skills);
      double p = sigmoid_value(mastery[skill]);
      p = std::max(world.guess, std::min(1.0 - world.slip, p));
      bool correct = rng.bernoulli(p);
      seq.events.push_back(ResponseEvent{static_cast<int>(t + 1), skill, correct});

      // Parents' mastery gates how much this practice step teaches.
      double gate = 1.0;
      if (!parents[skill].empty()) {
        double acc = 0.0;
        for (const PlantedWorld::Edge& e : parents[skill]) acc += e.weight * mastery[e.prereq];
        gate = sigmoid_value(acc / static_cast<double>(parents[skill].size()));
      }
      mastery[skill] += world.mastery_gain * gate + world.noise_scale * rng.normal();
    }
    sequences.push_back(std::move(seq));
  }
  return sequences;
}

void save_world(const std::string& path, const PlantedWorld& world) {
  json edges = json::array();
  for (const PlantedWorld::Edge& e : world.edges) {
    edges.push_back(json::array({e.prereq, e.dependent, e.weight}));
  }
  json j{{"format_version", 1},
         {"num_skills", world.num_skills},
         {"edges", edges},
         {"noise_scale", world.noise_scale},
         {"mastery_gain", world.mastery_gain},
         {"guess", world.guess},
         {"slip", world.slip},
         {"seed", world.seed}};
  write_json_file(path, j);
}

PlantedWorld load_world(const std::string& path) {
  json j = read_json_file(path);
  PlantedWorld world;
  world.num_skills = j.at("num_skills").get<std::size_t>();
  for (const json& e : j.at("edges")) {
    world.edges.push_back({e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>(),
                           e.at(2).get<double>()});
  }
  world.noise_scale = j.at("noise_scale").get<double>();
  world.mastery_gain = j.at("mastery_gain").get<double>();
  world.guess = j.at("guess").get<double>();
  world.slip = j.at("slip").get<double>();
  world.seed = j.at("seed").get<std::uint64_t>();
  for (const PlantedWorld::Edge& e : world.edges) {
    if (e.prereq >= world.num_skills || e.dependent >= world.num_skills) {
      throw std::runtime_error("load_world: edge endpoint out of range in " + path);
    }
  }
  return world;
}

}  // namespace ckt
