#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "ckt/adjacency.hpp"
#include "ckt/rng.hpp"

namespace ckt {

struct ResponseEvent {
  int position = 0;       // strictly increasing within a user
  std::size_t skill = 0;  // dense index
  bool correct = false;
};

struct ResponseSequence {
  std::string user_id;
  std::vector<ResponseEvent> events;
};

// Original-id <-> dense-index mapping. Persisted next to datasets and inside
// checkpoints so reported graphs can use the source ids.
struct SkillIndex {
  std::vector<std::string> id_of;                         // dense -> original
  std::unordered_map<std::string, std::size_t> index_of;  // original -> dense

  std::size_t add(const std::string& id);
  std::size_t size() const { return id_of.size(); }
};

struct Dataset {
  std::vector<ResponseSequence> sequences;
  SkillIndex skills;
};

// CSV with header user_id,sequence,skill_id,is_correct. Sequences are grouped
// by user in order of first appearance; events sorted by position. Skill ids
// are densified in order of first appearance.
Dataset load_responses(const std::string& path);
void save_responses(const std::string& path, const std::vector<ResponseSequence>& sequences,
                    const SkillIndex& skills);

void save_skill_index(const std::string& path, const SkillIndex& skills);
SkillIndex load_skill_index(const std::string& path);

// Ground-truth world for synthetic response generation: a planted DAG plus
// the dynamics of the latent mastery process.
struct PlantedWorld {
  struct Edge {
    std::size_t prereq = 0;
    std::size_t dependent = 0;
    double weight = 1.0;
  };

  std::size_t num_skills = 0;
  std::vector<Edge> edges;
  double noise_scale = 0.5;
  double mastery_gain = 2.0;
  double guess = 0.1;
  double slip = 0.1;
  std::uint64_t seed = 0;

  AdjacencyMatrix adjacency() const;
};

// Random DAG: uniform topological order, each forward edge kept independently
// with the given probability, weights uniform in [0.5, 1.5].
PlantedWorld sample_dag(std::size_t num_skills, double edge_density, Rng& rng);

// Deterministic chain 0 -> 1 -> ... -> C-1 with unit weights.
PlantedWorld chain_dag(std::size_t num_skills);

// Per-student latent mastery simulation. Mastery starts Normal(0,1); each
// step practices a uniformly random skill, answers with probability
// clamp(sigmoid(mastery), guess, 1-slip), then grows by
// mastery_gain * sigmoid(mean of weighted parent mastery) plus noise
// (parentless skills use gate 1). Students get independent streams derived
// from the seed.
std::vector<ResponseSequence> simulate_students(const PlantedWorld& world,
                                                std::size_t num_students, std::size_t steps,
                                                std::uint64_t seed);

void save_world(const std::string& path, const PlantedWorld& world);
PlantedWorld load_world(const std::string& path);

}  // namespace ckt
