#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ckt/data.hpp"
#include "ckt/metrics.hpp"
#include "test_support.hpp"

using namespace ckt;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("ckt_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

}  // namespace

TEST_CASE("loading a header-only file gives an empty dataset") {
  TempDir dir;
  write_file(dir.file("r.csv"), "user_id,sequence,skill_id,is_correct\n");
  Dataset d = load_responses(dir.file("r.csv"));
  CHECK(d.sequences.empty());
  CHECK(d.skills.size() == 0);
}

TEST_CASE("sequences group by user and sort by position") {
  TempDir dir;
  write_file(dir.file("r.csv"),
             "user_id,sequence,skill_id,is_correct\n"
             "a,1,s1,1\n"
             "b,1,s2,0\n"
             "a,3,s3,1\n"
             "b,2,s1,1\n"
             "a,2,s2,0\n"
             "b,3,s3,0\n");
  Dataset d = load_responses(dir.file("r.csv"));
  REQUIRE(d.sequences.size() == 2);
  CHECK(d.sequences[0].user_id == "a");
  REQUIRE(d.sequences[0].events.size() == 3);
  CHECK(d.sequences[0].events[0].position == 1);
  CHECK(d.sequences[0].events[1].position == 2);
  CHECK(d.sequences[0].events[2].position == 3);
  CHECK(d.sequences[0].events[1].skill == d.skills.index_of.at("s2"));
  CHECK(d.sequences[0].events[1].correct == false);
  CHECK(d.skills.size() == 3);
}

TEST_CASE("loader error reporting") {
  TempDir dir;
  write_file(dir.file("bad_fields.csv"),
             "user_id,sequence,skill_id,is_correct\na,1,s1\n");
  CHECK_THROWS_WITH_AS(load_responses(dir.file("bad_fields.csv")),
                       "load_responses: malformed row at line 2 (expected 4 fields)",
                       std::runtime_error);

  write_file(dir.file("dup.csv"),
             "user_id,sequence,skill_id,is_correct\na,1,s1,1\na,1,s2,0\n");
  CHECK_THROWS_WITH_AS(load_responses(dir.file("dup.csv")),
                       "load_responses: duplicate (user, position) at line 3",
                       std::runtime_error);

  write_file(dir.file("corr.csv"),
             "user_id,sequence,skill_id,is_correct\na,1,s1,yes\n");
  CHECK_THROWS_AS(load_responses(dir.file("corr.csv")), std::runtime_error);

  write_file(dir.file("head.csv"), "user,seq,skill,correct\n");
  CHECK_THROWS_AS(load_responses(dir.file("head.csv")), std::runtime_error);
}

TEST_CASE("responses round-trip through the CSV format") {
  PlantedWorld world = chain_dag(4);
  world.seed = 3;
  std::vector<ResponseSequence> sequences = simulate_students(world, 5, 12, 3);
  SkillIndex skills;
  for (std::size_t c = 0; c < 4; ++c) skills.add(std::to_string(c));

  TempDir dir;
  save_responses(dir.file("r.csv"), sequences, skills);
  Dataset loaded = load_responses(dir.file("r.csv"));
  REQUIRE(loaded.sequences.size() == sequences.size());
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    REQUIRE(loaded.sequences[s].events.size() == sequences[s].events.size());
    CHECK(loaded.sequences[s].user_id == sequences[s].user_id);
    for (std::size_t e = 0; e < sequences[s].events.size(); ++e) {
      const ResponseEvent& want = sequences[s].events[e];
      const ResponseEvent& got = loaded.sequences[s].events[e];
      CHECK(got.position == want.position);
      CHECK(loaded.skills.id_of[got.skill] == skills.id_of[want.skill]);
      CHECK(got.correct == want.correct);
    }
  }
}

TEST_CASE("skill index round-trip") {
  SkillIndex skills;
  skills.add("alg-7");
  skills.add("frac-2");
  skills.add("count");
  TempDir dir;
  save_skill_index(dir.file("idx.json"), skills);
  SkillIndex loaded = load_skill_index(dir.file("idx.json"));
  CHECK(loaded.id_of == skills.id_of);
  CHECK(loaded.index_of.at("frac-2") == 1);
}

TEST_CASE("dense random DAGs") {
  Rng rng(81);
  PlantedWorld full = sample_dag(3, 1.0, rng);
  CHECK(full.edges.size() == 3);

  for (int trial = 0; trial < 20; ++trial) {
    PlantedWorld world = sample_dag(2 + rng.index(20), rng.uniform(0.05, 1.0), rng);
    CHECK(topological_order(world.adjacency()).is_dag);
    for (const PlantedWorld::Edge& e : world.edges) {
      CHECK(e.weight >= 0.5);
      CHECK(e.weight <= 1.5);
    }
  }

  CHECK_THROWS_AS(sample_dag(1, 0.5, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_dag(5, 0.0, rng), std::invalid_argument);
}

TEST_CASE("frozen dynamics keep correctness rates stationary") {
  PlantedWorld world = chain_dag(3);
  world.mastery_gain = 0.0;
  world.noise_scale = 0.0;
  std::vector<ResponseSequence> sequences = simulate_students(world, 1, 4000, 17);
  const ResponseSequence& seq = sequences[0];

  // With mastery frozen, each skill's rate in the first and second half of
  // the sequence estimates the same Bernoulli parameter.
  for (std::size_t skill = 0; skill < 3; ++skill) {
    double first = 0.0, second = 0.0;
    std::size_t n_first = 0, n_second = 0;
    for (const ResponseEvent& e : seq.events) {
      if (e.skill != skill) continue;
      if (e.position <= 2000) {
        first += e.correct;
        ++n_first;
      } else {
        second += e.correct;
        ++n_second;
      }
    }
    REQUIRE(n_first > 200);
    REQUIRE(n_second > 200);
    double rate_first = first / n_first;
    double rate_second = second / n_second;
    CHECK(std::abs(rate_first - rate_second) < 0.15);
    CHECK(rate_first >= world.guess - 1e-12);
    CHECK(rate_first <= 1.0 - world.slip + 1e-12);
  }
}

TEST_CASE("chain mastery propagates from the root to the leaf") {
  // Slow mastery growth keeps students spread along their learning curves,
  // so the parent gate stays informative across the whole horizon.
  PlantedWorld world = chain_dag(3);
  world.mastery_gain = 0.2;
  world.noise_scale = 0.05;
  for (PlantedWorld::Edge& e : world.edges) e.weight = 2.0;
  std::size_t students = 1500, steps = 80;
  std::vector<ResponseSequence> sequences = simulate_students(world, students, steps, 19);

  // early success on the root should predict late success on the leaf
  std::vector<double> xs, ys;
  for (const ResponseSequence& seq : sequences) {
    double x = 0.0, y = 0.0;
    std::size_t nx = 0, ny = 0;
    for (const ResponseEvent& e : seq.events) {
      if (e.skill == 0 && e.position <= static_cast<int>(steps / 2)) {
        x += e.correct;
        ++nx;
      }
      if (e.skill == 2 && e.position > static_cast<int>(steps / 2)) {
        y += e.correct;
        ++ny;
      }
    }
    if (nx == 0 || ny == 0) continue;
    xs.push_back(x / nx);
    ys.push_back(y / ny);
  }
  REQUIRE(xs.size() > 500);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= xs.size();
  my /= ys.size();
  double cov = 0.0, vx = 0.0, vy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    cov += (xs[i] - mx) * (ys[i] - my);
    vx += (xs[i] - mx) * (xs[i] - mx);
    vy += (ys[i] - my) * (ys[i] - my);
  }
  double correlation = cov / std::sqrt(vx * vy);
  MESSAGE("root-to-leaf correlation: ", correlation);
  CHECK(correlation > 0.05);
}

TEST_CASE("simulation is deterministic in the seed") {
  PlantedWorld world = chain_dag(4);
  auto a = simulate_students(world, 10, 15, 23);
  auto b = simulate_students(world, 10, 15, 23);
  auto c = simulate_students(world, 10, 15, 24);
  REQUIRE(a.size() == b.size());
  bool all_equal = true, any_diff_seed = false;
  for (std::size_t s = 0; s < a.size(); ++s) {
    for (std::size_t e = 0; e < a[s].events.size(); ++e) {
      all_equal = all_equal && a[s].events[e].skill == b[s].events[e].skill &&
                  a[s].events[e].correct == b[s].events[e].correct;
      any_diff_seed = any_diff_seed || a[s].events[e].skill != c[s].events[e].skill ||
                      a[s].events[e].correct != c[s].events[e].correct;
    }
  }
  CHECK(all_equal);
  CHECK(any_diff_seed);
}

TEST_CASE("world files round-trip") {
  Rng rng(87);
  PlantedWorld world = sample_dag(6, 0.4, rng);
  world.noise_scale = 0.07;
  world.mastery_gain = 1.3;
  world.seed = 99;
  TempDir dir;
  save_world(dir.file("world.json"), world);
  PlantedWorld loaded = load_world(dir.file("world.json"));
  CHECK(loaded.num_skills == world.num_skills);
  REQUIRE(loaded.edges.size() == world.edges.size());
  for (std::size_t i = 0; i < world.edges.size(); ++i) {
    CHECK(loaded.edges[i].prereq == world.edges[i].prereq);
    CHECK(loaded.edges[i].dependent == world.edges[i].dependent);
    CHECK(loaded.edges[i].weight == world.edges[i].weight);
  }
  CHECK(loaded.noise_scale == world.noise_scale);
  CHECK(loaded.mastery_gain == world.mastery_gain);
  CHECK(loaded.seed == world.seed);
  CHECK(loaded.adjacency() == world.adjacency());
}
