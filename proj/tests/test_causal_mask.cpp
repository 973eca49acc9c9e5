#include <doctest.h>

#include "ckt/causal_mask.hpp"
#include "ckt/metrics.hpp"
#include "test_support.hpp"

using namespace ckt;
using namespace ckt::testing;

namespace {

MaskSettings learnable(double alpha, double temperature = 2.0, int unroll = 5) {
  return MaskSettings{StructureMode::kLearnable, alpha, SinkhornConfig{temperature, unroll}};
}

Array hard_permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> target(n);
  for (std::size_t i = 0; i < n; ++i) target[i] = i;
  rng.shuffle(target);
  Array p({n, n});
  for (std::size_t pos = 0; pos < n; ++pos) p.at(target[pos], pos) = 1.0;
  return p;
}

Array random_binary_structure(std::size_t n, Rng& rng, double density = 0.5) {
  Array l = Array::identity(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) l.at(i, j) = rng.uniform() < density ? 1.0 : 0.0;
  }
  return l;
}

// Plain-array conjugation oracle, independent of the tape path.
Array conjugate(const Array& p, const Array& l) {
  std::size_t n = p.rows();
  Array out({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) acc += p.at(i, a) * l.at(a, b) * p.at(j, b);
      }
      out.at(i, j) = acc;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("fixed-dense structure is the full lower triangle") {
  Tape t;
  NodeRef l = build_structure(t, NodeRef{}, 3,
                              MaskSettings{StructureMode::kFixedDense, 10.0, {}});
  const Array& lv = t.val(l);
  Array want = Array::matrix({{1, 0, 0}, {1, 1, 0}, {1, 1, 1}});
  for (std::size_t i = 0; i < 9; ++i) CHECK(lv[i] == want[i]);
}

TEST_CASE("learnable structure pins diagonal and upper triangle exactly") {
  Tape t;
  NodeRef logits = t.leaf(Array({4, 4}));  // all-zero logits
  const Array& lv = t.val(build_structure(t, logits, 4, learnable(3.0)));
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      if (i == j) {
        CHECK(lv.at(i, j) == 1.0);
      } else if (j > i) {
        CHECK(lv.at(i, j) == 0.0);  // identically zero, not merely small
      } else {
        CHECK(lv.at(i, j) == 0.5);  // sigmoid of zero
      }
    }
  }
}

TEST_CASE("large alpha saturates the strict lower entries") {
  Tape t;
  Array logits({3, 3});
  logits.at(1, 0) = 1.0;
  logits.at(2, 0) = -1.0;
  const Array& lv = t.val(build_structure(t, t.leaf(logits), 3, learnable(50.0)));
  CHECK(std::abs(lv.at(1, 0) - 1.0) < 1e-8);
  CHECK(std::abs(lv.at(2, 0) - 0.0) < 1e-8);
}

TEST_CASE("near-identity ordering leaves the dense structure in place") {
  std::size_t n = 4;
  Array ordering_logits({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) ordering_logits.at(i, j) = i == j ? 8.0 : -8.0;
  }
  Tape t;
  MaskNodes nodes =
      build_mask(t, t.leaf(ordering_logits), t.leaf(Array({n, n})), n,
                 MaskSettings{StructureMode::kFixedDense, 10.0, SinkhornConfig{12.0, 30}});
  CHECK(max_abs_diff(t.val(nodes.mask), Array::lower_triangle_ones(n)) < 1e-3);
}

TEST_CASE("swap permutation mirrors the structure") {
  Array swap = Array::matrix({{0, 1}, {1, 0}});
  Array l = Array::matrix({{1, 0}, {1, 1}});
  Array m = conjugate(swap, l);
  CHECK(m.at(0, 0) == 1.0);
  CHECK(m.at(0, 1) == 1.0);
  CHECK(m.at(1, 0) == 0.0);
  CHECK(m.at(1, 1) == 1.0);
}

TEST_CASE("hard conjugation relabels the support") {
  Rng rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    std::size_t n = 2 + rng.index(7);
    Array p = hard_permutation(n, rng);
    Array l = random_binary_structure(n, rng);
    Array m = conjugate(p, l);

    std::vector<std::size_t> skill_at = round_to_permutation(p);
    for (std::size_t i = 0; i < n; ++i) CHECK(m.at(i, i) == 1.0);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        CHECK(m.at(skill_at[a], skill_at[b]) == l.at(a, b));
      }
    }
  }
}

TEST_CASE("extracted graphs are acyclic for any hard ordering and binary structure") {
  Rng rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 2 + rng.index(49);
    Array p = hard_permutation(n, rng);
    Array l = random_binary_structure(n, rng, rng.uniform(0.1, 1.0));
    AdjacencyMatrix adj = extract_adjacency(l, p, 0.5);
    CHECK(topological_order(adj).is_dag);
  }
}

TEST_CASE("gradients reach both logit groups through the mask") {
  Rng rng(47);
  std::size_t n = 4;
  Array ordering0 = random_array({n, n}, rng, -0.5, 0.5);
  Array structure0 = random_array({n, n}, rng, -0.5, 0.5);
  Array weights = random_array({n, n}, rng);
  MaskSettings settings = learnable(2.0, 2.0, 5);

  auto loss_fn = [&](const Array& ordering, const Array& structure) {
    Tape t;
    MaskNodes nodes = build_mask(t, t.leaf(ordering), t.leaf(structure), n, settings);
    return t.val(t.sum_all(t.mul(nodes.mask, t.leaf(weights))))[0];
  };

  Tape t;
  NodeRef on = t.leaf(ordering0);
  NodeRef sn = t.leaf(structure0);
  MaskNodes nodes = build_mask(t, on, sn, n, settings);
  t.backward(t.sum_all(t.mul(nodes.mask, t.leaf(weights))));

  Array ordering_grad = t.gradient(on);
  Array structure_grad = t.gradient(sn);
  double onorm = 0.0, snorm = 0.0;
  for (std::size_t i = 0; i < n * n; ++i) {
    onorm += std::abs(ordering_grad[i]);
    snorm += std::abs(structure_grad[i]);
  }
  CHECK(onorm > 1e-6);
  CHECK(snorm > 1e-6);

  auto fd_o = fd_gradient([&](const Array& o) { return loss_fn(o, structure0); }, ordering0);
  auto fd_s = fd_gradient([&](const Array& s) { return loss_fn(ordering0, s); }, structure0);
  CHECK(max_rel_err(ordering_grad, fd_o) < 1e-4);
  CHECK(max_rel_err(structure_grad, fd_s) < 1e-4);
}

TEST_CASE("extraction thresholds") {
  Array dense = Array::lower_triangle_ones(3);
  AdjacencyMatrix adj = extract_adjacency(dense, Array::identity(3), 0.5);
  CHECK(adj.edge_count() == 3);
  CHECK(adj.at(1, 0));
  CHECK(adj.at(2, 0));
  CHECK(adj.at(2, 1));
  for (std::size_t i = 0; i < 3; ++i) CHECK(!adj.at(i, i));

  Array faint = Array::identity(3);
  faint.at(1, 0) = 0.2;
  faint.at(2, 1) = 0.44;
  CHECK(extract_adjacency(faint, Array::identity(3), 0.45).edge_count() == 0);

  CHECK_THROWS_AS(extract_adjacency(dense, Array::identity(3), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(extract_adjacency(dense, Array::identity(3), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(threshold_adjacency(dense, -2.0), std::invalid_argument);
}

TEST_CASE("direct thresholding drops the diagonal") {
  Array m = Array::matrix({{0.9, 0.7}, {0.1, 0.95}});
  AdjacencyMatrix adj = threshold_adjacency(m, 0.5);
  CHECK(adj.edge_count() == 1);
  CHECK(adj.at(0, 1));
}
