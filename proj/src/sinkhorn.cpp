#include "ckt/sinkhorn.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <tuple>

namespace ckt {

namespace {

constexpr double kDenominatorFloor = 1e-30;

void require_square(const char* op, const Array& a) {
  if (a.ndim() != 2 || a.rows() != a.cols() || a.numel() == 0) {
    throw std::invalid_argument(std::string(op) + ": square matrix required, got shape " +
                                a.shape_string());
  }
}

void check_sums(const Array& sums, const char* axis) {
  for (std::size_t i = 0; i < sums.numel(); ++i) {
    if (!(sums[i] > kDenominatorFloor)) {
      throw std::runtime_error(std::string("sinkhorn: degenerate ") + axis + " sum at index " +
                               std::to_string(i) + " during normalization");
    }
  }
}

}  // namespace

NodeRef sinkhorn(Tape& tape, NodeRef logits, const SinkhornConfig& config) {
  const Array& lv = tape.val(logits);
  require_square("sinkhorn", lv);
  if (!(config.temperature > 0.0)) {
    throw std::invalid_argument("sinkhorn: temperature must be positive");
  }
  if (config.unroll < 1) throw std::invalid_argument("sinkhorn: unroll must be at least 1");
  if (!lv.all_finite()) throw std::invalid_argument("sinkhorn: non-finite logits");

  // Subtracting the max before scaling bounds the exponent above by zero, so
  // the exp never overflows and every row/column keeps at least one entry
  // that is not denormal.
  NodeRef peak = tape.global_max(logits);
  NodeRef x = tape.exp(tape.scale(tape.sub_scalar(logits, peak), config.temperature));
  for (int round = 0; round < config.unroll; ++round) {
    NodeRef row_sums = tape.row_sum(x);
    check_sums(tape.val(row_sums), "row");
    x = tape.div_rows(x, row_sums);
    NodeRef col_sums = tape.col_sum(x);
    check_sums(tape.val(col_sums), "column");
    x = tape.div_cols(x, col_sums);
  }
  return x;
}

double hardness(const Array& p) {
  require_square("hardness", p);
  std::size_t n = p.rows();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double best = p.at(i, 0);
    for (std::size_t j = 1; j < n; ++j) best = std::max(best, p.at(i, j));
    acc += best;
  }
  return acc / static_cast<double>(n);
}

std::vector<std::size_t> round_to_permutation(const Array& p) {
  require_square("round_to_permutation", p);
  std::size_t n = p.rows();

  // Sort entries once and sweep; equivalent to repeatedly taking the global
  // max and striking its row and column, but O(C^2 log C).
  struct Entry {
    double value;
    std::size_t row, col;
  };
  std::vector<Entry> entries;
  entries.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) entries.push_back({p.at(i, j), i, j});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return std::tie(b.value, a.row, a.col) < std::tie(a.value, b.row, b.col);
  });

  std::vector<std::size_t> row_of_col(n, n);
  std::vector<bool> row_used(n, false), col_used(n, false);
  std::size_t assigned = 0;
  for (const Entry& e : entries) {
    if (assigned == n) break;
    if (row_used[e.row] || col_used[e.col]) continue;
    row_of_col[e.col] = e.row;
    row_used[e.row] = true;
    col_used[e.col] = true;
    ++assigned;
  }
  return row_of_col;
}

}  // namespace ckt
