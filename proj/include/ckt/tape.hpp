#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "ckt/array.hpp"

namespace ckt {

// Index of a value recorded on a Tape.
struct NodeRef {
  std::size_t id = std::numeric_limits<std::size_t>::max();
};

// Reverse-mode tape over Array values. A tape records one forward pass, is
// swept once by backward(), and is then discarded; nodes are appended in
// evaluation order, so a single reverse sweep visits each node exactly once.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  NodeRef leaf(Array value);
  NodeRef constant(Array value) { return leaf(std::move(value)); }
  NodeRef constant(double v) { return leaf(Array::scalar(v)); }

  const Array& val(NodeRef n) const { return slots_[n.id].value; }

  // Gradient accumulated by backward(); zeros for nodes the loss never reached.
  Array gradient(NodeRef n) const;

  // elementwise
  NodeRef add(NodeRef a, NodeRef b);
  NodeRef sub(NodeRef a, NodeRef b);
  NodeRef mul(NodeRef a, NodeRef b);
  NodeRef neg(NodeRef a);
  NodeRef scale(NodeRef a, double c);
  NodeRef sigmoid(NodeRef a);
  NodeRef tanh(NodeRef a);
  NodeRef exp(NodeRef a);
  NodeRef log(NodeRef a);

  // linear algebra
  NodeRef matmul(NodeRef a, NodeRef b);
  NodeRef matvec(NodeRef w, NodeRef x);
  NodeRef transpose(NodeRef a);

  // reductions
  NodeRef sum_all(NodeRef a);
  NodeRef row_sum(NodeRef a);
  NodeRef col_sum(NodeRef a);
  NodeRef row_max(NodeRef a);     // ties break toward the first column
  NodeRef global_max(NodeRef a);  // ties break toward the first entry, row-major

  // broadcasting forms used by the permutation relaxation
  NodeRef sub_scalar(NodeRef a, NodeRef s);  // a - s with s scalar-shaped
  NodeRef div_rows(NodeRef a, NodeRef r);    // a(i,j) / r(i)
  NodeRef div_cols(NodeRef a, NodeRef c);    // a(i,j) / c(j)

  // structure
  NodeRef concat(NodeRef a, NodeRef b);      // rank-1 inputs
  NodeRef column(NodeRef m, std::size_t j);  // rank-1 copy of column j

  void backward(NodeRef loss);

  std::size_t size() const { return slots_.size(); }

 private:
  struct Slot {
    Array value;
    Array grad;                           // empty until first accumulation
    std::function<void(Tape&)> backprop;  // empty for leaves
  };

  NodeRef push(Array value, std::function<void(Tape&)> backprop);
  Array& grad_buf(std::size_t id);

  std::vector<Slot> slots_;
  bool swept_ = false;
};

// Overflow-safe logistic, shared by the tape and the response simulator.
double sigmoid_value(double x);

}  // namespace ckt
