#pragma once

#include <vector>

#include "ckt/array.hpp"
#include "ckt/params.hpp"

namespace ckt {

struct AdamConfig {
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction. First/second moments are laid out parallel to
// the ParamStore the optimizer was built for.
class Adam {
 public:
  Adam(AdamConfig config, const ParamStore& params);

  // grads must be parallel to the store (one array per parameter, same shape).
  void step(ParamStore& params, const std::vector<Array>& grads);

  long steps_taken() const { return steps_; }

 private:
  AdamConfig config_;
  std::vector<Array> first_moment_;
  std::vector<Array> second_moment_;
  long steps_ = 0;
};

// Scales grads in place so their global L2 norm is at most max_norm.
// Returns the pre-clip norm.
double clip_global_norm(std::vector<Array>& grads, double max_norm);

}  // namespace ckt
