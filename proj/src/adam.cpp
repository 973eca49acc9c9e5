#include "ckt/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace ckt {

Adam::Adam(AdamConfig config, const ParamStore& params) : config_(config) {
  first_moment_.reserve(params.size());
  second_moment_.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    first_moment_.emplace_back(params.value(i).shape());
    second_moment_.emplace_back(params.value(i).shape());
  }
}

void Adam::step(ParamStore& params, const std::vector<Array>& grads) {
  if (grads.size() != params.size()) {
    throw std::invalid_argument("Adam::step: gradient count does not match parameter count");
  }
  ++steps_;
  double correction1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
  double correction2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
  for (std::size_t p = 0; p < params.size(); ++p) {
    Array& value = params.value(p);
    const Array& g = grads[p];
    if (!value.same_shape(g)) {
      throw std::invalid_argument("Adam::step: gradient shape " + g.shape_string() +
                                  " does not match parameter " + params.name(p) + " " +
                                  value.shape_string());
    }
    Array& m = first_moment_[p];
    Array& v = second_moment_[p];
    for (std::size_t i = 0; i < value.numel(); ++i) {
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
      double m_hat = m[i] / correction1;
      double v_hat = v[i] / correction2;
      value[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

double clip_global_norm(std::vector<Array>& grads, double max_norm) {
  double sq = 0.0;
  for (const Array& g : grads) {
    for (std::size_t i = 0; i < g.numel(); ++i) sq += g[i] * g[i];
  }
  double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    double s = max_norm / norm;
    for (Array& g : grads) {
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] *= s;
    }
  }
  return norm;
}

}  // namespace ckt
