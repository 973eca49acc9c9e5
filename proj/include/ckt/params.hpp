#pragma once

#include <string>
#include <vector>

#include "ckt/array.hpp"

namespace ckt {

// Named flat registry of trainable arrays. Insertion order is stable and
// defines the layout of gradients, optimizer state, and checkpoints.
class ParamStore {
 public:
  std::size_t add(std::string name, Array value) {
    names_.push_back(std::move(name));
    values_.push_back(std::move(value));
    return values_.size() - 1;
  }

  std::size_t size() const { return values_.size(); }
  Array& value(std::size_t i) { return values_[i]; }
  const Array& value(std::size_t i) const { return values_[i]; }
  const std::string& name(std::size_t i) const { return names_[i]; }

 private:
  std::vector<std::string> names_;
  std::vector<Array> values_;
};

}  // namespace ckt
