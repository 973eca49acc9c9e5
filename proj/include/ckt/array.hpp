#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace ckt {

// Dense row-major array of doubles. Rank 1 and rank 2 cover the whole model;
// scalars use shape {1}.
class Array {
 public:
  Array() = default;

  explicit Array(std::vector<std::size_t> shape)
      : shape_(std::move(shape)), data_(count(shape_), 0.0) {}

  Array(std::vector<std::size_t> shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != count(shape_)) {
      throw std::invalid_argument("Array: data length " + std::to_string(data_.size()) +
                                  " does not match shape " + shape_string());
    }
  }

  static Array scalar(double v) {
    return Array(std::vector<std::size_t>{1}, std::vector<double>{v});
  }
  static Array vec(std::vector<double> values) {
    std::size_t n = values.size();
    return Array(std::vector<std::size_t>{n}, std::move(values));
  }
  static Array matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Array full(std::vector<std::size_t> shape, double v) {
    Array a(std::move(shape));
    for (double& x : a.data_) x = v;
    return a;
  }
  static Array identity(std::size_t n);
  // Lower-triangular ones, diagonal included.
  static Array lower_triangle_ones(std::size_t n);
  // Ones strictly below the diagonal, zero elsewhere.
  static Array strict_lower_mask(std::size_t n);
  static Array one_hot(std::size_t n, std::size_t index, double v = 1.0);

  std::size_t ndim() const { return shape_.size(); }
  std::size_t numel() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  const std::vector<std::size_t>& shape() const { return shape_; }

  std::size_t rows() const { require_rank(2); return shape_[0]; }
  std::size_t cols() const { require_rank(2); return shape_[1]; }
  std::size_t length() const { require_rank(1); return shape_[0]; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Array& other) const { return shape_ == other.shape_; }

  bool all_finite() const {
    for (double x : data_) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  }

  std::string shape_string() const;

 private:
  static std::size_t count(const std::vector<std::size_t>& shape) {
    if (shape.empty()) return 0;
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
  }
  void require_rank(std::size_t r) const {
    if (shape_.size() != r) {
      throw std::logic_error("Array: rank-" + std::to_string(r) + " access on shape " +
                             shape_string());
    }
  }

  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

}  // namespace ckt
