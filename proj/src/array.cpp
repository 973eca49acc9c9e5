#include "ckt/array.hpp"

namespace ckt {

Array Array::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  std::size_t m = rows.size();
  std::size_t n = m == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(m * n);
  for (const auto& row : rows) {
    if (row.size() != n) throw std::invalid_argument("Array::matrix: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Array({m, n}, std::move(data));
}

Array Array::identity(std::size_t n) {
  Array a({n, n});
  for (std::size_t i = 0; i < n; ++i) a.at(i, i) = 1.0;
  return a;
}

Array Array::lower_triangle_ones(std::size_t n) {
  Array a({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) a.at(i, j) = 1.0;
  }
  return a;
}

Array Array::strict_lower_mask(std::size_t n) {
  Array a({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) a.at(i, j) = 1.0;
  }
  return a;
}

Array Array::one_hot(std::size_t n, std::size_t index, double v) {
  if (index >= n) {
    throw std::out_of_range("Array::one_hot: index " + std::to_string(index) +
                            " out of range for length " + std::to_string(n));
  }
  Array a({n});
  a[index] = v;
  return a;
}

std::string Array::shape_string() const {
  std::string s = "[";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape_[i]);
  }
  return s + "]";
}

}  // namespace ckt
