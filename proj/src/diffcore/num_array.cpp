#include "req/diffcore/num_array.hpp"

#include <cmath>
#include <numeric>

namespace req {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

NumArray::NumArray(std::vector<std::size_t> shape_, std::vector<double> values_)
    : shape(std::move(shape_)), values(std::move(values_)) {
  if (shape_product(shape) != values.size()) {
    throw ContractError("NumArray: shape " + shape_string(shape) + " does not match " +
                        std::to_string(values.size()) + " values");
  }
}

NumArray NumArray::zeros(std::vector<std::size_t> shape_) {
  const std::size_t n = shape_product(shape_);
  return NumArray(std::move(shape_), std::vector<double>(n, 0.0));
}

NumArray NumArray::vector(std::vector<double> values_) {
  const std::size_t n = values_.size();
  return NumArray({n}, std::move(values_));
}

NumArray NumArray::matrix(std::size_t rows, std::size_t cols, std::vector<double> values_) {
  if (values_.empty()) values_.assign(rows * cols, 0.0);
  return NumArray({rows, cols}, std::move(values_));
}

std::size_t NumArray::rows() const {
  if (shape.empty()) return 0;
  std::size_t r = 1;
  for (std::size_t i = 0; i + 1 < shape.size(); ++i) r *= shape[i];
  return r;
}

bool NumArray::all_finite() const {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace req
