#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace req {

// Raised when a caller breaks an operation's precondition (shape mismatch,
// non-finite input, out-of-range configuration).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Row-major dense array of doubles. Rank 1 arrays are treated as a single
// row by the batched routines.
struct NumArray {
  std::vector<std::size_t> shape;
  std::vector<double> values;

  NumArray() = default;
  NumArray(std::vector<std::size_t> shape_, std::vector<double> values_);

  static NumArray zeros(std::vector<std::size_t> shape_);
  static NumArray vector(std::vector<double> values_);
  static NumArray matrix(std::size_t rows, std::size_t cols, std::vector<double> values_ = {});

  std::size_t size() const { return values.size(); }
  std::size_t rank() const { return shape.size(); }
  // Last dimension.
  std::size_t cols() const { return shape.empty() ? 0 : shape.back(); }
  // Product of all but the last dimension.
  std::size_t rows() const;

  std::span<double> row(std::size_t i) { return {values.data() + i * cols(), cols()}; }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * cols(), cols()}; }

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  bool all_finite() const;
  bool operator==(const NumArray&) const = default;
};

std::size_t shape_product(const std::vector<std::size_t>& shape);
std::string shape_string(const std::vector<std::size_t>& shape);

}  // namespace req
