#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>

#include "req/diffcore/mlp.hpp"

namespace req::test {

// Max over all parameters of |analytic - fd| / max(|analytic|, |fd|, 1e-6),
// with central differences of `loss` at step h.
inline double max_fd_error(ParamSet& params, const ParamSet& analytic, const std::function<double()>& loss,
                           double h = 1e-5) {
  double worst = 0.0;
  for (auto& [name, arr] : params.params) {
    const NumArray& g = analytic.at(name);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const double saved = arr[i];
      arr[i] = saved + h;
      const double up = loss();
      arr[i] = saved - h;
      const double down = loss();
      arr[i] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double scale = std::max({1e-6, std::abs(g[i]), std::abs(fd)});
      worst = std::max(worst, std::abs(g[i] - fd) / scale);
    }
  }
  return worst;
}

inline NumArray random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  NumArray a = NumArray::matrix(rows, cols);
  for (auto& v : a.values) v = n(rng);
  return a;
}

}  // namespace req::test
