#pragma once

#include <cstdint>
#include <vector>

#include "req/diffcore/mlp.hpp"

namespace req {

// Q(s, a) approximator over the concatenated [state, action] input.
struct QFunction {
  MlpSpec net;
  ParamSet params;
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
};

QFunction make_q_function(std::size_t state_dim, std::size_t action_dim,
                          const std::vector<std::size_t>& hidden, bool layer_norm_first,
                          std::uint64_t seed);

// Rows of [state, action]. `states` has one row per action row, or one row
// per group of `actions.rows() / states.rows()` consecutive action rows.
NumArray q_inputs(const NumArray& states, const NumArray& actions);

std::vector<double> q_values(const QFunction& q, const NumArray& states, const NumArray& actions);

}  // namespace req
