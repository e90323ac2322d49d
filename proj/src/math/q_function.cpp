#include "req/math/q_function.hpp"

#include <algorithm>

namespace req {

QFunction make_q_function(std::size_t state_dim, std::size_t action_dim,
                          const std::vector<std::size_t>& hidden, bool layer_norm_first,
                          std::uint64_t seed) {
  QFunction q;
  q.state_dim = state_dim;
  q.action_dim = action_dim;
  q.net.widths.push_back(state_dim + action_dim);
  q.net.widths.insert(q.net.widths.end(), hidden.begin(), hidden.end());
  q.net.widths.push_back(1);
  q.net.layer_norm_first = layer_norm_first;
  q.params = init_params(q.net, seed);
  return q;
}

NumArray q_inputs(const NumArray& states, const NumArray& actions) {
  const std::size_t n = actions.rows();
  const std::size_t ns = states.rows();
  if (ns == 0 || n % ns != 0) throw ContractError("q_inputs: action rows not a multiple of state rows");
  const std::size_t group = n / ns;
  const std::size_t sd = states.cols(), ad = actions.cols();
  NumArray in = NumArray::matrix(n, sd + ad);
  for (std::size_t r = 0; r < n; ++r) {
    auto dst = in.row(r);
    const auto s = states.row(r / group);
    const auto a = actions.row(r);
    std::copy(s.begin(), s.end(), dst.begin());
    std::copy(a.begin(), a.end(), dst.begin() + static_cast<std::ptrdiff_t>(sd));
  }
  return in;
}

std::vector<double> q_values(const QFunction& q, const NumArray& states, const NumArray& actions) {
  if (states.cols() != q.state_dim || actions.cols() != q.action_dim) {
    throw ContractError("q_values: state/action dimension mismatch");
  }
  return forward(q.net, q.params, q_inputs(states, actions)).values;
}

}  // namespace req
