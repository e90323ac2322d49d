#include "req/diffcore/adam.hpp"

#include <cmath>

namespace req {

void adam_step(ParamSet& params, const ParamSet& grads, double lr, const AdamOptions& opts) {
  if (!(lr > 0.0)) throw ContractError("adam_step: learning rate must be positive");
  for (const auto& [name, g] : grads.params) {
    const NumArray& p = params.at(name);
    if (p.shape != g.shape) {
      throw ContractError("adam_step: gradient shape " + shape_string(g.shape) +
                          " does not match parameter " + name + " " + shape_string(p.shape));
    }
    if (!g.all_finite()) throw ContractError("adam_step: non-finite gradient for " + name);
  }

  params.step += 1;
  const double t = static_cast<double>(params.step);
  const double c1 = 1.0 - std::pow(opts.beta1, t);
  const double c2 = 1.0 - std::pow(opts.beta2, t);

  for (const auto& [name, g] : grads.params) {
    NumArray& p = params.at(name);
    auto m_it = params.first_moment.try_emplace(name, NumArray::zeros(p.shape)).first;
    auto v_it = params.second_moment.try_emplace(name, NumArray::zeros(p.shape)).first;
    NumArray& m = m_it->second;
    NumArray& v = v_it->second;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = opts.beta1 * m[i] + (1.0 - opts.beta1) * g[i];
      v[i] = opts.beta2 * v[i] + (1.0 - opts.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p[i] -= lr * m_hat / (std::sqrt(v_hat) + opts.epsilon);
    }
  }
}

}  // namespace req
