#include "req/policy/gaussian.hpp"

#include <cmath>
#include <numbers>

namespace req {

double stddev_floor() { return std::sqrt(kMinVariance); }

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

GaussianPolicy make_gaussian_policy(std::size_t state_dim, std::size_t action_dim,
                                    const std::vector<std::size_t>& hidden, bool layer_norm_first,
                                    std::uint64_t seed, double final_layer_scale) {
  GaussianPolicy p;
  p.action_dim = action_dim;
  p.trunk.widths.push_back(state_dim);
  p.trunk.widths.insert(p.trunk.widths.end(), hidden.begin(), hidden.end());
  p.trunk.widths.push_back(2 * action_dim);
  p.trunk.layer_norm_first = layer_norm_first;
  p.params = init_params(p.trunk, seed, final_layer_scale);
  return p;
}

GaussianParams head_to_params(std::span<const double> raw, std::size_t action_dim) {
  GaussianParams g;
  g.mean.assign(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(action_dim));
  g.stddev.resize(action_dim);
  const double floor = stddev_floor();
  for (std::size_t i = 0; i < action_dim; ++i) g.stddev[i] = softplus(raw[action_dim + i]) + floor;
  return g;
}

std::vector<GaussianParams> policy_distribution(const GaussianPolicy& policy, const NumArray& states,
                                                NumArray* raw_out) {
  if (!states.all_finite()) throw ContractError("policy_distribution: non-finite state");
  NumArray raw = forward(policy.trunk, policy.params, states);
  const std::size_t rows = raw.size() / (2 * policy.action_dim);
  std::vector<GaussianParams> out;
  out.reserve(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    out.push_back(head_to_params({raw.values.data() + r * 2 * policy.action_dim,
                                  2 * policy.action_dim},
                                 policy.action_dim));
  }
  if (raw_out != nullptr) *raw_out = std::move(raw);
  return out;
}

GaussianParams policy_distribution(const GaussianPolicy& policy, std::span<const double> state) {
  return policy_distribution(policy, NumArray::vector({state.begin(), state.end()})).front();
}

double log_prob(const GaussianParams& dist, std::span<const double> action) {
  if (action.size() != dist.dim()) throw ContractError("log_prob: action dimension mismatch");
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  double lp = 0.0;
  for (std::size_t i = 0; i < dist.dim(); ++i) {
    const double z = (action[i] - dist.mean[i]) / dist.stddev[i];
    lp += -0.5 * z * z - std::log(dist.stddev[i]) - half_log_2pi;
  }
  return lp;
}

LogProbGrad log_prob_grad(const GaussianParams& dist, std::span<const double> action) {
  LogProbGrad g;
  g.d_mean.resize(dist.dim());
  g.d_stddev.resize(dist.dim());
  for (std::size_t i = 0; i < dist.dim(); ++i) {
    const double s = dist.stddev[i];
    const double d = action[i] - dist.mean[i];
    g.d_mean[i] = d / (s * s);
    g.d_stddev[i] = -1.0 / s + d * d / (s * s * s);
  }
  return g;
}

void head_backward(std::span<const double> raw, std::span<const double> d_mean,
                   std::span<const double> d_stddev, std::span<double> d_raw) {
  const std::size_t k = d_mean.size();
  for (std::size_t i = 0; i < k; ++i) {
    d_raw[i] += d_mean[i];
    d_raw[k + i] += d_stddev[i] * sigmoid(raw[k + i]);
  }
}

NumArray sample(const GaussianParams& dist, Rng& rng, std::size_t n) {
  if (n == 0) throw ContractError("sample: n must be >= 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  NumArray out = NumArray::matrix(n, dist.dim());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < dist.dim(); ++i) {
      out[r * dist.dim() + i] = dist.mean[i] + dist.stddev[i] * normal(rng);
    }
  }
  return out;
}

DecoupledKl kl_decoupled(const GaussianParams& next, const GaussianParams& prev) {
  if (next.dim() != prev.dim()) throw ContractError("kl_decoupled: dimension mismatch");
  DecoupledKl kl;
  for (std::size_t i = 0; i < next.dim(); ++i) {
    if (!(next.stddev[i] > 0.0) || !(prev.stddev[i] > 0.0)) {
      throw ContractError("kl_decoupled: stddev must be positive");
    }
    const double var_prev = prev.stddev[i] * prev.stddev[i];
    const double dm = next.mean[i] - prev.mean[i];
    kl.kl_mean += dm * dm / (2.0 * var_prev);
    const double ratio = next.stddev[i] * next.stddev[i] / var_prev;
    kl.kl_cov += 0.5 * (ratio - 1.0 - std::log(ratio));
  }
  return kl;
}

double kl_total(const GaussianParams& next, const GaussianParams& prev) {
  double kl = 0.0;
  for (std::size_t i = 0; i < next.dim(); ++i) {
    const double s1 = next.stddev[i], s0 = prev.stddev[i];
    const double dm = next.mean[i] - prev.mean[i];
    kl += std::log(s0 / s1) + (s1 * s1 + dm * dm) / (2.0 * s0 * s0) - 0.5;
  }
  return kl;
}

}  // namespace req
