#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "req/diffcore/mlp.hpp"

namespace req {

using Rng = std::mt19937_64;

inline constexpr double kMinVariance = 1e-5;
double stddev_floor();

struct GaussianParams {
  std::vector<double> mean;
  std::vector<double> stddev;

  std::size_t dim() const { return mean.size(); }
  bool operator==(const GaussianParams&) const = default;
};

// Diagonal Gaussian conditional policy. The trunk emits 2k values per state:
// the first k are the mean, the last k map to stddev = softplus(z) + floor.
struct GaussianPolicy {
  MlpSpec trunk;
  ParamSet params;
  std::size_t action_dim = 0;

  std::size_t state_dim() const { return trunk.input_dim(); }
};

GaussianPolicy make_gaussian_policy(std::size_t state_dim, std::size_t action_dim,
                                    const std::vector<std::size_t>& hidden, bool layer_norm_first,
                                    std::uint64_t seed, double final_layer_scale = 1.0);

double softplus(double x);
double sigmoid(double x);

// Maps one row of raw trunk output (2k values) to distribution parameters.
GaussianParams head_to_params(std::span<const double> raw, std::size_t action_dim);

GaussianParams policy_distribution(const GaussianPolicy& policy, std::span<const double> state);
// Batched: states is [batch, state_dim]. `raw_out` optionally receives the
// trunk output for use in gradient computations.
std::vector<GaussianParams> policy_distribution(const GaussianPolicy& policy, const NumArray& states,
                                                NumArray* raw_out = nullptr);

double log_prob(const GaussianParams& dist, std::span<const double> action);

// Partial derivatives of log_prob w.r.t. mean and stddev.
struct LogProbGrad {
  std::vector<double> d_mean;
  std::vector<double> d_stddev;
};
LogProbGrad log_prob_grad(const GaussianParams& dist, std::span<const double> action);

// Chains (d/dmean, d/dstddev) through the head parameterization into a row of
// upstream gradient for the trunk output.
void head_backward(std::span<const double> raw, std::span<const double> d_mean,
                   std::span<const double> d_stddev, std::span<double> d_raw);

// n samples as an [n, k] array.
NumArray sample(const GaussianParams& dist, Rng& rng, std::size_t n);

struct DecoupledKl {
  double kl_mean = 0.0;
  double kl_cov = 0.0;
};

// KL(N(new.mean, old.std) || old) and KL(N(old.mean, new.std) || old).
// Their sum is the full diagonal-Gaussian KL(new || old).
DecoupledKl kl_decoupled(const GaussianParams& next, const GaussianParams& prev);
double kl_total(const GaussianParams& next, const GaussianParams& prev);

}  // namespace req
