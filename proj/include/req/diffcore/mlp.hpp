#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "req/diffcore/num_array.hpp"

namespace req {

enum class Activation { Elu };

// Fully connected network: widths = {input, hidden..., output}. Hidden layers
// use `activation`; the output layer is affine. With `layer_norm_first` the
// first affine layer is followed by a learned-scale layer norm before its
// activation.
struct MlpSpec {
  std::vector<std::size_t> widths;
  Activation activation = Activation::Elu;
  bool layer_norm_first = true;

  std::size_t input_dim() const { return widths.front(); }
  std::size_t output_dim() const { return widths.back(); }
  std::size_t num_layers() const { return widths.size() - 1; }

  // Throws ContractError unless there is at least one hidden layer and all
  // widths are positive.
  void validate() const;
};

// Named parameter arrays plus Adam state. Also used to carry gradients, in
// which case the moment maps stay empty.
struct ParamSet {
  std::map<std::string, NumArray> params;
  std::int64_t step = 0;
  std::map<std::string, NumArray> first_moment;
  std::map<std::string, NumArray> second_moment;

  NumArray& at(const std::string& name);
  const NumArray& at(const std::string& name) const;

  // Same names/shapes, all values zero, no optimizer state.
  ParamSet zeros_like() const;
  std::size_t num_values() const;
};

std::string weight_name(std::size_t layer);
std::string bias_name(std::size_t layer);
inline constexpr const char* kNormScale = "norm.scale";
inline constexpr const char* kNormShift = "norm.shift";

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases, unit
// layer-norm scale. The final layer's weights are multiplied by
// `final_layer_scale`.
ParamSet init_params(const MlpSpec& spec, std::uint64_t seed, double final_layer_scale = 1.0);

double elu(double x);

// Rowwise normalization to zero mean and unit (population) variance. Rows
// whose variance falls below kLayerNormEpsilon are divided by
// sqrt(kLayerNormEpsilon) instead.
inline constexpr double kLayerNormEpsilon = 1e-6;
NumArray layer_norm(const NumArray& input);

// Activations kept from a forward pass for reuse by backward.
struct MlpCache {
  std::size_t batch = 0;
  std::vector<NumArray> layer_inputs;  // input to each affine layer
  std::vector<NumArray> pre_activations;  // affine outputs (pre-norm for layer 0)
  NumArray normalized;  // xhat of the first layer when normalized
  std::vector<double> inv_std;  // per row
  std::vector<bool> variance_floored;
  NumArray output;
};

// Batched forward: input is [batch, input_dim] or a single [input_dim] row.
NumArray forward(const MlpSpec& spec, const ParamSet& params, const NumArray& input);
MlpCache forward_cached(const MlpSpec& spec, const ParamSet& params, const NumArray& input);

// Parameter gradients of sum_rows <upstream_grad[row], output[row]>.
ParamSet backward(const MlpSpec& spec, const ParamSet& params, const NumArray& input,
                  const NumArray& upstream_grad);
ParamSet backward(const MlpSpec& spec, const ParamSet& params, const MlpCache& cache,
                  const NumArray& upstream_grad);

// Accumulates `scale * src` into `dst` parameter by parameter.
void accumulate(ParamSet& dst, const ParamSet& src, double scale = 1.0);

}  // namespace req
