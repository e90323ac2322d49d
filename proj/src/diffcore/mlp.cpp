#include "req/diffcore/mlp.hpp"

#include <cmath>
#include <random>

#include "req/diffcore/kernels.hpp"

namespace req {

void MlpSpec::validate() const {
  if (widths.size() < 3) {
    throw ContractError("MlpSpec: need input, at least one hidden layer and output widths");
  }
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (widths[i] == 0) throw ContractError("MlpSpec: width " + std::to_string(i) + " is zero");
  }
}

NumArray& ParamSet::at(const std::string& name) {
  auto it = params.find(name);
  if (it == params.end()) throw ContractError("ParamSet: no parameter named " + name);
  return it->second;
}

const NumArray& ParamSet::at(const std::string& name) const {
  auto it = params.find(name);
  if (it == params.end()) throw ContractError("ParamSet: no parameter named " + name);
  return it->second;
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  for (const auto& [name, arr] : params) out.params.emplace(name, NumArray::zeros(arr.shape));
  return out;
}

std::size_t ParamSet::num_values() const {
  std::size_t n = 0;
  for (const auto& [name, arr] : params) n += arr.size();
  return n;
}

std::string weight_name(std::size_t layer) { return "layer" + std::to_string(layer) + ".weight"; }
std::string bias_name(std::size_t layer) { return "layer" + std::to_string(layer) + ".bias"; }

ParamSet init_params(const MlpSpec& spec, std::uint64_t seed, double final_layer_scale) {
  spec.validate();
  std::mt19937_64 rng(seed);
  ParamSet ps;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const std::size_t in = spec.widths[l];
    const std::size_t out = spec.widths[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    NumArray w = NumArray::matrix(out, in);
    const double scale = (l + 1 == spec.num_layers()) ? final_layer_scale : 1.0;
    for (double& v : w.values) v = scale * dist(rng);
    ps.params.emplace(weight_name(l), std::move(w));
    ps.params.emplace(bias_name(l), NumArray::zeros({out}));
  }
  if (spec.layer_norm_first) {
    const std::size_t h = spec.widths[1];
    ps.params.emplace(kNormScale, NumArray::vector(std::vector<double>(h, 1.0)));
    ps.params.emplace(kNormShift, NumArray::zeros({h}));
  }
  return ps;
}

double elu(double x) { return x > 0.0 ? x : std::expm1(x); }

namespace {

std::vector<double> transpose(const std::vector<double>& a, std::size_t rows, std::size_t cols) {
  std::vector<double> t(a.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) t[c * rows + r] = a[r * cols + c];
  }
  return t;
}

double elu_grad(double x) { return x > 0.0 ? 1.0 : std::exp(x); }

// Normalizes one row in place; returns (inv_std, floored).
std::pair<double, bool> normalize_row(std::span<double> row) {
  const double n = static_cast<double>(row.size());
  double mean = 0.0;
  for (double v : row) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : row) var += (v - mean) * (v - mean);
  var /= n;
  const bool floored = var < kLayerNormEpsilon;
  const double inv_std = 1.0 / std::sqrt(floored ? kLayerNormEpsilon : var);
  for (double& v : row) v = (v - mean) * inv_std;
  return {inv_std, floored};
}

NumArray as_batch(const NumArray& input, std::size_t expected_cols) {
  if (input.rank() == 0 || input.cols() != expected_cols) {
    throw ContractError("mlp: input last dimension " + std::to_string(input.cols()) +
                        " does not match first layer width " + std::to_string(expected_cols));
  }
  return NumArray::matrix(input.rows(), input.cols(), input.values);
}

}  // namespace

NumArray layer_norm(const NumArray& input) {
  if (input.cols() < 2) throw ContractError("layer_norm: last dimension must be >= 2");
  NumArray out = input;
  for (std::size_t r = 0; r < out.rows(); ++r) normalize_row(out.row(r));
  return out;
}

MlpCache forward_cached(const MlpSpec& spec, const ParamSet& params, const NumArray& input) {
  spec.validate();
  MlpCache cache;
  NumArray x = as_batch(input, spec.input_dim());
  const std::size_t batch = x.rows();
  cache.batch = batch;
  const auto& k = kernels::active();

  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const NumArray& w = params.at(weight_name(l));
    const NumArray& b = params.at(bias_name(l));
    const std::size_t in = spec.widths[l];
    const std::size_t out = spec.widths[l + 1];
    if (w.shape != std::vector<std::size_t>{out, in} || b.size() != out) {
      throw ContractError("mlp: parameter shape mismatch at layer " + std::to_string(l));
    }
    NumArray z = NumArray::matrix(batch, out);
    const std::vector<double> wt = transpose(w.values, out, in);
    k.gemm(x.values.data(), wt.data(), b.values.data(), z.values.data(), batch, in, out);
    cache.layer_inputs.push_back(std::move(x));
    const bool last = (l + 1 == spec.num_layers());
    if (last) {
      cache.pre_activations.push_back(z);
      cache.output = std::move(z);
      break;
    }
    NumArray h = z;
    if (l == 0 && spec.layer_norm_first) {
      const NumArray& scale = params.at(kNormScale);
      const NumArray& shift = params.at(kNormShift);
      cache.inv_std.resize(batch);
      cache.variance_floored.resize(batch);
      for (std::size_t r = 0; r < batch; ++r) {
        auto [inv_std, floored] = normalize_row(h.row(r));
        cache.inv_std[r] = inv_std;
        cache.variance_floored[r] = floored;
      }
      cache.normalized = h;
      for (std::size_t r = 0; r < batch; ++r) {
        auto row = h.row(r);
        for (std::size_t c = 0; c < out; ++c) row[c] = scale[c] * row[c] + shift[c];
      }
    }
    // pre_activations holds the activation's argument.
    cache.pre_activations.push_back(h);
    k.elu(h.values.data(), h.size());
    x = std::move(h);
  }
  if (input.rank() == 1) cache.output.shape = {spec.output_dim()};
  return cache;
}

NumArray forward(const MlpSpec& spec, const ParamSet& params, const NumArray& input) {
  spec.validate();
  if (input.rank() == 0 || input.cols() != spec.input_dim()) {
    throw ContractError("mlp: input last dimension " + std::to_string(input.cols()) +
                        " does not match first layer width " + std::to_string(spec.input_dim()));
  }
  const std::size_t batch = input.rows();
  const auto& k = kernels::active();
  NumArray x;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const NumArray& w = params.at(weight_name(l));
    const NumArray& b = params.at(bias_name(l));
    const std::size_t in = spec.widths[l];
    const std::size_t out = spec.widths[l + 1];
    if (w.shape != std::vector<std::size_t>{out, in} || b.size() != out) {
      throw ContractError("mlp: parameter shape mismatch at layer " + std::to_string(l));
    }
    NumArray z = NumArray::matrix(batch, out);
    const std::vector<double> wt = transpose(w.values, out, in);
    const double* src = l == 0 ? input.values.data() : x.values.data();
    k.gemm(src, wt.data(), b.values.data(), z.values.data(), batch, in, out);
    if (l + 1 < spec.num_layers()) {
      if (l == 0 && spec.layer_norm_first) {
        const NumArray& scale = params.at(kNormScale);
        const NumArray& shift = params.at(kNormShift);
        for (std::size_t r = 0; r < batch; ++r) {
          auto row = z.row(r);
          normalize_row(row);
          for (std::size_t c = 0; c < out; ++c) row[c] = scale[c] * row[c] + shift[c];
        }
      }
      k.elu(z.values.data(), z.size());
    }
    x = std::move(z);
  }
  if (input.rank() == 1) x.shape = {spec.output_dim()};
  return x;
}

ParamSet backward(const MlpSpec& spec, const ParamSet& params, const NumArray& input,
                  const NumArray& upstream_grad) {
  return backward(spec, params, forward_cached(spec, params, input), upstream_grad);
}

ParamSet backward(const MlpSpec& spec, const ParamSet& params, const MlpCache& cache,
                  const NumArray& upstream_grad) {
  const std::size_t batch = cache.batch;
  if (upstream_grad.size() != batch * spec.output_dim()) {
    throw ContractError("mlp backward: upstream gradient shape " +
                        shape_string(upstream_grad.shape) + " does not match output shape " +
                        shape_string(cache.output.shape));
  }
  if (!upstream_grad.all_finite()) throw ContractError("mlp backward: non-finite upstream gradient");

  const auto& k = kernels::active();
  ParamSet grads = params.zeros_like();
  NumArray delta = NumArray::matrix(batch, spec.output_dim(), upstream_grad.values);

  for (std::size_t l = spec.num_layers(); l-- > 0;) {
    const std::size_t in = spec.widths[l];
    const std::size_t out = spec.widths[l + 1];
    const NumArray& w = params.at(weight_name(l));
    NumArray& gw = grads.at(weight_name(l));
    NumArray& gb = grads.at(bias_name(l));
    const NumArray& x = cache.layer_inputs[l];

    const std::vector<double> delta_t = transpose(delta.values, batch, out);
    k.gemm(delta_t.data(), x.values.data(), nullptr, gw.values.data(), out, batch, in);
    for (std::size_t o = 0; o < out; ++o) gb[o] = k.sum(delta_t.data() + o * batch, batch);
    if (l == 0) break;

    // Gradient w.r.t. this layer's input, then through the previous activation.
    NumArray dx = NumArray::matrix(batch, in);
    k.gemm(delta.values.data(), w.values.data(), nullptr, dx.values.data(), batch, out, in);
    const NumArray& pre = cache.pre_activations[l - 1];
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= elu_grad(pre[i]);

    if (l - 1 == 0 && spec.layer_norm_first) {
      const NumArray& scale = params.at(kNormScale);
      NumArray& gscale = grads.at(kNormScale);
      NumArray& gshift = grads.at(kNormShift);
      const std::size_t h = in;
      for (std::size_t r = 0; r < batch; ++r) {
        auto dxr = dx.row(r);
        const auto xhat = cache.normalized.row(r);
        double mean_g = 0.0, mean_gx = 0.0;
        for (std::size_t c = 0; c < h; ++c) {
          gscale[c] += dxr[c] * xhat[c];
          gshift[c] += dxr[c];
          dxr[c] *= scale[c];  // now d/dxhat
          mean_g += dxr[c];
          mean_gx += dxr[c] * xhat[c];
        }
        mean_g /= static_cast<double>(h);
        mean_gx /= static_cast<double>(h);
        const double inv_std = cache.inv_std[r];
        for (std::size_t c = 0; c < h; ++c) {
          const double centered = dxr[c] - mean_g;
          dxr[c] = cache.variance_floored[r] ? inv_std * centered
                                             : inv_std * (centered - xhat[c] * mean_gx);
        }
      }
    }
    delta = std::move(dx);
  }
  return grads;
}

void accumulate(ParamSet& dst, const ParamSet& src, double scale) {
  for (const auto& [name, arr] : src.params) {
    NumArray& d = dst.at(name);
    if (d.size() != arr.size()) throw ContractError("accumulate: shape mismatch for " + name);
    kernels::axpy(scale, arr.values, d.values);
  }
}

}  // namespace req
