#pragma once

#include "req/diffcore/mlp.hpp"

namespace req {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// One bias-corrected Adam update in place. Moments are created on first use.
// Throws ContractError on shape mismatch or non-finite gradients.
void adam_step(ParamSet& params, const ParamSet& grads, double lr, const AdamOptions& opts = {});

}  // namespace req
