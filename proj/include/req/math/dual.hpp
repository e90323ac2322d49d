#pragma once

#include <optional>
#include <span>
#include <vector>

#include "req/diffcore/num_array.hpp"

namespace req {

// How the initial temperature is chosen before the dual descent.
enum class EtaInit {
  PerState,   // stddev of that state's Q samples
  BatchMean,  // mean over the batch of per-state stddevs
};

// Whether each state gets its own temperature or one temperature is shared
// by the batch (constraint on the batch-average dual).
enum class ConstraintScope { PerState, BatchAverage };

struct ReqConfig {
  double epsilon = 0.75;
  std::size_t n_action_samples = 20;
  std::size_t dual_steps = 20;
  double eta_min = 1e-6;
  double eta_max = 1e6;
  double gamma = 0.99;
  EtaInit eta_init = EtaInit::PerState;
  ConstraintScope scope = ConstraintScope::PerState;

  void validate() const;
  bool operator==(const ReqConfig&) const = default;
};

struct DualSolveResult {
  double eta = 1.0;
  double sample_kl = 0.0;
  bool active = false;
};

struct AdvantageWeights {
  std::vector<double> weights;
  double value = 0.0;
};

// g(eta) = eta * epsilon + eta * log(mean_j exp(q_j / eta)).
double dual_value(std::span<const double> q, double eta, double epsilon);

// Self-normalized importance weights softmax(q / eta) and the weighted value.
// eta >= eta_max is the infinite-temperature limit (exactly uniform weights);
// eta <= eta_min is the zero-temperature limit (uniform over the argmax set).
AdvantageWeights softmax_weights(std::span<const double> q, double eta, double eta_min = 1e-6,
                                 double eta_max = 1e6);

// sum_j w_j log(M w_j) for weights w.
double sample_kl(std::span<const double> weights);
double sample_kl(std::span<const double> q, double eta, double eta_min = 1e-6, double eta_max = 1e6);

// Temperature for one state. `eta0` overrides the initial value.
DualSolveResult solve_temperature(std::span<const double> q, const ReqConfig& cfg,
                                  std::optional<double> eta0 = std::nullopt);

// Temperatures for a batch: q is [batch, M]. Honors cfg.eta_init and cfg.scope.
std::vector<DualSolveResult> solve_temperatures(const NumArray& q, const ReqConfig& cfg);

double td_target(double reward, bool terminal, double gamma, double next_value);

// 1 iff q - value >= 0.
int advantage_indicator(double q_at_action, double value);

}  // namespace req
