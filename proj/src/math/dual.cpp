#include "req/math/dual.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace req {

void ReqConfig::validate() const {
  if (!(epsilon >= 0.0)) throw ContractError("ReqConfig: epsilon must be >= 0");
  if (n_action_samples < 2) throw ContractError("ReqConfig: n_action_samples must be >= 2");
  if (!(eta_min > 0.0) || !(eta_max > eta_min)) {
    throw ContractError("ReqConfig: need 0 < eta_min < eta_max");
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ContractError("ReqConfig: gamma must be in [0, 1)");
}

namespace {

double max_of(std::span<const double> q) { return *std::max_element(q.begin(), q.end()); }

double stddev_of(std::span<const double> q) {
  const double n = static_cast<double>(q.size());
  const double mean = std::accumulate(q.begin(), q.end(), 0.0) / n;
  double var = 0.0;
  for (double v : q) var += (v - mean) * (v - mean);
  return std::sqrt(var / n);
}

std::size_t count_max(std::span<const double> q) {
  const double m = max_of(q);
  return static_cast<std::size_t>(std::count(q.begin(), q.end(), m));
}

// Quantities needed for one curvature-scaled step, evaluated at eta.
struct DualTerms {
  double kl = 0.0;
  double weighted_var = 0.0;  // Var_w(q)
};

DualTerms dual_terms(std::span<const double> q, double eta) {
  const double m = max_of(q);
  std::vector<double> w(q.size());
  double z = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    w[j] = std::exp((q[j] - m) / eta);
    z += w[j];
  }
  double mean = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    w[j] /= z;
    mean += w[j] * q[j];
  }
  DualTerms t;
  for (std::size_t j = 0; j < q.size(); ++j) t.weighted_var += w[j] * (q[j] - mean) * (q[j] - mean);
  t.kl = sample_kl(w);
  return t;
}

// Dual descent in u = log(eta). The step is the eta-scaled gradient
// dg/du = eta * (epsilon - KL) divided by the local curvature
// d2g/du2 = eta * (epsilon - KL) + Var_w(q) / eta, clipped to |du| <= 2.
template <class Terms>
double descend(double eta, std::size_t steps, double eta_min, double eta_max,
               Terms&& terms) {
  double u = std::log(std::clamp(eta, eta_min, eta_max));
  const double u_min = std::log(eta_min), u_max = std::log(eta_max);
  for (std::size_t s = 0; s < steps; ++s) {
    const double e = std::exp(u);
    const auto [grad, curv] = terms(e);
    const double du = -grad / std::max(curv, 1e-300);
    u = std::clamp(u + std::clamp(du, -2.0, 2.0), u_min, u_max);
  }
  return std::exp(u);
}

}  // namespace

double dual_value(std::span<const double> q, double eta, double epsilon) {
  const double m = max_of(q);
  double s = 0.0;
  for (double v : q) s += std::exp((v - m) / eta);
  return eta * epsilon + m + eta * std::log(s / static_cast<double>(q.size()));
}

AdvantageWeights softmax_weights(std::span<const double> q, double eta, double eta_min,
                                 double eta_max) {
  if (!(eta > 0.0)) throw ContractError("softmax_weights: eta must be positive");
  const std::size_t n = q.size();
  AdvantageWeights out;
  out.weights.assign(n, 0.0);
  if (eta >= eta_max) {
    const double u = 1.0 / static_cast<double>(n);
    std::fill(out.weights.begin(), out.weights.end(), u);
  } else if (eta <= eta_min) {
    const double m = max_of(q);
    const double u = 1.0 / static_cast<double>(count_max(q));
    for (std::size_t j = 0; j < n; ++j) out.weights[j] = (q[j] == m) ? u : 0.0;
  } else {
    const double m = max_of(q);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      out.weights[j] = std::exp((q[j] - m) / eta);
      z += out.weights[j];
    }
    for (double& w : out.weights) w /= z;
  }
  for (std::size_t j = 0; j < n; ++j) out.value += out.weights[j] * q[j];
  return out;
}

double sample_kl(std::span<const double> weights) {
  const double m = static_cast<double>(weights.size());
  double kl = 0.0;
  for (double w : weights) {
    if (w > 0.0) kl += w * std::log(m * w);
  }
  return std::max(kl, 0.0);
}

double sample_kl(std::span<const double> q, double eta, double eta_min, double eta_max) {
  return sample_kl(softmax_weights(q, eta, eta_min, eta_max).weights);
}

DualSolveResult solve_temperature(std::span<const double> q, const ReqConfig& cfg,
                                  std::optional<double> eta0) {
  cfg.validate();
  if (q.size() < 2) throw ContractError("solve_temperature: need at least 2 samples");
  const double sd = stddev_of(q);
  if (sd == 0.0) return {std::sqrt(cfg.eta_min * cfg.eta_max), 0.0, false};

  // Greedy weights already within budget: the constraint is slack.
  const double greedy_kl = std::log(static_cast<double>(q.size()) / static_cast<double>(count_max(q)));
  if (greedy_kl <= cfg.epsilon) return {cfg.eta_min, greedy_kl, false};

  // KL must be exactly zero: only the uniform (infinite-temperature) weights qualify.
  if (cfg.epsilon == 0.0) return {cfg.eta_max, 0.0, true};

  const double eta = descend(eta0.value_or(sd), cfg.dual_steps, cfg.eta_min,
                             cfg.eta_max, [&](double e) {
                               const DualTerms t = dual_terms(q, e);
                               const double grad = e * (cfg.epsilon - t.kl);
                               return std::pair{grad, grad + t.weighted_var / e};
                             });
  return {eta, sample_kl(q, eta, cfg.eta_min, cfg.eta_max), true};
}

std::vector<DualSolveResult> solve_temperatures(const NumArray& q, const ReqConfig& cfg) {
  cfg.validate();
  const std::size_t batch = q.rows();
  std::vector<DualSolveResult> out(batch);

  std::optional<double> shared_init;
  if (cfg.eta_init == EtaInit::BatchMean) {
    double acc = 0.0;
    for (std::size_t b = 0; b < batch; ++b) acc += stddev_of(q.row(b));
    shared_init = acc / static_cast<double>(batch);
    if (!(*shared_init > 0.0)) shared_init.reset();
  }

  if (cfg.scope == ConstraintScope::PerState) {
    for (std::size_t b = 0; b < batch; ++b) out[b] = solve_temperature(q.row(b), cfg, shared_init);
    return out;
  }

  // One temperature for the batch: descend the batch-mean dual.
  if (cfg.epsilon == 0.0) {
    for (auto& r : out) r = {cfg.eta_max, 0.0, true};
    return out;
  }
  double init = shared_init.value_or(0.0);
  if (!shared_init) {
    for (std::size_t b = 0; b < batch; ++b) init += stddev_of(q.row(b));
    init /= static_cast<double>(batch);
  }
  if (!(init > 0.0)) {
    for (auto& r : out) r = {std::sqrt(cfg.eta_min * cfg.eta_max), 0.0, false};
    return out;
  }
  const double eta = descend(init, cfg.dual_steps, cfg.eta_min, cfg.eta_max,
                             [&](double e) {
                               double grad = 0.0, var = 0.0;
                               for (std::size_t b = 0; b < batch; ++b) {
                                 const DualTerms t = dual_terms(q.row(b), e);
                                 grad += e * (cfg.epsilon - t.kl);
                                 var += t.weighted_var;
                               }
                               grad /= static_cast<double>(batch);
                               var /= static_cast<double>(batch);
                               return std::pair{grad, grad + var / e};
                             });
  // Descending to eta_min means the greedy weights fit the averaged budget.
  const bool active = eta > cfg.eta_min;
  for (std::size_t b = 0; b < batch; ++b) {
    out[b] = {eta, sample_kl(q.row(b), eta, cfg.eta_min, cfg.eta_max), active};
  }
  return out;
}

double td_target(double reward, bool terminal, double gamma, double next_value) {
  return reward + (terminal ? 0.0 : gamma * next_value);
}

int advantage_indicator(double q_at_action, double value) { return (q_at_action - value >= 0.0) ? 1 : 0; }

}  // namespace req
