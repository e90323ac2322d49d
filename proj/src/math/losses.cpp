#include "req/math/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace req {

std::vector<double> ImplicitEval::values() const {
  std::vector<double> v;
  v.reserve(weights.size());
  for (const auto& w : weights) v.push_back(w.value);
  return v;
}

double ImplicitEval::mean_eta() const {
  double acc = 0.0;
  for (const auto& d : duals) acc += d.eta;
  return duals.empty() ? 0.0 : acc / static_cast<double>(duals.size());
}

double ImplicitEval::mean_sample_kl() const {
  double acc = 0.0;
  for (const auto& d : duals) acc += d.sample_kl;
  return duals.empty() ? 0.0 : acc / static_cast<double>(duals.size());
}

ImplicitEval evaluate_samples(const NumArray& q_samples, const ReqConfig& cfg, EvalOperator op) {
  ImplicitEval ev;
  ev.q = q_samples;
  const std::size_t batch = q_samples.rows();
  if (op == EvalOperator::Td0) {
    ev.duals.assign(batch, DualSolveResult{cfg.eta_max, 0.0, false});
  } else {
    ev.duals = solve_temperatures(q_samples, cfg);
  }
  ev.weights.reserve(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    ev.weights.push_back(softmax_weights(q_samples.row(b), ev.duals[b].eta, cfg.eta_min, cfg.eta_max));
  }
  return ev;
}

ImplicitEval evaluate_implicit_policy(const NumArray& states, const QFunction& q,
                                      const GaussianPolicy& prior, const ReqConfig& cfg,
                                      EvalOperator op, Rng& rng) {
  const std::size_t batch = states.rows();
  const std::size_t m = cfg.n_action_samples;
  const std::size_t k = prior.action_dim;
  const auto dists = policy_distribution(prior, states);
  NumArray actions = NumArray::matrix(batch * m, k);
  for (std::size_t b = 0; b < batch; ++b) {
    const NumArray s = sample(dists[b], rng, m);
    std::copy(s.values.begin(), s.values.end(),
              actions.values.begin() + static_cast<std::ptrdiff_t>(b * m * k));
  }
  NumArray qs = NumArray::matrix(batch, m, q_values(q, states, actions));
  ImplicitEval ev = evaluate_samples(qs, cfg, op);
  ev.actions = std::move(actions);
  return ev;
}

std::vector<double> td_targets(const TransitionBatch& batch, std::span<const double> next_values,
                               double gamma) {
  std::vector<double> y(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    y[i] = td_target(batch.rewards[i], batch.terminals[i], gamma, next_values[i]);
  }
  return y;
}

QLossResult q_loss_from_targets(const QFunction& q, const NumArray& obs, const NumArray& actions,
                                std::span<const double> targets) {
  const std::size_t n = targets.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(targets[i])) {
      throw ContractError("q_loss: non-finite target at state index " + std::to_string(i));
    }
  }
  const MlpCache cache = forward_cached(q.net, q.params, q_inputs(obs, actions));
  QLossResult out;
  out.predictions = cache.output.values;
  out.targets.assign(targets.begin(), targets.end());
  NumArray upstream = NumArray::matrix(n, 1);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = out.predictions[i] - targets[i];
    out.loss += d * d * inv_n;
    upstream[i] = 2.0 * d * inv_n;
  }
  out.grads = backward(q.net, q.params, cache, upstream);
  return out;
}

QLossResult q_loss(const TransitionBatch& batch, const QFunction& q, const QFunction& q_target,
                   const GaussianPolicy& prior_target, const ReqConfig& cfg, EvalOperator op,
                   Rng& rng, ImplicitEval* next_eval) {
  if (batch.size() == 0) throw ContractError("q_loss: empty batch");
  ImplicitEval ev = evaluate_implicit_policy(batch.next_obs, q_target, prior_target, cfg, op, rng);
  const auto values = ev.values();
  const auto targets = td_targets(batch, values, cfg.gamma);
  QLossResult out = q_loss_from_targets(q, batch.obs, batch.actions, targets);
  if (next_eval != nullptr) *next_eval = std::move(ev);
  return out;
}

TrustRegionState trust_region_update(const TrustRegionState& state, const TrustRegionConfig& cfg,
                                     double kl_mean, double kl_cov) {
  TrustRegionState next;
  next.alpha_mean = std::max(0.0, state.alpha_mean + cfg.multiplier_lr * (kl_mean - cfg.epsilon_mean));
  next.alpha_cov = std::max(0.0, state.alpha_cov + cfg.multiplier_lr * (kl_cov - cfg.epsilon_cov));
  return next;
}

PriorLossResult prior_loss(const GaussianPolicy& prior, const GaussianPolicy& prior_target,
                           const PriorLossInputs& inputs, const TrustRegionConfig& tr_cfg,
                           const TrustRegionState& tr_state, ExpertTerm expert_term) {
  const std::size_t n = inputs.obs.rows();
  const std::size_t k = prior.action_dim;
  if (inputs.actions.rows() != n || inputs.indicators.size() != n) {
    throw ContractError("prior_loss: batch size mismatch");
  }
  const bool with_expert = inputs.expert_actions.has_value();
  if (with_expert && (inputs.expert_actions->rows() != n || inputs.expert_indicators.size() != n)) {
    throw ContractError("prior_loss: expert batch size mismatch");
  }

  const MlpCache cache = forward_cached(prior.trunk, prior.params, inputs.obs);
  const auto old_dists = policy_distribution(prior_target, inputs.obs);
  const double inv_n = 1.0 / static_cast<double>(n);

  PriorLossResult out;
  NumArray upstream = NumArray::matrix(n, 2 * k);
  std::vector<double> d_mean(k), d_std(k);

  for (std::size_t i = 0; i < n; ++i) {
    const auto raw = cache.output.row(i);
    const GaussianParams dist = head_to_params(raw, k);
    const GaussianParams& old = old_dists[i];
    std::fill(d_mean.begin(), d_mean.end(), 0.0);
    std::fill(d_std.begin(), d_std.end(), 0.0);

    auto add_nll = [&](std::span<const double> action, double weight) {
      if (weight == 0.0) return;
      out.data_loss -= weight * inv_n * log_prob(dist, action);
      const LogProbGrad g = log_prob_grad(dist, action);
      for (std::size_t d = 0; d < k; ++d) {
        d_mean[d] -= weight * inv_n * g.d_mean[d];
        d_std[d] -= weight * inv_n * g.d_stddev[d];
      }
    };

    const double ind = inputs.indicators[i];
    out.accept_rate += ind * inv_n;
    if (with_expert && expert_term == ExpertTerm::SummedIndicator) {
      add_nll(inputs.actions.row(i), ind + inputs.expert_indicators[i]);
    } else {
      add_nll(inputs.actions.row(i), ind);
      if (with_expert) add_nll(inputs.expert_actions->row(i), inputs.expert_indicators[i]);
    }

    const DecoupledKl kl = kl_decoupled(dist, old);
    out.kl_mean += kl.kl_mean * inv_n;
    out.kl_cov += kl.kl_cov * inv_n;
    for (std::size_t d = 0; d < k; ++d) {
      const double var_old = old.stddev[d] * old.stddev[d];
      d_mean[d] += tr_state.alpha_mean * inv_n * (dist.mean[d] - old.mean[d]) / var_old;
      d_std[d] += tr_state.alpha_cov * inv_n * (dist.stddev[d] / var_old - 1.0 / dist.stddev[d]);
    }
    head_backward(raw, d_mean, d_std, upstream.row(i));
  }

  out.loss = out.data_loss + tr_state.alpha_mean * (out.kl_mean - tr_cfg.epsilon_mean) +
             tr_state.alpha_cov * (out.kl_cov - tr_cfg.epsilon_cov);
  out.grads = backward(prior.trunk, prior.params, cache, upstream);
  return out;
}

}  // namespace req
