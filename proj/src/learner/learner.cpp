#include "req/learner/learner.hpp"

#include <stdexcept>

#include "req/diffcore/adam.hpp"

namespace req {

std::string to_string(Mode m) {
  switch (m) {
    case Mode::OffPolicy: return "offpolicy";
    case Mode::Offline: return "offline";
    case Mode::Rlfd: return "rlfd";
    case Mode::Rlfse: return "rlfse";
  }
  return "?";
}

Mode mode_from_string(const std::string& s) {
  if (s == "offpolicy") return Mode::OffPolicy;
  if (s == "offline") return Mode::Offline;
  if (s == "rlfd") return Mode::Rlfd;
  if (s == "rlfse") return Mode::Rlfse;
  throw std::invalid_argument("unknown mode '" + s + "' (expected offpolicy|offline|rlfd|rlfse)");
}

std::string to_string(EvalOperator op) { return op == EvalOperator::Req ? "req" : "td0"; }

EvalOperator operator_from_string(const std::string& s) {
  if (s == "req") return EvalOperator::Req;
  if (s == "td0") return EvalOperator::Td0;
  throw std::invalid_argument("unknown operator '" + s + "' (expected req|td0)");
}

std::string to_string(ActingMode m) {
  switch (m) {
    case ActingMode::Implicit: return "implicit";
    case ActingMode::PriorSample: return "prior_sample";
    case ActingMode::PriorMean: return "prior_mean";
  }
  return "?";
}

ActingMode acting_mode_from_string(const std::string& s) {
  if (s == "implicit") return ActingMode::Implicit;
  if (s == "prior_sample") return ActingMode::PriorSample;
  if (s == "prior_mean") return ActingMode::PriorMean;
  throw std::invalid_argument("unknown acting mode '" + s + "'");
}

IntertwineConfig default_intertwine(Mode m) {
  switch (m) {
    case Mode::Rlfd: return {0.25, 0.0};
    case Mode::Rlfse: return {0.75, 0.5};
    default: return {0.0, 0.0};
  }
}

void LearnerConfig::validate() const {
  req.validate();
  if (target_update_period < 1) throw ContractError("LearnerConfig: target_update_period must be >= 1");
  if (batch_size < 1) throw ContractError("LearnerConfig: batch_size must be >= 1");
  if (hidden.empty()) throw ContractError("LearnerConfig: need at least one hidden layer");
}

TransitionBatch make_batch(const std::vector<const Transition*>& transitions) {
  if (transitions.empty()) throw ContractError("make_batch: empty batch");
  const std::size_t n = transitions.size();
  const std::size_t sd = transitions.front()->obs.size();
  const std::size_t ad = transitions.front()->action.size();
  TransitionBatch b;
  b.obs = NumArray::matrix(n, sd);
  b.next_obs = NumArray::matrix(n, sd);
  b.actions = NumArray::matrix(n, ad);
  b.rewards.resize(n);
  b.terminals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Transition& t = *transitions[i];
    if (t.obs.size() != sd || t.next_obs.size() != sd || t.action.size() != ad) {
      throw ContractError("make_batch: inconsistent transition dimensions at index " + std::to_string(i));
    }
    std::copy(t.obs.begin(), t.obs.end(), b.obs.row(i).begin());
    std::copy(t.next_obs.begin(), t.next_obs.end(), b.next_obs.row(i).begin());
    std::copy(t.action.begin(), t.action.end(), b.actions.row(i).begin());
    b.rewards[i] = t.reward;
    b.terminals[i] = t.terminal;
  }
  return b;
}

Learner::Learner(std::size_t obs_dim, std::size_t action_dim, LearnerConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)), rng_(seed) {
  cfg_.validate();
  q_ = make_q_function(obs_dim, action_dim, cfg_.hidden, cfg_.layer_norm_first, seed * 2 + 1);
  prior_ = make_gaussian_policy(obs_dim, action_dim, cfg_.hidden, cfg_.layer_norm_first, seed * 2 + 2,
                                /*final_layer_scale=*/0.1);
  q_target_ = q_;
  prior_target_ = prior_;
}

UpdateGrads Learner::compute_gradients(const std::vector<const Transition*>& batch) {
  const TransitionBatch tb = make_batch(batch);
  const std::size_t n = tb.size();
  UpdateGrads out;

  PriorLossInputs inputs;
  inputs.obs = tb.obs;
  inputs.actions = tb.actions;
  inputs.indicators.assign(n, 1.0);

  if (!cfg_.behavior_cloning) {
    ImplicitEval next;
    QLossResult ql = q_loss(tb, q_, q_target_, prior_target_, cfg_.req, cfg_.op, rng_, &next);
    out.q = std::move(ql.grads);
    out.metrics.q_loss = ql.loss;
    out.metrics.mean_eta = next.mean_eta();
    out.metrics.mean_kl = next.mean_sample_kl();

    const ImplicitEval cur = evaluate_implicit_policy(tb.obs, q_target_, prior_target_, cfg_.req, cfg_.op, rng_);
    const auto values = cur.values();
    const auto q_data = q_values(q_target_, tb.obs, tb.actions);
    for (std::size_t i = 0; i < n; ++i) inputs.indicators[i] = advantage_indicator(q_data[i], values[i]);

    if (cfg_.uses_expert_term()) {
      NumArray expert = tb.actions;
      std::vector<bool> has(n, false);
      for (std::size_t i = 0; i < n; ++i) {
        if (batch[i]->expert_action) {
          const auto& ea = *batch[i]->expert_action;
          std::copy(ea.begin(), ea.end(), expert.row(i).begin());
          has[i] = true;
        }
      }
      const auto q_expert = q_values(q_target_, tb.obs, expert);
      inputs.expert_indicators.assign(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        if (has[i]) inputs.expert_indicators[i] = advantage_indicator(q_expert[i], values[i]);
        out.metrics.expert_accept_rate += inputs.expert_indicators[i] / static_cast<double>(n);
      }
      inputs.expert_actions = std::move(expert);
    }
  }

  PriorLossResult pl = prior_loss(prior_, prior_target_, inputs, cfg_.trust_region, tr_state_, cfg_.expert_term);
  out.prior = std::move(pl.grads);
  out.metrics.prior_loss = pl.loss;
  out.metrics.accept_rate = pl.accept_rate;
  out.metrics.kl_mean = pl.kl_mean;
  out.metrics.kl_cov = pl.kl_cov;
  return out;
}

void Learner::apply(const UpdateGrads& grads) {
  if (!cfg_.behavior_cloning) adam_step(q_.params, grads.q, cfg_.q_learning_rate);
  adam_step(prior_.params, grads.prior, cfg_.prior_learning_rate);
  tr_state_ = trust_region_update(tr_state_, cfg_.trust_region, grads.metrics.kl_mean, grads.metrics.kl_cov);
  ++steps_;
}

bool Learner::sync_targets() {
  if (steps_ == 0 || steps_ % cfg_.target_update_period != 0) return false;
  q_target_.params = q_.params;
  prior_target_.params = prior_.params;
  ++syncs_;
  return true;
}

LearnerMetrics Learner::update(const std::vector<const Transition*>& batch) {
  UpdateGrads g = compute_gradients(batch);
  apply(g);
  g.metrics.synced = sync_targets();
  return g.metrics;
}

LearnerMetrics Learner::step(const ReplayBuffer& buffer) {
  if (buffer.empty()) throw std::runtime_error("learner_step: replay buffer is empty");
  return update(buffer.sample(cfg_.batch_size, rng_));
}

std::vector<double> Learner::act(std::span<const double> obs, ActingMode mode, std::mt19937_64& rng) const {
  const GaussianParams dist = policy_distribution(prior_target_, obs);
  if (mode == ActingMode::PriorMean) return dist.mean;
  if (mode == ActingMode::PriorSample) return sample(dist, rng, 1).values;

  const std::size_t m = cfg_.req.n_action_samples;
  const NumArray actions = sample(dist, rng, m);
  const NumArray state = NumArray::matrix(1, obs.size(), {obs.begin(), obs.end()});
  const NumArray qs = NumArray::matrix(1, m, q_values(q_target_, state, actions));
  // The operator only changes policy evaluation; behavior is always the
  // importance-weighted policy.
  const ImplicitEval ev = evaluate_samples(qs, cfg_.req, EvalOperator::Req);
  const auto& w = ev.weights.front().weights;
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  const auto row = actions.row(pick(rng));
  return {row.begin(), row.end()};
}

}  // namespace req
