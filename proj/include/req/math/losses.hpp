#pragma once

#include <optional>
#include <span>
#include <vector>

#include "req/math/dual.hpp"
#include "req/math/q_function.hpp"
#include "req/policy/gaussian.hpp"

namespace req {

// Policy evaluation operator for the bootstrap value.
enum class EvalOperator {
  Req,  // importance-weighted value of the KL-constrained policy
  Td0,  // plain expectation under the prior (uniform weights)
};

struct TransitionBatch {
  NumArray obs;       // [B, state_dim]
  NumArray actions;   // [B, action_dim]
  NumArray next_obs;  // [B, state_dim]
  std::vector<double> rewards;
  std::vector<bool> terminals;

  std::size_t size() const { return rewards.size(); }
};

// Per-state evaluation of the implicit policy from M prior samples.
struct ImplicitEval {
  NumArray actions;  // [B * M, action_dim], grouped by state
  NumArray q;        // [B, M]
  std::vector<DualSolveResult> duals;
  std::vector<AdvantageWeights> weights;

  std::vector<double> values() const;
  double mean_eta() const;
  double mean_sample_kl() const;
};

// Weights and values from precomputed Q samples ([B, M]).
ImplicitEval evaluate_samples(const NumArray& q_samples, const ReqConfig& cfg, EvalOperator op);

// Draws M actions per state from `prior`, scores them with `q`, and solves
// the temperatures.
ImplicitEval evaluate_implicit_policy(const NumArray& states, const QFunction& q,
                                      const GaussianPolicy& prior, const ReqConfig& cfg,
                                      EvalOperator op, Rng& rng);

std::vector<double> td_targets(const TransitionBatch& batch, std::span<const double> next_values,
                               double gamma);

struct QLossResult {
  double loss = 0.0;
  ParamSet grads;
  std::vector<double> targets;
  std::vector<double> predictions;
};

// Mean squared error between Q(s, a) and fixed targets, with gradients
// w.r.t. q.params only.
QLossResult q_loss_from_targets(const QFunction& q, const NumArray& obs, const NumArray& actions,
                                std::span<const double> targets);

// Full TD loss: targets use q_target on prior_target samples at s'.
// `next_eval` optionally receives the evaluation at s'.
QLossResult q_loss(const TransitionBatch& batch, const QFunction& q, const QFunction& q_target,
                   const GaussianPolicy& prior_target, const ReqConfig& cfg, EvalOperator op,
                   Rng& rng, ImplicitEval* next_eval = nullptr);

struct TrustRegionConfig {
  double epsilon_mean = 0.01;
  double epsilon_cov = 1e-5;
  double multiplier_lr = 0.01;
  bool operator==(const TrustRegionConfig&) const = default;
};

struct TrustRegionState {
  double alpha_mean = 0.0;
  double alpha_cov = 0.0;
};

// alpha <- max(0, alpha + lr * (kl - epsilon)) for each constraint.
TrustRegionState trust_region_update(const TrustRegionState& state, const TrustRegionConfig& cfg,
                                     double kl_mean, double kl_cov);

// How the expert action enters the prior objective.
enum class ExpertTerm {
  SeparateAction,  // 1[A(psi(s))>=0] log pi(psi(s)|s) added as its own term
  SummedIndicator,  // (1[A(a)>=0] + 1[A(psi(s))>=0]) log pi(a|s)
};

struct PriorLossInputs {
  NumArray obs;
  NumArray actions;
  std::vector<double> indicators;
  std::optional<NumArray> expert_actions;
  std::vector<double> expert_indicators;
};

struct PriorLossResult {
  double loss = 0.0;
  double data_loss = 0.0;
  double kl_mean = 0.0;  // batch mean
  double kl_cov = 0.0;
  double accept_rate = 0.0;
  ParamSet grads;
};

// Filtered behavior cloning with decoupled trust-region penalties against
// prior_target. Gradients are w.r.t. prior.params.
PriorLossResult prior_loss(const GaussianPolicy& prior, const GaussianPolicy& prior_target,
                           const PriorLossInputs& inputs, const TrustRegionConfig& tr_cfg,
                           const TrustRegionState& tr_state,
                           ExpertTerm expert_term = ExpertTerm::SeparateAction);

}  // namespace req
