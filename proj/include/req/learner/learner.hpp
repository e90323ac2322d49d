#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "req/experts/intertwine.hpp"
#include "req/learner/replay.hpp"
#include "req/math/losses.hpp"

namespace req {

enum class Mode { OffPolicy, Offline, Rlfd, Rlfse };

std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);
std::string to_string(EvalOperator op);
EvalOperator operator_from_string(const std::string& s);

// Intertwining defaults per regime: RLfD 0.25 / 0.0, RLfSE 0.75 / 0.5,
// expert unused otherwise.
IntertwineConfig default_intertwine(Mode m);

struct LearnerConfig {
  Mode mode = Mode::OffPolicy;
  EvalOperator op = EvalOperator::Req;
  std::size_t target_update_period = 20;
  std::size_t batch_size = 64;
  std::size_t unroll_length = 2;
  std::size_t total_steps = 10000;
  std::size_t replay_capacity = 1000000;
  double q_learning_rate = 3e-4;
  double prior_learning_rate = 3e-4;
  std::vector<std::size_t> hidden{64, 64, 64};
  bool layer_norm_first = true;
  ReqConfig req;
  TrustRegionConfig trust_region;
  ExpertTerm expert_term = ExpertTerm::SeparateAction;
  // Prior-only behavior cloning: indicators forced to 1, no Q update.
  bool behavior_cloning = false;

  // Expert-action term in the prior objective (RLfSE only).
  bool uses_expert_term() const { return mode == Mode::Rlfse; }
  void validate() const;
  bool operator==(const LearnerConfig&) const = default;
};

struct LearnerMetrics {
  double q_loss = 0.0;
  double prior_loss = 0.0;
  double mean_eta = 0.0;
  double mean_kl = 0.0;
  double accept_rate = 0.0;
  double expert_accept_rate = 0.0;
  double kl_mean = 0.0;
  double kl_cov = 0.0;
  bool synced = false;
};

// Gradients of one REQ update, before they are applied.
struct UpdateGrads {
  ParamSet q;
  ParamSet prior;
  LearnerMetrics metrics;
};

enum class ActingMode {
  Implicit,     // M prior samples reweighted by exp(Q / eta), one drawn
  PriorSample,  // a single prior sample
  PriorMean,    // deterministic prior mean
};

std::string to_string(ActingMode m);
ActingMode acting_mode_from_string(const std::string& s);

TransitionBatch make_batch(const std::vector<const Transition*>& transitions);

// Owns the online and target networks, the trust-region multipliers and the
// learner RNG.
class Learner {
 public:
  Learner(std::size_t obs_dim, std::size_t action_dim, LearnerConfig cfg, std::uint64_t seed);

  // One step: sample a batch, update Q and the prior, maybe sync targets.
  LearnerMetrics step(const ReplayBuffer& buffer);

  // Same update on a caller-provided batch.
  LearnerMetrics update(const std::vector<const Transition*>& batch);
  UpdateGrads compute_gradients(const std::vector<const Transition*>& batch);
  void apply(const UpdateGrads& grads);

  // Hard copy of online to target networks when steps() is a positive
  // multiple of the target period.
  bool sync_targets();

  std::vector<double> act(std::span<const double> obs, ActingMode mode, std::mt19937_64& rng) const;

  const LearnerConfig& config() const { return cfg_; }
  const QFunction& q() const { return q_; }
  const QFunction& q_target() const { return q_target_; }
  const GaussianPolicy& prior() const { return prior_; }
  const GaussianPolicy& prior_target() const { return prior_target_; }
  QFunction& q() { return q_; }
  GaussianPolicy& prior() { return prior_; }
  QFunction& q_target() { return q_target_; }
  GaussianPolicy& prior_target() { return prior_target_; }
  const TrustRegionState& trust_region() const { return tr_state_; }
  std::size_t steps() const { return steps_; }
  std::size_t sync_count() const { return syncs_; }
  void reseed(std::uint64_t seed) { rng_.seed(seed); }

 private:
  LearnerConfig cfg_;
  QFunction q_, q_target_;
  GaussianPolicy prior_, prior_target_;
  TrustRegionState tr_state_;
  std::mt19937_64 rng_;
  std::size_t steps_ = 0;
  std::size_t syncs_ = 0;
};

}  // namespace req
