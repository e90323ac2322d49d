#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "req/envs/env.hpp"
#include "req/experts/intertwine.hpp"
#include "req/learner/learner.hpp"
#include "req/learner/replay.hpp"

namespace req {

struct TrainingSetup {
  std::string env = "point_mass";
  LearnerConfig learner;
  IntertwineConfig intertwine = default_intertwine(Mode::OffPolicy);
  std::string expert = "scripted";
  std::uint64_t seed = 1;
  // Transitions collected before the first learner step.
  std::size_t warmup_steps = 256;
  ActingMode acting = ActingMode::Implicit;
  std::size_t eval_period = 1000;
  std::size_t eval_episodes = 20;
  // Offline mode only.
  std::string dataset;
  // Stop once an evaluation reaches this success rate.
  std::optional<double> stop_at_success;

  void validate() const;
  bool operator==(const TrainingSetup&) const = default;
};

struct MetricsRow {
  std::size_t step = 0;
  double episodic_return = 0.0;
  double success_rate = 0.0;
  double q_loss = 0.0;
  double prior_loss = 0.0;
  double mean_eta = 0.0;
  double mean_kl = 0.0;
  double accept_rate = 0.0;

  bool operator==(const MetricsRow&) const = default;
};

struct EvalStats {
  double mean_return = 0.0;
  double success_rate = 0.0;
};

struct RunArtifacts {
  std::vector<MetricsRow> metrics;
  std::size_t env_steps = 0;  // training interactions only; evaluation excluded
  std::size_t learner_steps = 0;
  std::size_t expert_steps = 0;
  std::unique_ptr<Learner> learner;
  // Online runs only: everything collected, in insertion order.
  std::optional<ReplayBuffer> replay;
};

using PolicyFn = std::function<std::vector<double>(std::span<const double>)>;

// Runs n episodes; `policy` is called on each observation. Episode starts
// depend only on `seed`. `on_reset` is called before each episode.
EvalStats evaluate_policy(Env& env, const PolicyFn& policy, std::size_t n_episodes, std::uint64_t seed,
                          const std::function<void()>& on_reset = {});

// Prior-mean evaluation of a learner.
EvalStats evaluate_learner(const Learner& learner, Env& env, std::size_t n_episodes, std::uint64_t seed);

// Called after each evaluation row is appended.
using MetricsCallback = std::function<void(const MetricsRow&)>;

// Interleaves one environment step with one learner step (after warmup).
// Offline mode never touches the training environment; `dataset` must be
// non-empty. Throws std::invalid_argument on mode/input mismatch.
RunArtifacts run_training(const TrainingSetup& setup, const ReplayBuffer* dataset = nullptr,
                          const MetricsCallback& on_row = {});

// First logged step whose success rate reaches `threshold`.
std::optional<std::size_t> steps_to_threshold(const std::vector<MetricsRow>& rows, double threshold);

// Rolls out `expert` ("scripted", "tight" or "random") for n episodes. A
// `random_fraction` of the episodes, spread evenly, use uniform random
// actions instead and are tagged as policy data.
ReplayBuffer generate_dataset(const std::string& env_name, const std::string& expert,
                              std::size_t episodes, std::uint64_t seed, double random_fraction = 0.0);

}  // namespace req
