#pragma once

#include <vector>

#include "req/envs/env.hpp"
#include "req/math/losses.hpp"

namespace req {

// Tabular MDP. transitions[s][a][s'] sums to 1 over s'; rewards[s][a].
struct TabularMdp {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::vector<std::vector<std::vector<double>>> transitions;
  std::vector<std::vector<double>> rewards;
  double gamma = 0.9;

  void validate() const;
};

// n-state chain: action 1 moves right w.p. 0.9 (else stays), action 0 moves
// left. Taking action 1 in the last state pays 1; action 0 in state 0 pays
// 0.1. Any further actions pay 0.
TabularMdp make_chain_mdp(std::size_t n_states = 3, double gamma = 0.9);

using QTable = std::vector<std::vector<double>>;

struct PolicyIterationResult {
  QTable q;
  std::vector<std::size_t> greedy_policy;
  std::size_t iterations = 0;
};

// Q* by value iteration until the sup-norm update is below `tol`, plus the
// greedy policy.
PolicyIterationResult exact_policy_iteration(const TabularMdp& mdp, double tol = 1e-12);

// Q^pi for a stochastic policy pi[s][a] via a direct linear solve.
QTable exact_policy_evaluation(const TabularMdp& mdp, const std::vector<std::vector<double>>& pi);

struct TabularBackupResult {
  QTable q;
  std::size_t iterations = 0;
  bool converged = false;
};

// Iterates Q <- r + gamma * P V, where V(s) is the implicit-policy value of
// Q(s, .) with every action used once as a sample of a uniform prior. Stops
// when the sup-norm update drops below `tol` or after `max_iters`.
TabularBackupResult iterate_req_backup(const TabularMdp& mdp, const ReqConfig& cfg,
                                       EvalOperator op = EvalOperator::Req,
                                       std::size_t max_iters = 1000, double tol = 1e-12);

// Env wrapper: one-hot observations, a 1-D action in [-1, 1] binned into
// n_actions equal intervals. Always starts in state 0.
class ChainEnv final : public Env {
 public:
  explicit ChainEnv(TabularMdp mdp, std::size_t max_steps = 20);

  const EnvSpec& spec() const override { return spec_; }
  std::string name() const override { return "chain"; }
  std::vector<double> reset(std::mt19937_64& rng) override;
  StepResult step(std::span<const double> action) override;
  std::size_t steps_taken() const override { return steps_; }
  bool episode_over() const override { return over_; }

  std::size_t state() const { return state_; }
  std::size_t action_index(double a) const;
  const TabularMdp& mdp() const { return mdp_; }

 private:
  std::vector<double> observe() const;

  TabularMdp mdp_;
  EnvSpec spec_;
  std::mt19937_64 rng_;
  std::size_t state_ = 0;
  std::size_t steps_ = 0;
  bool over_ = true;
};

}  // namespace req
