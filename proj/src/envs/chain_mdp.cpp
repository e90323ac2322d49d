#include "req/envs/chain_mdp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace req {

void TabularMdp::validate() const {
  if (n_states == 0 || n_actions == 0) throw std::invalid_argument("TabularMdp: empty");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("TabularMdp: gamma in [0, 1)");
  for (std::size_t s = 0; s < n_states; ++s) {
    for (std::size_t a = 0; a < n_actions; ++a) {
      double total = 0.0;
      for (double p : transitions.at(s).at(a)) total += p;
      if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument("TabularMdp: transition row does not sum to 1");
      }
    }
  }
}

TabularMdp make_chain_mdp(std::size_t n_states, double gamma) {
  TabularMdp m;
  m.n_states = n_states;
  m.n_actions = 2;
  m.gamma = gamma;
  m.transitions.assign(n_states, std::vector<std::vector<double>>(2, std::vector<double>(n_states, 0.0)));
  m.rewards.assign(n_states, std::vector<double>(2, 0.0));
  for (std::size_t s = 0; s < n_states; ++s) {
    m.transitions[s][0][s == 0 ? 0 : s - 1] = 1.0;
    const std::size_t right = std::min(s + 1, n_states - 1);
    m.transitions[s][1][right] += 0.9;
    m.transitions[s][1][s] += 0.1;
  }
  m.rewards[n_states - 1][1] = 1.0;
  m.rewards[0][0] = 0.1;
  return m;
}

PolicyIterationResult exact_policy_iteration(const TabularMdp& mdp, double tol) {
  mdp.validate();
  PolicyIterationResult out;
  out.q.assign(mdp.n_states, std::vector<double>(mdp.n_actions, 0.0));
  std::vector<double> v(mdp.n_states, 0.0);
  for (;;) {
    double delta = 0.0;
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
      for (std::size_t a = 0; a < mdp.n_actions; ++a) {
        double q = mdp.rewards[s][a];
        for (std::size_t s2 = 0; s2 < mdp.n_states; ++s2) q += mdp.gamma * mdp.transitions[s][a][s2] * v[s2];
        delta = std::max(delta, std::abs(q - out.q[s][a]));
        out.q[s][a] = q;
      }
    }
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
      v[s] = *std::max_element(out.q[s].begin(), out.q[s].end());
    }
    ++out.iterations;
    if (delta < tol || out.iterations > 1000000) break;
  }
  out.greedy_policy.resize(mdp.n_states);
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    out.greedy_policy[s] = static_cast<std::size_t>(
        std::max_element(out.q[s].begin(), out.q[s].end()) - out.q[s].begin());
  }
  return out;
}

QTable exact_policy_evaluation(const TabularMdp& mdp, const std::vector<std::vector<double>>& pi) {
  mdp.validate();
  const auto n = static_cast<Eigen::Index>(mdp.n_states);
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    for (std::size_t act = 0; act < mdp.n_actions; ++act) {
      const double p = pi[s][act];
      r(static_cast<Eigen::Index>(s)) += p * mdp.rewards[s][act];
      for (std::size_t s2 = 0; s2 < mdp.n_states; ++s2) {
        a(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s2)) -=
            mdp.gamma * p * mdp.transitions[s][act][s2];
      }
    }
  }
  const Eigen::VectorXd v = a.partialPivLu().solve(r);
  QTable q(mdp.n_states, std::vector<double>(mdp.n_actions, 0.0));
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    for (std::size_t act = 0; act < mdp.n_actions; ++act) {
      double val = mdp.rewards[s][act];
      for (std::size_t s2 = 0; s2 < mdp.n_states; ++s2) {
        val += mdp.gamma * mdp.transitions[s][act][s2] * v(static_cast<Eigen::Index>(s2));
      }
      q[s][act] = val;
    }
  }
  return q;
}

ChainEnv::ChainEnv(TabularMdp mdp, std::size_t max_steps) : mdp_(std::move(mdp)) {
  mdp_.validate();
  spec_.obs_dim = mdp_.n_states;
  spec_.action_dim = 1;
  spec_.action_low = {-1.0};
  spec_.action_high = {1.0};
  spec_.max_episode_steps = max_steps;
  spec_.discount = mdp_.gamma;
}

std::vector<double> ChainEnv::observe() const {
  std::vector<double> obs(mdp_.n_states, 0.0);
  obs[state_] = 1.0;
  return obs;
}

std::vector<double> ChainEnv::reset(std::mt19937_64& rng) {
  rng_.seed(rng());
  state_ = 0;
  steps_ = 0;
  over_ = false;
  return observe();
}

std::size_t ChainEnv::action_index(double a) const {
  const double clipped = std::clamp(a, -1.0, 1.0);
  const auto n = static_cast<double>(mdp_.n_actions);
  return std::min(mdp_.n_actions - 1, static_cast<std::size_t>((clipped + 1.0) / 2.0 * n));
}

StepResult ChainEnv::step(std::span<const double> action) {
  if (over_) throw std::logic_error("ChainEnv: step after episode end");
  const std::size_t a = action_index(action[0]);
  StepResult res;
  res.reward = mdp_.rewards[state_][a];
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double draw = u(rng_), acc = 0.0;
  std::size_t next = mdp_.n_states - 1;
  for (std::size_t s2 = 0; s2 < mdp_.n_states; ++s2) {
    acc += mdp_.transitions[state_][a][s2];
    if (draw < acc) {
      next = s2;
      break;
    }
  }
  state_ = next;
  ++steps_;
  over_ = steps_ >= spec_.max_episode_steps;
  res.terminal = over_;
  res.observation = observe();
  return res;
}

TabularBackupResult iterate_req_backup(const TabularMdp& mdp, const ReqConfig& cfg, EvalOperator op,
                                       std::size_t max_iters, double tol) {
  mdp.validate();
  TabularBackupResult res;
  res.q.assign(mdp.n_states, std::vector<double>(mdp.n_actions, 0.0));
  for (std::size_t it = 0; it < max_iters; ++it) {
    NumArray samples = NumArray::matrix(mdp.n_states, mdp.n_actions);
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
      std::copy(res.q[s].begin(), res.q[s].end(), samples.row(s).begin());
    }
    const std::vector<double> v = evaluate_samples(samples, cfg, op).values();
    double delta = 0.0;
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
      for (std::size_t a = 0; a < mdp.n_actions; ++a) {
        double next = 0.0;
        for (std::size_t s2 = 0; s2 < mdp.n_states; ++s2) next += mdp.transitions[s][a][s2] * v[s2];
        const double updated = mdp.rewards[s][a] + mdp.gamma * next;
        delta = std::max(delta, std::abs(updated - res.q[s][a]));
        res.q[s][a] = updated;
      }
    }
    res.iterations = it + 1;
    if (delta < tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace req
