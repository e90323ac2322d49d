#include "req/harness/oracle_check.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "req/envs/chain_mdp.hpp"
#include "req/envs/pose_world.hpp"
#include "req/envs/scripted_expert.hpp"
#include "req/experts/pose.hpp"
#include "req/math/dual.hpp"
#include "req/policy/gaussian.hpp"

namespace req {
namespace {

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::vector<double> random_q(std::mt19937_64& rng, std::size_t& m, double& range) {
  m = std::uniform_int_distribution<std::size_t>(2, 64)(rng);
  range = std::uniform_real_distribution<double>(0.1, 10.0)(rng);
  const double offset = std::uniform_real_distribution<double>(-5.0, 5.0)(rng);
  std::uniform_real_distribution<double> u(0.0, range);
  std::vector<double> q(m);
  for (double& v : q) v = offset + u(rng);
  return q;
}

CheckResult small_epsilon_limit(std::mt19937_64& rng) {
  // A KL budget eps moves the weighted value at most (range / 2) * sqrt(2 eps)
  // away from the sample mean (Hoeffding), and eps = 0 gives the mean.
  ReqConfig cfg;
  double worst_ratio = 0.0, worst_zero = 0.0;
  for (int t = 0; t < 200; ++t) {
    std::size_t m;
    double range;
    const auto q = random_q(rng, m, range);
    double mean = 0.0;
    for (double v : q) mean += v;
    mean /= static_cast<double>(m);
    cfg.epsilon = 1e-6;
    const auto d = solve_temperature(q, cfg);
    const double v = softmax_weights(q, d.eta, cfg.eta_min, cfg.eta_max).value;
    const double bound = 0.5 * range * std::sqrt(2.0 * cfg.epsilon) + 1e-12;
    worst_ratio = std::max(worst_ratio, std::abs(v - mean) / bound);
    cfg.epsilon = 0.0;
    const auto d0 = solve_temperature(q, cfg);
    worst_zero = std::max(worst_zero, std::abs(softmax_weights(q, d0.eta, cfg.eta_min, cfg.eta_max).value - mean));
  }
  const bool ok = worst_ratio <= 1.0 && worst_zero <= 1e-12;
  return {"limit.small_epsilon", ok,
          fmt("max |V-mean| / Hoeffding bound at eps=1e-6: %.3g; max |V-mean| at eps=0: %.3g", worst_ratio,
              worst_zero)};
}

CheckResult large_epsilon_limit(std::mt19937_64& rng) {
  ReqConfig cfg;
  cfg.epsilon = 1e3;
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    std::size_t m;
    double range;
    const auto q = random_q(rng, m, range);
    const auto d = solve_temperature(q, cfg);
    const double v = softmax_weights(q, d.eta, cfg.eta_min, cfg.eta_max).value;
    worst = std::max(worst, std::abs(v - *std::max_element(q.begin(), q.end())));
  }
  return {"limit.large_epsilon", worst <= 1e-4, fmt("max |V-max| at eps=1e3: %.3g (tol 1e-4)", worst)};
}

CheckResult dual_constraint(std::mt19937_64& rng) {
  ReqConfig cfg;
  double worst = 0.0;
  int n = 0;
  while (n < 100) {
    std::size_t m;
    double range;
    const auto q = random_q(rng, m, range);
    const double greedy = std::log(static_cast<double>(m));  // distinct samples: one-hot weights
    if (greedy <= cfg.epsilon) continue;
    const auto d = solve_temperature(q, cfg);
    worst = std::max(worst, std::abs(d.sample_kl - cfg.epsilon));
    ++n;
  }
  const double tol = std::max(0.05 * cfg.epsilon, 1e-3);
  return {"dual.constraint", worst <= tol, fmt("max |KL-eps| over 100 states: %.3g (tol %.3g)", worst, tol)};
}

double max_table_diff(const QTable& a, const QTable& b) {
  double d = 0.0;
  for (std::size_t s = 0; s < a.size(); ++s) {
    for (std::size_t k = 0; k < a[s].size(); ++k) d = std::max(d, std::abs(a[s][k] - b[s][k]));
  }
  return d;
}

std::vector<CheckResult> tabular_checks() {
  const TabularMdp mdp = make_chain_mdp(3, 0.9);
  const auto star = exact_policy_iteration(mdp);
  const QTable uniform_q =
      exact_policy_evaluation(mdp, std::vector<std::vector<double>>(mdp.n_states, std::vector<double>(mdp.n_actions, 0.5)));
  ReqConfig cfg;
  cfg.epsilon = 1e3;
  const auto greedy = iterate_req_backup(mdp, cfg);
  cfg.epsilon = 0.0;
  const auto prior = iterate_req_backup(mdp, cfg);
  const auto td0 = iterate_req_backup(mdp, cfg, EvalOperator::Td0);
  const double e1 = max_table_diff(greedy.q, star.q);
  const double e2 = max_table_diff(prior.q, uniform_q);
  const double e3 = max_table_diff(td0.q, uniform_q);
  return {
      {"tabular.q_star", greedy.converged && e1 <= 1e-6,
       fmt("eps=1e3 backup vs value iteration: %.3g after %.0f iterations", e1, static_cast<double>(greedy.iterations))},
      {"tabular.prior_evaluation", prior.converged && e2 <= 1e-6,
       fmt("eps=0 backup vs exact evaluation of the uniform prior: %.3g after %.0f iterations", e2,
           static_cast<double>(prior.iterations))},
      {"tabular.td0", td0.converged && e3 <= 1e-6, fmt("td0 backup vs exact evaluation: %.3g", e3)},
  };
}

CheckResult kl_decomposition(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mean(-3.0, 3.0), sd(0.05, 3.0);
  std::uniform_int_distribution<std::size_t> dim(1, 6);
  double worst = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const std::size_t k = dim(rng);
    GaussianParams a, b;
    for (std::size_t i = 0; i < k; ++i) {
      a.mean.push_back(mean(rng));
      a.stddev.push_back(sd(rng));
      b.mean.push_back(mean(rng));
      b.stddev.push_back(sd(rng));
    }
    const auto d = kl_decoupled(a, b);
    worst = std::max(worst, std::abs(d.kl_mean + d.kl_cov - kl_total(a, b)));
  }
  return {"kl.decomposition", worst <= 1e-12, fmt("max |kl_mean + kl_cov - KL| over 1e4 pairs: %.3g", worst)};
}

CheckResult orientation_zero(std::mt19937_64& rng) {
  double worst = 0.0;
  for (int t = 0; t < 100000; ++t) {
    Pose a, b;
    a.orientation = random_unit_quaternion(rng);
    b.orientation = a.orientation;
    if (rng() & 1) b.orientation.coeffs() = -b.orientation.coeffs();
    worst = std::max(worst, orientation_error(a, b).norm());
  }
  return {"controller.orientation_zero", worst <= 1e-9,
          fmt("max |e_o| over 1e5 same-rotation pairs: %.3g", worst)};
}

CheckResult tracking(std::mt19937_64& rng) {
  PoseWorld world;
  auto expert = scripted_expert(world);
  std::size_t reached = 0, worst_steps = 0;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> obs = world.reset(rng);
    expert->reset();
    bool ok = false;
    while (!world.episode_over()) {
      StepResult r = world.step(expert->act(obs));
      obs = std::move(r.observation);
      ok = ok || r.success;
    }
    if (ok) ++reached;
    worst_steps = std::max(worst_steps, world.steps_taken());
  }
  return {"controller.tracking", reached == 100,
          fmt("%.0f/100 starts reached 1e-3 pose error; slowest took %.0f steps", static_cast<double>(reached),
              static_cast<double>(worst_steps))};
}

}  // namespace

std::vector<CheckResult> run_oracle_checks(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CheckResult> out;
  out.push_back(small_epsilon_limit(rng));
  out.push_back(large_epsilon_limit(rng));
  out.push_back(dual_constraint(rng));
  for (auto& c : tabular_checks()) out.push_back(std::move(c));
  out.push_back(kl_decomposition(rng));
  out.push_back(orientation_zero(rng));
  out.push_back(tracking(rng));
  return out;
}

}  // namespace req
