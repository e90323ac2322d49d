#include "req/learner/training.hpp"

#include <stdexcept>

#include "req/envs/scripted_expert.hpp"

namespace req {
namespace {

std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

enum Stream : std::uint64_t { kLearner = 1, kActing = 2, kEnvReset = 3, kIntertwine = 4, kEval = 5 };

std::vector<double> random_action(const EnvSpec& spec, std::mt19937_64& rng) {
  std::vector<double> a(spec.action_dim);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = std::uniform_real_distribution<double>(spec.action_low[i], spec.action_high[i])(rng);
  }
  return a;
}

struct LossAccumulator {
  double q_loss = 0, prior_loss = 0, mean_eta = 0, mean_kl = 0, accept_rate = 0;
  std::size_t n = 0;

  void add(const LearnerMetrics& m) {
    q_loss += m.q_loss;
    prior_loss += m.prior_loss;
    mean_eta += m.mean_eta;
    mean_kl += m.mean_kl;
    accept_rate += m.accept_rate;
    ++n;
  }

  void fill(MetricsRow& row) const {
    if (n == 0) return;
    const double k = 1.0 / static_cast<double>(n);
    row.q_loss = q_loss * k;
    row.prior_loss = prior_loss * k;
    row.mean_eta = mean_eta * k;
    row.mean_kl = mean_kl * k;
    row.accept_rate = accept_rate * k;
  }
};

}  // namespace

void TrainingSetup::validate() const {
  learner.validate();
  intertwine.validate();
  if (eval_period == 0) throw std::invalid_argument("eval_period must be >= 1");
}

EvalStats evaluate_policy(Env& env, const PolicyFn& policy, std::size_t n_episodes, std::uint64_t seed,
                          const std::function<void()>& on_reset) {
  if (n_episodes == 0) throw std::invalid_argument("evaluate: need at least one episode");
  auto rng = derived_rng(seed, kEval);
  EvalStats stats;
  for (std::size_t ep = 0; ep < n_episodes; ++ep) {
    std::vector<double> obs = env.reset(rng);
    if (on_reset) on_reset();
    double ret = 0.0;
    bool success = false;
    while (!env.episode_over()) {
      StepResult r = env.step(policy(obs));
      ret += r.reward;
      success = success || r.success;
      obs = std::move(r.observation);
    }
    stats.mean_return += ret;
    stats.success_rate += success ? 1.0 : 0.0;
  }
  stats.mean_return /= static_cast<double>(n_episodes);
  stats.success_rate /= static_cast<double>(n_episodes);
  return stats;
}

EvalStats evaluate_learner(const Learner& learner, Env& env, std::size_t n_episodes, std::uint64_t seed) {
  const auto& prior = learner.prior();
  return evaluate_policy(
      env, [&](std::span<const double> obs) { return policy_distribution(prior, obs).mean; }, n_episodes,
      seed);
}

RunArtifacts run_training(const TrainingSetup& setup, const ReplayBuffer* dataset, const MetricsCallback& on_row) {
  setup.validate();
  const LearnerConfig& lc = setup.learner;
  const bool offline = lc.mode == Mode::Offline;
  const bool with_expert = lc.mode == Mode::Rlfd || lc.mode == Mode::Rlfse;

  std::unique_ptr<Env> env = make_env(setup.env);
  std::unique_ptr<Env> eval_env = make_env(setup.env);
  const EnvSpec spec = env->spec();

  ReplayBuffer loaded(1);
  const ReplayBuffer* data = dataset;
  if (offline) {
    if (data == nullptr) {
      if (setup.dataset.empty()) throw std::invalid_argument("offline mode needs a dataset");
      loaded = load_offline_dataset(setup.dataset, spec.obs_dim, spec.action_dim, lc.replay_capacity);
      data = &loaded;
    }
    if (data->empty()) throw std::invalid_argument("offline mode: dataset is empty");
    const Transition& t = data->at(0);
    if (t.obs.size() != spec.obs_dim || t.action.size() != spec.action_dim) {
      throw std::invalid_argument("offline dataset dimensions do not match env " + setup.env);
    }
  } else if (dataset != nullptr) {
    throw std::invalid_argument("a dataset is only accepted in offline mode");
  }

  std::unique_ptr<SequencedExpert> expert;
  if (with_expert) {
    if (setup.expert.empty()) throw std::invalid_argument(to_string(lc.mode) + " mode needs an expert");
    expert = make_expert(*env, setup.expert);
  }

  RunArtifacts art;
  art.learner = std::make_unique<Learner>(spec.obs_dim, spec.action_dim, lc, setup.seed);
  Learner& learner = *art.learner;
  learner.reseed(derived_rng(setup.seed, kLearner)());

  auto acting_rng = derived_rng(setup.seed, kActing);
  auto reset_rng = derived_rng(setup.seed, kEnvReset);
  auto tw_rng = derived_rng(setup.seed, kIntertwine);
  Intertwiner tw(with_expert ? setup.intertwine : IntertwineConfig{0.0, 0.0});

  ReplayBuffer buffer(lc.replay_capacity);
  const ReplayBuffer& train_data = offline ? *data : buffer;

  std::vector<double> obs;
  std::int64_t episode = -1;
  std::int64_t step_in_episode = 0;
  auto start_episode = [&] {
    obs = env->reset(reset_rng);
    if (expert) expert->reset();
    tw.reset_episode(tw_rng);
    ++episode;
    step_in_episode = 0;
  };

  auto env_step = [&] {
    if (episode < 0 || env->episode_over()) start_episode();
    std::optional<std::vector<double>> psi;
    // Under RLfSE the expert is queried at every step so its actions can
    // relabel policy steps; under RLfD it only runs when it is in control.
    const ActionSource src = tw.next_source(tw_rng);
    if (expert && (lc.mode == Mode::Rlfse || src == ActionSource::Expert)) psi = expert->act(obs);
    std::vector<double> action;
    if (src == ActionSource::Expert) {
      action = *psi;
      ++art.expert_steps;
    } else {
      action = learner.act(obs, setup.acting, acting_rng);
    }
    action = clip_action(action, spec);
    StepResult r = env->step(action);
    Transition t;
    t.obs = obs;
    t.action = std::move(action);
    t.reward = r.reward;
    t.next_obs = r.observation;
    t.terminal = r.terminal;
    t.source = src == ActionSource::Expert ? Source::Expert : Source::Policy;
    t.episode_id = episode;
    t.step_index = step_in_episode++;
    if (lc.mode == Mode::Rlfse) t.expert_action = std::move(psi);
    buffer.add(std::move(t));
    obs = std::move(r.observation);
    ++art.env_steps;
  };

  LossAccumulator acc;
  auto log_row = [&] {
    MetricsRow row;
    row.step = learner.steps();
    const EvalStats ev = evaluate_learner(learner, *eval_env, setup.eval_episodes, setup.seed);
    row.episodic_return = ev.mean_return;
    row.success_rate = ev.success_rate;
    acc.fill(row);
    acc = {};
    art.metrics.push_back(row);
    if (on_row) on_row(row);
  };

  const std::size_t min_fill = std::max(setup.warmup_steps, std::size_t{1});
  while (learner.steps() < lc.total_steps) {
    if (!offline) env_step();
    if (train_data.size() < min_fill) continue;
    acc.add(learner.step(train_data));
    if (learner.steps() % setup.eval_period == 0 || learner.steps() == lc.total_steps) {
      log_row();
      if (setup.stop_at_success && art.metrics.back().success_rate >= *setup.stop_at_success) break;
    }
  }
  art.learner_steps = learner.steps();
  if (!offline) art.replay = std::move(buffer);
  return art;
}

std::optional<std::size_t> steps_to_threshold(const std::vector<MetricsRow>& rows, double threshold) {
  for (const auto& r : rows) {
    if (r.success_rate >= threshold) return r.step;
  }
  return std::nullopt;
}

ReplayBuffer generate_dataset(const std::string& env_name, const std::string& expert_name,
                              std::size_t episodes, std::uint64_t seed, double random_fraction) {
  if (random_fraction < 0.0 || random_fraction > 1.0) {
    throw std::invalid_argument("random_fraction must lie in [0, 1]");
  }
  std::unique_ptr<Env> env = make_env(env_name);
  const EnvSpec spec = env->spec();
  std::unique_ptr<SequencedExpert> expert;
  if (expert_name != "random") expert = make_expert(*env, expert_name);

  auto reset_rng = derived_rng(seed, kEnvReset);
  auto action_rng = derived_rng(seed, kActing);
  ReplayBuffer buffer(std::max<std::size_t>(episodes * spec.max_episode_steps, 1));
  for (std::size_t ep = 0; ep < episodes; ++ep) {
    // Evenly spread: episode ep is random when the running quota ticks over.
    const bool random_ep = !expert || static_cast<std::size_t>(static_cast<double>(ep + 1) * random_fraction) >
                                          static_cast<std::size_t>(static_cast<double>(ep) * random_fraction);
    std::vector<double> obs = env->reset(reset_rng);
    if (expert) expert->reset();
    std::int64_t t = 0;
    while (!env->episode_over()) {
      std::vector<double> a = random_ep ? random_action(spec, action_rng) : clip_action(expert->act(obs), spec);
      StepResult r = env->step(a);
      Transition tr;
      tr.obs = obs;
      tr.action = std::move(a);
      tr.reward = r.reward;
      tr.next_obs = r.observation;
      tr.terminal = r.terminal;
      tr.source = random_ep ? Source::Policy : Source::Expert;
      tr.episode_id = static_cast<std::int64_t>(ep);
      tr.step_index = t++;
      buffer.add(std::move(tr));
      obs = std::move(r.observation);
    }
  }
  return buffer;
}

}  // namespace req
