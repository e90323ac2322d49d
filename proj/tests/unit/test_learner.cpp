#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "helpers.hpp"
#include "req/learner/learner.hpp"
#include "req/learner/replay.hpp"
#include "req/learner/training.hpp"

using namespace req;

namespace {

Transition make_transition(std::mt19937_64& rng, std::int64_t episode, std::int64_t step, std::size_t sd = 3,
                           std::size_t ad = 2) {
  std::normal_distribution<double> n(0.0, 1.0);
  Transition t;
  for (std::size_t i = 0; i < sd; ++i) t.obs.push_back(n(rng));
  for (std::size_t i = 0; i < ad; ++i) t.action.push_back(n(rng));
  for (std::size_t i = 0; i < sd; ++i) t.next_obs.push_back(n(rng));
  t.reward = std::bernoulli_distribution(0.2)(rng) ? 1.0 : 0.0;
  t.terminal = std::bernoulli_distribution(0.1)(rng);
  t.source = std::bernoulli_distribution(0.5)(rng) ? Source::Expert : Source::Policy;
  t.episode_id = episode;
  t.step_index = step;
  return t;
}

ReplayBuffer random_buffer(std::size_t n, std::uint64_t seed, bool with_expert = false) {
  std::mt19937_64 rng(seed);
  ReplayBuffer b;
  for (std::size_t i = 0; i < n; ++i) {
    Transition t = make_transition(rng, static_cast<std::int64_t>(i / 10), static_cast<std::int64_t>(i % 10));
    if (with_expert) t.expert_action = std::vector<double>{0.1 * static_cast<double>(i % 7), -0.2};
    b.add(std::move(t));
  }
  return b;
}

LearnerConfig small_config() {
  LearnerConfig c;
  c.hidden = {16, 16};
  c.batch_size = 16;
  c.req.n_action_samples = 8;
  return c;
}

std::vector<const Transition*> first_n(const ReplayBuffer& b, std::size_t n) {
  std::vector<const Transition*> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(&b.at(i));
  return out;
}

double max_abs_diff(const ParamSet& a, const ParamSet& b) {
  double worst = 0.0;
  for (const auto& [name, arr] : a.params) {
    const NumArray& o = b.at(name);
    for (std::size_t i = 0; i < arr.size(); ++i) worst = std::max(worst, std::abs(arr[i] - o[i]));
  }
  return worst;
}

TrainingSetup tiny_setup(Mode mode) {
  TrainingSetup s;
  s.env = "point_mass";
  s.learner = small_config();
  s.learner.mode = mode;
  s.learner.total_steps = 60;
  s.intertwine = default_intertwine(mode);
  s.warmup_steps = 32;
  s.eval_period = 30;
  s.eval_episodes = 3;
  return s;
}

}  // namespace

TEST_CASE("replay: ring buffer keeps the newest transitions within capacity") {
  std::mt19937_64 rng(1);
  ReplayBuffer b(5);
  for (int i = 0; i < 12; ++i) b.add(make_transition(rng, 0, i));
  CHECK(b.size() == 5);
  CHECK(b.at(0).step_index == 7);
  CHECK(b.at(4).step_index == 11);
  CHECK_THROWS_AS(b.at(5), std::out_of_range);
  CHECK_THROWS_AS(ReplayBuffer(0), std::invalid_argument);
}

TEST_CASE("replay: uniform sampling passes a chi-square test at 1e5 draws") {
  const ReplayBuffer b = random_buffer(50, 3);
  std::mt19937_64 rng(4);
  std::vector<double> counts(50, 0.0);
  for (std::size_t i : b.sample_indices(100000, rng)) counts[i] += 1.0;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - 2000.0) * (c - 2000.0) / 2000.0;
  // 99.9th percentile of chi-square with 49 degrees of freedom.
  CHECK(chi2 < 85.35);
}

TEST_CASE("replay: sequences stay inside one episode") {
  const ReplayBuffer b = random_buffer(200, 5);
  std::mt19937_64 rng(6);
  for (const auto& seq : b.sample_sequences(500, 4, rng)) {
    REQUIRE(seq.size() == 4);
    for (std::size_t k = 1; k < 4; ++k) {
      CHECK(seq[k]->episode_id == seq[0]->episode_id);
      CHECK(seq[k]->step_index == seq[0]->step_index + static_cast<std::int64_t>(k));
    }
  }
  CHECK_THROWS_AS(b.sample_sequences(1, 11, rng), std::runtime_error);
}

TEST_CASE("replay: empty buffer refuses to sample") {
  ReplayBuffer b;
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(b.sample(1, rng), std::runtime_error);
}

TEST_CASE("dataset: save and load round-trip element-wise") {
  const ReplayBuffer b = random_buffer(40, 7, true);
  const auto path = std::filesystem::temp_directory_path() / "req_dataset_roundtrip.jsonl";
  save_dataset(path, b);
  const ReplayBuffer loaded = load_offline_dataset(path, 3, 2);
  REQUIRE(loaded.size() == b.size());
  for (std::size_t i = 0; i < b.size(); ++i) CHECK(loaded.at(i) == b.at(i));
  CHECK_THROWS_AS(load_offline_dataset(path, 4, 2), std::runtime_error);
  std::filesystem::remove(path);
}

TEST_CASE("dataset: malformed records name the line; empty files load empty") {
  const auto path = std::filesystem::temp_directory_path() / "req_dataset_bad.jsonl";
  {
    std::ofstream f(path);
    f << R"({"obs":[0],"action":[0],"reward":0,"next_obs":[0],"terminal":false,"source":"expert","episode":0,"step":0})"
      << "\n{\"obs\": [1], \"action\":\n";
  }
  CHECK_THROWS_WITH_AS(load_offline_dataset(path), doctest::Contains("line 2"), std::runtime_error);
  { std::ofstream f(path); }
  CHECK(load_offline_dataset(path).empty());
  TrainingSetup s = tiny_setup(Mode::Offline);
  s.dataset = path.string();
  CHECK_THROWS_AS(run_training(s), std::invalid_argument);
  std::filesystem::remove(path);
}

TEST_CASE("dataset: 1000 expert transitions from the point-mass env") {
  ReplayBuffer gen = generate_dataset("point_mass", "scripted", 200, 1);
  ReplayBuffer b;
  for (std::size_t i = 0; i < 1000; ++i) b.add(gen.at(i));
  const auto path = std::filesystem::temp_directory_path() / "req_dataset_expert.jsonl";
  save_dataset(path, b);
  const ReplayBuffer loaded = load_offline_dataset(path, 10, 3);
  CHECK(loaded.size() == 1000);
  for (std::size_t i = 0; i < loaded.size(); ++i) CHECK(loaded.at(i).source == Source::Expert);
  std::filesystem::remove(path);
}

TEST_CASE("learner: td0 and req with epsilon 0 give the same gradients") {
  const ReplayBuffer b = random_buffer(64, 9, true);
  for (Mode mode : {Mode::OffPolicy, Mode::Rlfse}) {
    LearnerConfig req = small_config();
    req.mode = mode;
    req.req.epsilon = 0.0;
    LearnerConfig td0 = small_config();
    td0.mode = mode;
    td0.op = EvalOperator::Td0;
    Learner a(3, 2, req, 5), t(3, 2, td0, 5);
    const UpdateGrads ga = a.compute_gradients(first_n(b, 16));
    const UpdateGrads gt = t.compute_gradients(first_n(b, 16));
    CHECK(max_abs_diff(ga.q, gt.q) <= 1e-10);
    CHECK(max_abs_diff(ga.prior, gt.prior) <= 1e-10);
  }
}

TEST_CASE("learner: same seed and frozen buffer give identical updates") {
  const ReplayBuffer b = random_buffer(100, 10);
  Learner a(3, 2, small_config(), 8), c(3, 2, small_config(), 8);
  for (int i = 0; i < 2; ++i) {
    a.step(b);
    c.step(b);
  }
  CHECK(a.q().params.params == c.q().params.params);
  CHECK(a.prior().params.params == c.prior().params.params);
}

TEST_CASE("learner: a constant critic accepts every action") {
  const ReplayBuffer b = random_buffer(32, 11);
  Learner l(3, 2, small_config(), 3);
  const std::string last = weight_name(l.q_target().net.num_layers() - 1);
  for (auto& v : l.q_target().params.at(last).values) v = 0.0;
  const UpdateGrads g = l.compute_gradients(first_n(b, 16));
  CHECK(g.metrics.accept_rate == 1.0);
}

TEST_CASE("learner: metrics are populated") {
  const ReplayBuffer b = random_buffer(64, 12);
  Learner l(3, 2, small_config(), 3);
  const LearnerMetrics m = l.step(b);
  CHECK(std::isfinite(m.q_loss));
  CHECK(std::isfinite(m.prior_loss));
  CHECK(m.mean_eta > 0.0);
  CHECK(m.mean_kl >= 0.0);
  CHECK(m.accept_rate >= 0.0);
  CHECK(m.accept_rate <= 1.0);
  CHECK_THROWS(l.step(ReplayBuffer{}));
}

TEST_CASE("learner: targets are copied exactly every U steps") {
  const ReplayBuffer b = random_buffer(64, 13);
  LearnerConfig cfg = small_config();
  cfg.target_update_period = 4;
  Learner l(3, 2, cfg, 2);
  const auto initial_target = l.q_target().params.params;
  for (int i = 0; i < 3; ++i) l.step(b);
  CHECK(l.q_target().params.params == initial_target);
  CHECK(l.sync_count() == 0);
  l.step(b);
  CHECK(l.q_target().params.params == l.q().params.params);
  CHECK(l.prior_target().params.params == l.prior().params.params);
  for (int i = 0; i < 8; ++i) l.step(b);
  CHECK(l.steps() == 12);
  CHECK(l.sync_count() == 3);
}

TEST_CASE("learner: TD targets are constant between syncs") {
  const ReplayBuffer b = random_buffer(64, 14);
  LearnerConfig cfg = small_config();
  cfg.target_update_period = 50;
  Learner l(3, 2, cfg, 2);
  const auto batch = first_n(b, 16);
  const TransitionBatch tb = make_batch(batch);
  Rng r1(1), r2(1);
  const QLossResult before = q_loss(tb, l.q(), l.q_target(), l.prior_target(), cfg.req, cfg.op, r1);
  for (int i = 0; i < 5; ++i) l.step(b);
  const QLossResult after = q_loss(tb, l.q(), l.q_target(), l.prior_target(), cfg.req, cfg.op, r2);
  CHECK(before.targets == after.targets);
}

TEST_CASE("config validation") {
  LearnerConfig c = small_config();
  c.target_update_period = 0;
  CHECK_THROWS(c.validate());
  CHECK(mode_from_string("rlfse") == Mode::Rlfse);
  CHECK(to_string(Mode::Offline) == "offline");
  CHECK(operator_from_string("td0") == EvalOperator::Td0);
  CHECK_THROWS(mode_from_string("online"));
  TrainingSetup s = tiny_setup(Mode::Offline);
  ReplayBuffer data = random_buffer(10, 1);
  CHECK_THROWS_AS(run_training(tiny_setup(Mode::OffPolicy), &data), std::invalid_argument);
  CHECK_THROWS_AS(run_training(s), std::invalid_argument);
}

TEST_CASE("run_training: offline mode never steps the environment") {
  const ReplayBuffer data = generate_dataset("point_mass", "scripted", 10, 2, 0.5);
  const RunArtifacts art = run_training(tiny_setup(Mode::Offline), &data);
  CHECK(art.env_steps == 0);
  CHECK(art.learner_steps == 60);
  CHECK_FALSE(art.replay.has_value());
}

TEST_CASE("run_training: rlfd episodes have a single source and the expert share tracks lambda_psi") {
  TrainingSetup s = tiny_setup(Mode::Rlfd);
  s.intertwine = {0.4, 0.0};
  // A long warmup and a single learner step: this only exercises data
  // collection.
  s.warmup_steps = 8000;
  s.learner.total_steps = 1;
  s.learner.hidden = {4, 4};
  const RunArtifacts art = run_training(s);
  REQUIRE(art.replay);
  std::map<std::int64_t, std::set<Source>> sources;
  for (std::size_t i = 0; i < art.replay->size(); ++i) {
    const Transition& t = art.replay->at(i);
    sources[t.episode_id].insert(t.source);
  }
  double expert_episodes = 0.0;
  for (const auto& [ep, set] : sources) {
    CHECK(set.size() == 1);
    if (set.count(Source::Expert)) expert_episodes += 1.0;
  }
  const double n = static_cast<double>(sources.size());
  const double share = expert_episodes / n;
  CHECK(std::abs(share - 0.4) <= 4.0 * std::sqrt(0.24 / n));
}

TEST_CASE("run_training: rlfse records the expert action on every step") {
  const RunArtifacts art = run_training(tiny_setup(Mode::Rlfse));
  REQUIRE(art.replay);
  bool mixed = false;
  std::map<std::int64_t, std::set<Source>> sources;
  for (std::size_t i = 0; i < art.replay->size(); ++i) {
    const Transition& t = art.replay->at(i);
    CHECK(t.expert_action.has_value());
    if (t.source == Source::Expert) CHECK(*t.expert_action == t.action);
    sources[t.episode_id].insert(t.source);
  }
  for (const auto& [ep, set] : sources) mixed = mixed || set.size() == 2;
  CHECK(mixed);
}

TEST_CASE("run_training: seed-fixed runs replay identically") {
  for (Mode mode : {Mode::OffPolicy, Mode::Rlfse}) {
    const RunArtifacts a = run_training(tiny_setup(mode));
    const RunArtifacts b = run_training(tiny_setup(mode));
    CHECK(a.metrics == b.metrics);
    CHECK(a.metrics.size() == 2);
    CHECK(a.learner->prior().params.params == b.learner->prior().params.params);
  }
}

TEST_CASE("steps_to_threshold picks the first qualifying row") {
  std::vector<MetricsRow> rows(3);
  rows[0].step = 10;
  rows[0].success_rate = 0.2;
  rows[1].step = 20;
  rows[1].success_rate = 0.9;
  rows[2].step = 30;
  rows[2].success_rate = 0.95;
  CHECK(steps_to_threshold(rows, 0.9) == 20u);
  CHECK_FALSE(steps_to_threshold(rows, 0.99).has_value());
}

TEST_CASE("learner: the td0 operator acts with the same importance-weighted policy") {
  LearnerConfig req = small_config();
  LearnerConfig td0 = small_config();
  td0.op = EvalOperator::Td0;
  const Learner a(3, 2, req, 17), t(3, 2, td0, 17);
  const std::vector<double> obs{0.3, -0.2, 0.5};
  std::mt19937_64 r1(4), r2(4);
  for (int i = 0; i < 10; ++i) CHECK(a.act(obs, ActingMode::Implicit, r1) == t.act(obs, ActingMode::Implicit, r2));
}
