#include "req/harness/suites.hpp"

#include <chrono>
#include <stdexcept>

#include "req/harness/run.hpp"

namespace req {

TrainingSetup desk_defaults(const std::string& env, Mode mode) {
  TrainingSetup s;
  s.env = env;
  s.learner.mode = mode;
  s.learner.hidden = {64, 64};
  s.learner.batch_size = 32;
  s.learner.target_update_period = 200;
  s.learner.q_learning_rate = 1e-3;
  s.learner.prior_learning_rate = 1e-3;
  s.learner.trust_region.multiplier_lr = 1000.0;
  s.learner.trust_region.epsilon_mean = 0.005;
  s.learner.total_steps = 10000;
  s.intertwine = default_intertwine(mode);
  s.warmup_steps = 256;
  s.eval_period = 2000;
  s.eval_episodes = 100;
  return s;
}

std::vector<std::string> suite_names() {
  return {"regimes", "operators", "offline", "lambda_psi", "lambda_intertwine", "n_action_samples", "dual_steps"};
}

namespace {

SuiteVariant variant(std::string label, TrainingSetup s) { return {std::move(label), std::move(s)}; }

}  // namespace

Suite make_suite(const std::string& name) {
  Suite suite;
  suite.name = name;
  if (name == "regimes") {
    suite.description = "REQfSE vs REQfD vs CRRfSE on point_mass with the scripted expert";
    suite.variants.push_back(variant("REQfSE", desk_defaults("point_mass", Mode::Rlfse)));
    suite.variants.push_back(variant("REQfD", desk_defaults("point_mass", Mode::Rlfd)));
    TrainingSetup crr = desk_defaults("point_mass", Mode::Rlfse);
    crr.learner.op = EvalOperator::Td0;
    suite.variants.push_back(variant("CRRfSE", crr));
  } else if (name == "operators") {
    suite.description = "REQ vs td0 (CRR-bin) operator, off-policy on point_mass_reach";
    TrainingSetup req = desk_defaults("point_mass_reach", Mode::OffPolicy);
    req.learner.target_update_period = 20;
    req.learner.trust_region.epsilon_mean = 0.01;
    req.eval_period = 500;
    req.stop_at_success = 0.9;
    TrainingSetup td0 = req;
    td0.learner.op = EvalOperator::Td0;
    suite.variants.push_back(variant("REQ", req));
    suite.variants.push_back(variant("CRR", td0));
  } else if (name == "offline") {
    suite.description = "offline REQ vs prior-only behavior cloning on a 50/50 tight-expert + random dataset";
    suite.dataset = DatasetSpec{"point_mass", "tight", 200, 1234, 0.5};
    TrainingSetup req = desk_defaults("point_mass", Mode::Offline);
    // Offline, the value of out-of-data prior samples is overestimated; a
    // tight bound keeps the evaluated policy near the data.
    req.learner.req.epsilon = 0.01;
    req.learner.target_update_period = 20;
    req.learner.trust_region.epsilon_mean = 0.01;
    TrainingSetup bc = req;
    bc.learner.behavior_cloning = true;
    suite.variants.push_back(variant("REQ", req));
    suite.variants.push_back(variant("BC", bc));
  } else if (name == "lambda_psi") {
    suite.description = "RLfSE with lambda_psi in {0.25, 0.5, 0.75, 1.0}";
    for (double v : {0.25, 0.5, 0.75, 1.0}) {
      TrainingSetup s = desk_defaults("point_mass", Mode::Rlfse);
      s.intertwine.lambda_expert = v;
      suite.variants.push_back(variant("lambda_psi=" + std::to_string(v).substr(0, 4), s));
    }
  } else if (name == "lambda_intertwine") {
    suite.description = "RLfSE with lambda_intertwine in {0, 0.25, 0.5, 1.0}";
    for (double v : {0.0, 0.25, 0.5, 1.0}) {
      TrainingSetup s = desk_defaults("point_mass", Mode::Rlfse);
      s.intertwine.lambda_intertwine = v;
      suite.variants.push_back(variant("lambda_intertwine=" + std::to_string(v).substr(0, 4), s));
    }
  } else if (name == "n_action_samples") {
    suite.description = "RLfSE with M in {5, 10, 20, 50} prior samples";
    for (std::size_t m : {5, 10, 20, 50}) {
      TrainingSetup s = desk_defaults("point_mass", Mode::Rlfse);
      s.learner.req.n_action_samples = m;
      suite.variants.push_back(variant("M=" + std::to_string(m), s));
    }
  } else if (name == "dual_steps") {
    suite.description = "RLfSE with {1, 5, 20, 50} temperature descent steps";
    for (std::size_t n : {1, 5, 20, 50}) {
      TrainingSetup s = desk_defaults("point_mass", Mode::Rlfse);
      s.learner.req.dual_steps = n;
      suite.variants.push_back(variant("dual_steps=" + std::to_string(n), s));
    }
  } else {
    throw std::invalid_argument("unknown suite '" + name + "'");
  }
  return suite;
}

std::vector<SuiteRunResult> run_suite(const Suite& suite, const std::vector<std::uint64_t>& seeds,
                                      const std::filesystem::path& out_dir, const SuiteProgress& progress) {
  std::optional<ReplayBuffer> data;
  if (suite.dataset) {
    const DatasetSpec& d = *suite.dataset;
    data = generate_dataset(d.env, d.expert, d.episodes, d.seed, d.random_fraction);
    if (!out_dir.empty()) {
      std::filesystem::create_directories(out_dir);
      save_dataset(out_dir / "dataset.jsonl", *data);
    }
  }
  std::vector<SuiteRunResult> results;
  for (const auto& v : suite.variants) {
    for (std::uint64_t seed : seeds) {
      TrainingSetup setup = v.setup;
      setup.seed = seed;
      SuiteRunResult r;
      r.label = v.label;
      r.seed = seed;
      const auto t0 = std::chrono::steady_clock::now();
      RunArtifacts art;
      if (out_dir.empty()) {
        art = run_training(setup, data ? &*data : nullptr);
      } else {
        const auto dir = out_dir / (v.label + "_seed" + std::to_string(seed));
        std::filesystem::create_directories(dir);
        RunConfig cfg{setup, dir};
        if (data) cfg.setup.dataset = (out_dir / "dataset.jsonl").string();
        save_run_config(dir / "config.json", cfg);
        art = run_training(setup, data ? &*data : nullptr);
        write_metrics_csv(dir / "metrics.csv", art.metrics);
      }
      r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      r.metrics = art.metrics;
      r.final_success = art.metrics.empty() ? 0.0 : art.metrics.back().success_rate;
      r.env_steps = art.env_steps;
      r.learner_steps = art.learner_steps;
      if (progress) progress(r);
      results.push_back(std::move(r));
    }
  }
  return results;
}

}  // namespace req
