#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "req/harness/oracle_check.hpp"
#include "req/harness/run.hpp"
#include "req/harness/suites.hpp"
#include "req/learner/training.hpp"

namespace {

struct TrainArgs {
  std::string config;
  std::string env = "point_mass";
  std::string mode = "offpolicy";
  std::string op = "req";
  std::string expert = "scripted";
  std::string acting = "implicit";
  std::string dataset;
  std::string out;
  std::uint64_t seed = 1;
  std::optional<double> epsilon, lambda_psi, lambda_intertwine, lr, multiplier_lr, stop_at;
  std::optional<std::size_t> steps, batch_size, n_samples, dual_steps, target_period, warmup, eval_period,
      eval_episodes;
  std::vector<std::size_t> hidden;
  bool bc = false;
};

void add_train_options(CLI::App* cmd, TrainArgs& a) {
  cmd->add_option("--config", a.config, "start from a config.json (other flags override it)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--env", a.env, "point_mass | point_mass_reach | pose_world");
  cmd->add_option("--mode", a.mode, "offpolicy | offline | rlfd | rlfse");
  cmd->add_option("--operator", a.op, "req | td0");
  cmd->add_option("--expert", a.expert, "scripted | tight");
  cmd->add_option("--acting", a.acting, "implicit | prior_sample | prior_mean");
  cmd->add_option("--dataset", a.dataset, "offline dataset (jsonl)");
  cmd->add_option("--out", a.out, "run directory (default $REQ_OUTPUT_ROOT/<env>_<mode>_<op>_seed<N>)");
  cmd->add_option("--seed", a.seed);
  cmd->add_option("--epsilon", a.epsilon, "KL bound of the implicit policy");
  cmd->add_option("--lambda-psi", a.lambda_psi, "probability of acting with the expert");
  cmd->add_option("--lambda-intertwine", a.lambda_intertwine, "probability of an intertwined episode");
  cmd->add_option("--steps", a.steps, "learner steps");
  cmd->add_option("--batch-size", a.batch_size);
  cmd->add_option("--lr", a.lr, "Q and prior learning rate");
  cmd->add_option("--multiplier-lr", a.multiplier_lr, "trust-region multiplier step size");
  cmd->add_option("--n-samples", a.n_samples, "prior samples per state");
  cmd->add_option("--dual-steps", a.dual_steps, "temperature descent steps");
  cmd->add_option("--target-period", a.target_period, "learner steps between target syncs");
  cmd->add_option("--hidden", a.hidden, "hidden layer widths")->expected(1, 8);
  cmd->add_option("--warmup", a.warmup, "transitions collected before learning");
  cmd->add_option("--eval-period", a.eval_period);
  cmd->add_option("--eval-episodes", a.eval_episodes);
  cmd->add_option("--stop-at-success", a.stop_at, "stop once an evaluation reaches this success rate");
  cmd->add_flag("--behavior-cloning", a.bc, "prior-only cloning: indicators forced to 1, no Q update");
}

req::RunConfig build_run_config(const TrainArgs& a, const CLI::App& cmd) {
  req::RunConfig cfg;
  if (!a.config.empty()) {
    cfg = req::load_run_config(a.config);
  } else {
    cfg.setup = req::desk_defaults(a.env, req::mode_from_string(a.mode));
  }
  req::TrainingSetup& s = cfg.setup;
  auto given = [&](const char* flag) { return cmd.count(flag) > 0; };
  if (given("--env")) s.env = a.env;
  if (given("--mode")) {
    s.learner.mode = req::mode_from_string(a.mode);
    s.intertwine = req::default_intertwine(s.learner.mode);
  }
  if (given("--operator") || a.config.empty()) s.learner.op = req::operator_from_string(a.op);
  if (given("--expert") || a.config.empty()) s.expert = a.expert;
  if (given("--acting") || a.config.empty()) s.acting = req::acting_mode_from_string(a.acting);
  if (given("--dataset")) s.dataset = a.dataset;
  if (given("--seed") || a.config.empty()) s.seed = a.seed;
  if (a.epsilon) s.learner.req.epsilon = *a.epsilon;
  if (a.lambda_psi) s.intertwine.lambda_expert = *a.lambda_psi;
  if (a.lambda_intertwine) s.intertwine.lambda_intertwine = *a.lambda_intertwine;
  if (a.steps) s.learner.total_steps = *a.steps;
  if (a.batch_size) s.learner.batch_size = *a.batch_size;
  if (a.lr) s.learner.q_learning_rate = s.learner.prior_learning_rate = *a.lr;
  if (a.multiplier_lr) s.learner.trust_region.multiplier_lr = *a.multiplier_lr;
  if (a.n_samples) s.learner.req.n_action_samples = *a.n_samples;
  if (a.dual_steps) s.learner.req.dual_steps = *a.dual_steps;
  if (a.target_period) s.learner.target_update_period = *a.target_period;
  if (!a.hidden.empty()) s.learner.hidden = a.hidden;
  if (a.warmup) s.warmup_steps = *a.warmup;
  if (a.eval_period) s.eval_period = *a.eval_period;
  if (a.eval_episodes) s.eval_episodes = *a.eval_episodes;
  if (a.stop_at) s.stop_at_success = *a.stop_at;
  if (a.bc) s.learner.behavior_cloning = true;
  s.validate();
  if (!a.out.empty()) {
    cfg.output_dir = a.out;
  } else if (cfg.output_dir.empty() || given("--seed") || given("--mode") || given("--env")) {
    cfg.output_dir = req::output_root() / req::default_run_name(s);
  }
  return cfg;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) seeds.push_back(std::stoull(tok));
  }
  if (seeds.empty()) throw std::invalid_argument("--seeds needs at least one seed");
  return seeds;
}

int run_sweep(const std::string& suite_name, const std::string& seeds_text, const std::string& out,
              std::optional<std::size_t> steps) {
  req::Suite suite = req::make_suite(suite_name);
  if (steps) {
    for (auto& v : suite.variants) v.setup.learner.total_steps = *steps;
  }
  const auto seeds = parse_seeds(seeds_text);
  const std::filesystem::path dir = out.empty() ? req::output_root() / ("sweep_" + suite_name) : std::filesystem::path(out);
  std::printf("suite %s: %s\n", suite.name.c_str(), suite.description.c_str());
  const auto results = req::run_suite(suite, seeds, dir, [](const req::SuiteRunResult& r) {
    std::printf("  %-24s seed %-3llu success %.3f  learner steps %zu  %.1fs\n", r.label.c_str(),
                static_cast<unsigned long long>(r.seed), r.final_success, r.learner_steps, r.seconds);
    std::fflush(stdout);
  });
  std::map<std::string, std::vector<double>> by_label;
  for (const auto& r : results) by_label[r.label].push_back(r.final_success);
  std::printf("mean final success:\n");
  for (const auto& v : suite.variants) {
    const auto& xs = by_label[v.label];
    double mean = 0.0;
    for (double x : xs) mean += x / static_cast<double>(xs.size());
    std::printf("  %-24s %.3f\n", v.label.c_str(), mean);
  }
  std::printf("runs written to %s\n", dir.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relative Entropy Q-Learning toolkit"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "train a learner and write config.json, metrics.csv, checkpoint.json");
  add_train_options(train_cmd, train);

  std::string eval_ckpt, eval_env = "point_mass";
  std::size_t eval_episodes = 100;
  std::uint64_t eval_seed = 0;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint with the prior mean");
  eval_cmd->add_option("--checkpoint", eval_ckpt)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--env", eval_env);
  eval_cmd->add_option("--episodes", eval_episodes);
  eval_cmd->add_option("--seed", eval_seed);

  std::string gen_env = "point_mass", gen_expert = "scripted", gen_out;
  std::size_t gen_episodes = 200;
  std::uint64_t gen_seed = 0;
  double gen_random = 0.0;
  auto* gen_cmd = app.add_subcommand("gen-dataset", "roll out an expert into a jsonl dataset");
  gen_cmd->add_option("--env", gen_env);
  gen_cmd->add_option("--expert", gen_expert, "scripted | tight | random");
  gen_cmd->add_option("--episodes", gen_episodes);
  gen_cmd->add_option("--seed", gen_seed);
  gen_cmd->add_option("--random-fraction", gen_random, "share of episodes with uniform random actions")
      ->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--out", gen_out, "output file (default $REQ_OUTPUT_ROOT/<env>_<expert>.jsonl)");

  std::uint64_t oracle_seed = 0;
  auto* oracle_cmd = app.add_subcommand("oracle-check", "run the tabular, limit-case and controller checks");
  oracle_cmd->add_option("--seed", oracle_seed);

  std::string sweep_suite, sweep_seeds = "1,2,3,4", sweep_out;
  std::optional<std::size_t> sweep_steps;
  auto* sweep_cmd = app.add_subcommand("sweep", "run a comparison suite over a seed grid");
  sweep_cmd->add_option("--suite", sweep_suite)->required()->check(CLI::IsMember(req::suite_names()));
  sweep_cmd->add_option("--seeds", sweep_seeds, "comma-separated seeds");
  sweep_cmd->add_option("--steps", sweep_steps, "override the learner step budget");
  sweep_cmd->add_option("--out", sweep_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    std::cerr << sub->help();
    return 2;
  }

  try {
    if (*train_cmd) {
      const req::RunConfig cfg = build_run_config(train, *train_cmd);
      std::printf("run directory %s\n", cfg.output_dir.string().c_str());
      req::run_experiment(cfg, [](const req::MetricsRow& row) {
        std::printf("step %zu  success %.3f  return %.3f  q_loss %.4g  prior_loss %.4g  accept %.3f\n", row.step,
                    row.success_rate, row.episodic_return, row.q_loss, row.prior_loss, row.accept_rate);
        std::fflush(stdout);
      });
      return 0;
    }
    if (*eval_cmd) {
      const req::EvalStats st = req::evaluate_checkpoint(eval_ckpt, eval_env, eval_episodes, eval_seed);
      std::printf("episodes %zu  mean_return %.6f  success_rate %.6f\n", eval_episodes, st.mean_return,
                  st.success_rate);
      return 0;
    }
    if (*gen_cmd) {
      const req::ReplayBuffer data = req::generate_dataset(gen_env, gen_expert, gen_episodes, gen_seed, gen_random);
      const std::filesystem::path path =
          gen_out.empty() ? req::output_root() / (gen_env + "_" + gen_expert + ".jsonl") : std::filesystem::path(gen_out);
      if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
      req::save_dataset(path, data);
      std::printf("wrote %zu transitions (%zu episodes) to %s\n", data.size(), gen_episodes, path.string().c_str());
      return 0;
    }
    if (*oracle_cmd) {
      bool ok = true;
      for (const auto& c : req::run_oracle_checks(oracle_seed)) {
        std::printf("%s %s  %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
        ok = ok && c.passed;
      }
      return ok ? 0 : 1;
    }
    if (*sweep_cmd) return run_sweep(sweep_suite, sweep_seeds, sweep_out, sweep_steps);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
