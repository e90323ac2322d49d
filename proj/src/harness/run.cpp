#include "req/harness/run.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "req/diffcore/checkpoint.hpp"

namespace req {
namespace {

using nlohmann::json;

std::string to_string(EtaInit e) { return e == EtaInit::PerState ? "per_state" : "batch_mean"; }
std::string to_string(ConstraintScope s) {
  return s == ConstraintScope::PerState ? "per_state" : "batch_average";
}
std::string to_string(ExpertTerm t) {
  return t == ExpertTerm::SeparateAction ? "separate_action" : "summed_indicator";
}

EtaInit eta_init_from_string(const std::string& s) {
  if (s == "per_state") return EtaInit::PerState;
  if (s == "batch_mean") return EtaInit::BatchMean;
  throw std::invalid_argument("unknown eta_init '" + s + "'");
}
ConstraintScope scope_from_string(const std::string& s) {
  if (s == "per_state") return ConstraintScope::PerState;
  if (s == "batch_average") return ConstraintScope::BatchAverage;
  throw std::invalid_argument("unknown constraint scope '" + s + "'");
}
ExpertTerm expert_term_from_string(const std::string& s) {
  if (s == "separate_action") return ExpertTerm::SeparateAction;
  if (s == "summed_indicator") return ExpertTerm::SummedIndicator;
  throw std::invalid_argument("unknown expert_term '" + s + "'");
}

// Reads j[key] into out when present; records the key as consumed.
template <class T>
void read(const json& j, const char* key, T& out, std::set<std::string>& seen) {
  seen.insert(key);
  if (j.contains(key)) out = j.at(key).get<T>();
}

void reject_unknown(const json& j, const std::set<std::string>& seen, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    if (!seen.count(k)) throw std::invalid_argument("run config: unknown key '" + where + k + "'");
  }
}

}  // namespace

json to_json(const RunConfig& cfg) {
  const TrainingSetup& s = cfg.setup;
  const LearnerConfig& l = s.learner;
  json j;
  j["env"] = s.env;
  j["mode"] = to_string(l.mode);
  j["operator"] = to_string(l.op);
  j["seed"] = s.seed;
  j["expert"] = s.expert;
  j["warmup_steps"] = s.warmup_steps;
  j["acting"] = to_string(s.acting);
  j["eval_period"] = s.eval_period;
  j["eval_episodes"] = s.eval_episodes;
  j["dataset"] = s.dataset;
  j["stop_at_success"] = s.stop_at_success ? json(*s.stop_at_success) : json(nullptr);
  j["output_dir"] = cfg.output_dir.string();
  j["learner"] = {{"target_update_period", l.target_update_period},
                  {"batch_size", l.batch_size},
                  {"unroll_length", l.unroll_length},
                  {"total_steps", l.total_steps},
                  {"replay_capacity", l.replay_capacity},
                  {"q_learning_rate", l.q_learning_rate},
                  {"prior_learning_rate", l.prior_learning_rate},
                  {"hidden", l.hidden},
                  {"layer_norm_first", l.layer_norm_first},
                  {"expert_term", to_string(l.expert_term)},
                  {"behavior_cloning", l.behavior_cloning}};
  j["req"] = {{"epsilon", l.req.epsilon},
              {"n_action_samples", l.req.n_action_samples},
              {"dual_steps", l.req.dual_steps},
              {"eta_min", l.req.eta_min},
              {"eta_max", l.req.eta_max},
              {"gamma", l.req.gamma},
              {"eta_init", to_string(l.req.eta_init)},
              {"scope", to_string(l.req.scope)}};
  j["trust_region"] = {{"epsilon_mean", l.trust_region.epsilon_mean},
                       {"epsilon_cov", l.trust_region.epsilon_cov},
                       {"multiplier_lr", l.trust_region.multiplier_lr}};
  j["intertwine"] = {{"lambda_psi", s.intertwine.lambda_expert},
                     {"lambda_intertwine", s.intertwine.lambda_intertwine}};
  return j;
}

RunConfig run_config_from_json(const json& j) {
  RunConfig cfg;
  TrainingSetup& s = cfg.setup;
  LearnerConfig& l = s.learner;
  std::set<std::string> seen;
  std::string mode = to_string(l.mode), op = to_string(l.op), acting = to_string(s.acting);
  std::string out_dir;
  read(j, "env", s.env, seen);
  read(j, "mode", mode, seen);
  read(j, "operator", op, seen);
  read(j, "seed", s.seed, seen);
  read(j, "expert", s.expert, seen);
  read(j, "warmup_steps", s.warmup_steps, seen);
  read(j, "acting", acting, seen);
  read(j, "eval_period", s.eval_period, seen);
  read(j, "eval_episodes", s.eval_episodes, seen);
  read(j, "dataset", s.dataset, seen);
  read(j, "output_dir", out_dir, seen);
  seen.insert("stop_at_success");
  if (j.contains("stop_at_success") && !j.at("stop_at_success").is_null()) {
    s.stop_at_success = j.at("stop_at_success").get<double>();
  }
  l.mode = mode_from_string(mode);
  l.op = operator_from_string(op);
  s.acting = acting_mode_from_string(acting);
  cfg.output_dir = out_dir;
  // Intertwining defaults follow the mode unless given explicitly.
  s.intertwine = default_intertwine(l.mode);

  seen.insert("learner");
  if (j.contains("learner")) {
    const json& jl = j.at("learner");
    std::set<std::string> ls;
    std::string term = to_string(l.expert_term);
    read(jl, "target_update_period", l.target_update_period, ls);
    read(jl, "batch_size", l.batch_size, ls);
    read(jl, "unroll_length", l.unroll_length, ls);
    read(jl, "total_steps", l.total_steps, ls);
    read(jl, "replay_capacity", l.replay_capacity, ls);
    read(jl, "q_learning_rate", l.q_learning_rate, ls);
    read(jl, "prior_learning_rate", l.prior_learning_rate, ls);
    read(jl, "hidden", l.hidden, ls);
    read(jl, "layer_norm_first", l.layer_norm_first, ls);
    read(jl, "expert_term", term, ls);
    read(jl, "behavior_cloning", l.behavior_cloning, ls);
    l.expert_term = expert_term_from_string(term);
    reject_unknown(jl, ls, "learner.");
  }
  seen.insert("req");
  if (j.contains("req")) {
    const json& jr = j.at("req");
    std::set<std::string> rs;
    std::string init = to_string(l.req.eta_init), scope = to_string(l.req.scope);
    read(jr, "epsilon", l.req.epsilon, rs);
    read(jr, "n_action_samples", l.req.n_action_samples, rs);
    read(jr, "dual_steps", l.req.dual_steps, rs);
    read(jr, "eta_min", l.req.eta_min, rs);
    read(jr, "eta_max", l.req.eta_max, rs);
    read(jr, "gamma", l.req.gamma, rs);
    read(jr, "eta_init", init, rs);
    read(jr, "scope", scope, rs);
    l.req.eta_init = eta_init_from_string(init);
    l.req.scope = scope_from_string(scope);
    reject_unknown(jr, rs, "req.");
  }
  seen.insert("trust_region");
  if (j.contains("trust_region")) {
    const json& jt = j.at("trust_region");
    std::set<std::string> ts;
    read(jt, "epsilon_mean", l.trust_region.epsilon_mean, ts);
    read(jt, "epsilon_cov", l.trust_region.epsilon_cov, ts);
    read(jt, "multiplier_lr", l.trust_region.multiplier_lr, ts);
    reject_unknown(jt, ts, "trust_region.");
  }
  seen.insert("intertwine");
  if (j.contains("intertwine")) {
    const json& ji = j.at("intertwine");
    std::set<std::string> is;
    read(ji, "lambda_psi", s.intertwine.lambda_expert, is);
    read(ji, "lambda_intertwine", s.intertwine.lambda_intertwine, is);
    reject_unknown(ji, is, "intertwine.");
  }
  reject_unknown(j, seen, "");
  s.validate();
  return cfg;
}

void save_run_config(const std::filesystem::path& path, const RunConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json(cfg).dump(2) << '\n';
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

std::filesystem::path output_root() {
  const char* env = std::getenv("REQ_OUTPUT_ROOT");
  return (env != nullptr && *env != '\0') ? std::filesystem::path(env) : std::filesystem::path("runs");
}

std::string default_run_name(const TrainingSetup& setup) {
  return setup.env + "_" + to_string(setup.learner.mode) + "_" + to_string(setup.learner.op) + "_seed" +
         std::to_string(setup.seed);
}

std::string metrics_csv_line(const MetricsRow& r) {
  for (double v : {r.episodic_return, r.success_rate, r.q_loss, r.prior_loss, r.mean_eta, r.mean_kl, r.accept_rate}) {
    if (!std::isfinite(v)) throw std::runtime_error("non-finite metric at step " + std::to_string(r.step));
  }
  char buf[512];
  std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", r.step, r.episodic_return,
                r.success_rate, r.q_loss, r.prior_loss, r.mean_eta, r.mean_kl, r.accept_rate);
  return buf;
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << kMetricsHeader << '\n';
  for (const auto& r : rows) out << metrics_csv_line(r) << '\n';
}

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw std::runtime_error(path.string() + ": unexpected header");
  }
  std::vector<MetricsRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (fields.size() != 8) throw std::runtime_error(where + ": expected 8 fields");
    MetricsRow r;
    double v[7];
    try {
      r.step = std::stoul(fields[0]);
      for (int i = 0; i < 7; ++i) v[i] = std::stod(fields[i + 1]);
    } catch (const std::exception&) {
      throw std::runtime_error(where + ": malformed number");
    }
    for (double x : v) {
      if (!std::isfinite(x)) throw std::runtime_error(where + ": non-finite value");
    }
    r.episodic_return = v[0];
    r.success_rate = v[1];
    r.q_loss = v[2];
    r.prior_loss = v[3];
    r.mean_eta = v[4];
    r.mean_kl = v[5];
    r.accept_rate = v[6];
    if (!rows.empty() && r.step <= rows.back().step) {
      throw std::runtime_error(where + ": steps must be strictly increasing");
    }
    rows.push_back(r);
  }
  return rows;
}

void save_learner_checkpoint(const std::filesystem::path& path, const Learner& learner, std::size_t obs_dim,
                             std::size_t action_dim, const std::string& env_name) {
  json meta;
  meta["env"] = env_name;
  meta["obs_dim"] = obs_dim;
  meta["action_dim"] = action_dim;
  meta["hidden"] = learner.config().hidden;
  meta["layer_norm_first"] = learner.config().layer_norm_first;
  meta["learner_steps"] = learner.steps();
  meta["alpha_mean"] = learner.trust_region().alpha_mean;
  meta["alpha_cov"] = learner.trust_region().alpha_cov;
  save_checkpoint(path,
                  {{"q", learner.q().params},
                   {"q_target", learner.q_target().params},
                   {"prior", learner.prior().params},
                   {"prior_target", learner.prior_target().params}},
                  meta);
}

GaussianPolicy load_prior_from_checkpoint(const std::filesystem::path& path) {
  json meta;
  auto sets = load_checkpoint(path, &meta);
  if (!sets.count("prior")) throw std::runtime_error(path.string() + ": no prior parameters");
  GaussianPolicy p = make_gaussian_policy(meta.at("obs_dim").get<std::size_t>(),
                                          meta.at("action_dim").get<std::size_t>(),
                                          meta.at("hidden").get<std::vector<std::size_t>>(),
                                          meta.at("layer_norm_first").get<bool>(), 0);
  for (const auto& [name, arr] : p.params.params) {
    const auto it = sets.at("prior").params.find(name);
    if (it == sets.at("prior").params.end() || it->second.shape != arr.shape) {
      throw std::runtime_error(path.string() + ": prior parameter '" + name + "' missing or misshaped");
    }
  }
  p.params = sets.at("prior");
  return p;
}

EvalStats evaluate_checkpoint(const std::filesystem::path& checkpoint, const std::string& env_name,
                              std::size_t n_episodes, std::uint64_t seed) {
  const GaussianPolicy prior = load_prior_from_checkpoint(checkpoint);
  auto env = make_env(env_name);
  if (prior.state_dim() != env->spec().obs_dim || prior.action_dim != env->spec().action_dim) {
    throw std::invalid_argument("checkpoint dims (" + std::to_string(prior.state_dim()) + ", " +
                                std::to_string(prior.action_dim) + ") do not match env " + env_name + " (" +
                                std::to_string(env->spec().obs_dim) + ", " +
                                std::to_string(env->spec().action_dim) + ")");
  }
  return evaluate_policy(
      *env, [&](std::span<const double> obs) { return policy_distribution(prior, obs).mean; }, n_episodes, seed);
}

RunOutcome run_experiment(const RunConfig& cfg, const MetricsCallback& on_row) {
  cfg.setup.validate();
  RunOutcome out;
  out.dir = cfg.output_dir.empty() ? output_root() / default_run_name(cfg.setup) : cfg.output_dir;
  std::filesystem::create_directories(out.dir);
  RunConfig stored = cfg;
  stored.output_dir = out.dir;
  save_run_config(out.dir / "config.json", stored);

  const auto metrics_path = out.dir / "metrics.csv";
  std::ofstream metrics(metrics_path);
  if (!metrics) throw std::runtime_error("cannot write " + metrics_path.string());
  metrics << kMetricsHeader << '\n';
  out.artifacts = run_training(cfg.setup, nullptr, [&](const MetricsRow& row) {
    metrics << metrics_csv_line(row) << '\n';
    metrics.flush();
    if (on_row) on_row(row);
  });
  auto env = make_env(cfg.setup.env);
  save_learner_checkpoint(out.dir / "checkpoint.json", *out.artifacts.learner, env->spec().obs_dim,
                          env->spec().action_dim, cfg.setup.env);
  return out;
}

}  // namespace req
