#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "req/learner/training.hpp"

namespace req {

// Everything needed to reproduce a run.
struct RunConfig {
  TrainingSetup setup;
  std::filesystem::path output_dir;

  bool operator==(const RunConfig&) const = default;
};

nlohmann::json to_json(const RunConfig& cfg);
// Missing keys keep their defaults; unknown keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& j);

void save_run_config(const std::filesystem::path& path, const RunConfig& cfg);
RunConfig load_run_config(const std::filesystem::path& path);

// $REQ_OUTPUT_ROOT if set, else "runs".
std::filesystem::path output_root();

// Default run directory name: <env>_<mode>_<operator>_seed<seed>.
std::string default_run_name(const TrainingSetup& setup);

inline constexpr const char* kMetricsHeader =
    "step,episodic_return,success_rate,q_loss,prior_loss,mean_eta,mean_kl,accept_rate";

std::string metrics_csv_line(const MetricsRow& row);
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows);
// Throws std::runtime_error on a wrong header, a malformed or non-finite
// row, or non-increasing steps.
std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);

// Checkpoint with the online and target networks plus the dimensions and
// architecture needed to rebuild them.
void save_learner_checkpoint(const std::filesystem::path& path, const Learner& learner, std::size_t obs_dim,
                             std::size_t action_dim, const std::string& env_name);
GaussianPolicy load_prior_from_checkpoint(const std::filesystem::path& path);

// Prior-mean evaluation of a checkpoint. Throws std::invalid_argument when
// the checkpoint's dimensions do not match the env.
EvalStats evaluate_checkpoint(const std::filesystem::path& checkpoint, const std::string& env_name,
                              std::size_t n_episodes, std::uint64_t seed);

struct RunOutcome {
  RunArtifacts artifacts;
  std::filesystem::path dir;
};

// Writes config.json before training, metrics.csv as rows arrive, and
// checkpoint.json at the end.
RunOutcome run_experiment(const RunConfig& cfg, const MetricsCallback& on_row = {});

}  // namespace req
