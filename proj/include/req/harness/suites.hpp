#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "req/learner/training.hpp"

namespace req {

// Learner settings used by every desk-scale suite (small networks, short
// runs, fast multiplier ascent).
TrainingSetup desk_defaults(const std::string& env, Mode mode);

struct DatasetSpec {
  std::string env;
  std::string expert;
  std::size_t episodes = 0;
  std::uint64_t seed = 0;
  double random_fraction = 0.0;
};

struct SuiteVariant {
  std::string label;
  TrainingSetup setup;
};

// A named comparison: variants run over a seed grid. Offline suites share
// one generated dataset.
struct Suite {
  std::string name;
  std::string description;
  std::vector<SuiteVariant> variants;
  std::optional<DatasetSpec> dataset;
};

// "regimes"     REQfSE vs REQfD vs CRRfSE on the grasp task
// "operators"   REQ vs the td0 operator, off-policy on the reach task
// "offline"     REQ vs prior-only behavior cloning on a 50/50 expert+random dataset
// "lambda_psi", "lambda_intertwine", "n_action_samples", "dual_steps": RLfSE ablations
std::vector<std::string> suite_names();
Suite make_suite(const std::string& name);

struct SuiteRunResult {
  std::string label;
  std::uint64_t seed = 0;
  std::vector<MetricsRow> metrics;
  double final_success = 0.0;
  std::size_t env_steps = 0;
  std::size_t learner_steps = 0;
  double seconds = 0.0;
};

using SuiteProgress = std::function<void(const SuiteRunResult&)>;

// Runs every variant for every seed (variant-major). With a non-empty
// out_dir each run writes config.json and metrics.csv under
// out_dir/<label>_seed<seed>.
std::vector<SuiteRunResult> run_suite(const Suite& suite, const std::vector<std::uint64_t>& seeds,
                                      const std::filesystem::path& out_dir = {},
                                      const SuiteProgress& progress = {});

}  // namespace req
