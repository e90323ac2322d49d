#pragma once

#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace req {

struct EnvSpec {
  std::size_t obs_dim = 0;
  std::size_t action_dim = 0;
  std::vector<double> action_low;
  std::vector<double> action_high;
  std::size_t max_episode_steps = 0;
  double discount = 0.99;
};

struct StepResult {
  std::vector<double> observation;
  double reward = 0.0;
  bool terminal = false;  // episode over (task end or step cap)
  bool success = false;
};

// Episodic environment. reset() must precede step(); stepping a finished
// episode throws std::logic_error. Out-of-bounds actions are clipped.
class Env {
 public:
  virtual ~Env() = default;
  virtual const EnvSpec& spec() const = 0;
  virtual std::string name() const = 0;
  virtual std::vector<double> reset(std::mt19937_64& rng) = 0;
  virtual StepResult step(std::span<const double> action) = 0;
  virtual std::size_t steps_taken() const = 0;
  virtual bool episode_over() const = 0;
};

std::vector<double> clip_action(std::span<const double> action, const EnvSpec& spec);

// "chain", "point_mass", "point_mass_reach", "pose_world".
std::unique_ptr<Env> make_env(const std::string& name);
std::vector<std::string> env_names();

}  // namespace req
