#pragma once

#include <random>
#include <utility>
#include <vector>

namespace req {

struct IntertwineConfig {
  double lambda_expert = 0.75;      // probability of acting with the expert
  double lambda_intertwine = 0.5;   // probability that an episode mixes actors per step

  void validate() const;
  bool operator==(const IntertwineConfig&) const = default;
};

enum class ActionSource { Policy, Expert };

// Per-episode actor selection. Intertwined episodes redraw the actor at
// every step; other episodes keep the actor drawn at reset.
class Intertwiner {
 public:
  explicit Intertwiner(IntertwineConfig cfg);

  void reset_episode(std::mt19937_64& rng);
  ActionSource next_source(std::mt19937_64& rng);

  bool intertwining() const { return intertwining_; }
  const IntertwineConfig& config() const { return cfg_; }

 private:
  IntertwineConfig cfg_;
  bool intertwining_ = false;
  ActionSource episode_source_ = ActionSource::Policy;
  bool started_ = false;
};

// Chooses the actor for this step and queries only that one.
template <class PolicyFn, class ExpertFn>
std::pair<std::vector<double>, ActionSource> intertwine_act(Intertwiner& tw, PolicyFn&& policy,
                                                            ExpertFn&& expert,
                                                            std::mt19937_64& rng) {
  const ActionSource src = tw.next_source(rng);
  if (src == ActionSource::Expert) return {expert(), src};
  return {policy(), src};
}

}  // namespace req
