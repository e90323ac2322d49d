#include "req/experts/intertwine.hpp"

#include <stdexcept>

namespace req {

void IntertwineConfig::validate() const {
  if (!(lambda_expert >= 0.0 && lambda_expert <= 1.0)) {
    throw std::invalid_argument("IntertwineConfig: lambda_expert must be in [0, 1]");
  }
  if (!(lambda_intertwine >= 0.0 && lambda_intertwine <= 1.0)) {
    throw std::invalid_argument("IntertwineConfig: lambda_intertwine must be in [0, 1]");
  }
}

Intertwiner::Intertwiner(IntertwineConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void Intertwiner::reset_episode(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  intertwining_ = u(rng) < cfg_.lambda_intertwine;
  if (!intertwining_) {
    episode_source_ = u(rng) < cfg_.lambda_expert ? ActionSource::Expert : ActionSource::Policy;
  }
  started_ = true;
}

ActionSource Intertwiner::next_source(std::mt19937_64& rng) {
  if (!started_) throw std::logic_error("Intertwiner: reset_episode must be called first");
  if (!intertwining_) return episode_source_;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return u(rng) < cfg_.lambda_expert ? ActionSource::Expert : ActionSource::Policy;
}

}  // namespace req
