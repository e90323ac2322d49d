#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace req {

enum class Source { Policy, Expert };

std::string to_string(Source s);
Source source_from_string(const std::string& s);

struct Transition {
  std::vector<double> obs;
  std::vector<double> action;
  double reward = 0.0;
  std::vector<double> next_obs;
  bool terminal = false;
  Source source = Source::Policy;
  std::int64_t episode_id = 0;
  std::int64_t step_index = 0;
  // psi(s) recorded at collection time, when an expert was running.
  std::optional<std::vector<double>> expert_action;

  bool operator==(const Transition&) const = default;
};

// Fixed-capacity ring buffer with uniform sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 1000000);

  void add(Transition t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return size_ == 0; }

  // Logical index 0 is the oldest stored transition.
  const Transition& at(std::size_t i) const;

  std::vector<std::size_t> sample_indices(std::size_t n, std::mt19937_64& rng) const;
  std::vector<const Transition*> sample(std::size_t n, std::mt19937_64& rng) const;

  // n sequences of `length` consecutive steps from one episode each. Throws
  // std::runtime_error if no such sequence exists.
  std::vector<std::vector<const Transition*>> sample_sequences(std::size_t n, std::size_t length,
                                                               std::mt19937_64& rng) const;

 private:
  bool is_sequence_start(std::size_t i, std::size_t length) const;

  std::size_t capacity_;
  std::size_t size_ = 0;
  std::size_t head_ = 0;  // physical index of the oldest element
  std::vector<Transition> storage_;
};

// Line-delimited JSON, one transition per line:
// {"obs":[...],"action":[...],"reward":r,"next_obs":[...],"terminal":b,
//  "source":"expert|policy","episode":i,"step":t[,"expert_action":[...]]}
void save_dataset(const std::filesystem::path& path, const ReplayBuffer& buffer);
// Throws std::runtime_error naming the line on malformed records, or on
// dimension mismatch when expected dims are given.
ReplayBuffer load_offline_dataset(const std::filesystem::path& path,
                                  std::optional<std::size_t> obs_dim = std::nullopt,
                                  std::optional<std::size_t> action_dim = std::nullopt,
                                  std::size_t capacity = 1000000);

}  // namespace req
