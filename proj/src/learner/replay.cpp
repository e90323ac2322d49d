#include "req/learner/replay.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace req {

std::string to_string(Source s) { return s == Source::Expert ? "expert" : "policy"; }

Source source_from_string(const std::string& s) {
  if (s == "expert") return Source::Expert;
  if (s == "policy") return Source::Policy;
  throw std::invalid_argument("unknown source '" + s + "'");
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
}

void ReplayBuffer::add(Transition t) {
  if (size_ < capacity_) {
    storage_.push_back(std::move(t));
    ++size_;
  } else {
    storage_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
  }
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("ReplayBuffer: index out of range");
  return storage_[(head_ + i) % capacity_];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n, std::mt19937_64& rng) const {
  if (size_ == 0) throw std::runtime_error("ReplayBuffer: cannot sample from an empty buffer");
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = pick(rng);
  return idx;
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t n, std::mt19937_64& rng) const {
  std::vector<const Transition*> out;
  out.reserve(n);
  for (std::size_t i : sample_indices(n, rng)) out.push_back(&at(i));
  return out;
}

bool ReplayBuffer::is_sequence_start(std::size_t i, std::size_t length) const {
  if (i + length > size_) return false;
  const Transition& first = at(i);
  for (std::size_t k = 1; k < length; ++k) {
    const Transition& t = at(i + k);
    if (t.episode_id != first.episode_id ||
        t.step_index != first.step_index + static_cast<std::int64_t>(k)) {
      return false;
    }
  }
  return true;
}

std::vector<std::vector<const Transition*>> ReplayBuffer::sample_sequences(std::size_t n,
                                                                           std::size_t length,
                                                                           std::mt19937_64& rng) const {
  if (length == 0) throw std::invalid_argument("sample_sequences: length must be positive");
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i + length <= size_; ++i) {
    if (is_sequence_start(i, length)) starts.push_back(i);
  }
  if (starts.empty()) throw std::runtime_error("sample_sequences: no sequence of requested length");
  std::uniform_int_distribution<std::size_t> pick(0, starts.size() - 1);
  std::vector<std::vector<const Transition*>> out(n);
  for (auto& seq : out) {
    const std::size_t s = starts[pick(rng)];
    for (std::size_t k = 0; k < length; ++k) seq.push_back(&at(s + k));
  }
  return out;
}

void save_dataset(const std::filesystem::path& path, const ReplayBuffer& buffer) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset " + path.string());
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    const Transition& t = buffer.at(i);
    nlohmann::json j{{"obs", t.obs},           {"action", t.action},     {"reward", t.reward},
                     {"next_obs", t.next_obs}, {"terminal", t.terminal}, {"source", to_string(t.source)},
                     {"episode", t.episode_id}, {"step", t.step_index}};
    if (t.expert_action) j["expert_action"] = *t.expert_action;
    out << j.dump() << '\n';
  }
}

namespace {

bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

ReplayBuffer load_offline_dataset(const std::filesystem::path& path, std::optional<std::size_t> obs_dim,
                                  std::optional<std::size_t> action_dim, std::size_t capacity) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read dataset " + path.string());
  ReplayBuffer buffer(capacity);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no) + " of " + path.string();
    Transition t;
    try {
      const auto j = nlohmann::json::parse(line);
      t.obs = j.at("obs").get<std::vector<double>>();
      t.action = j.at("action").get<std::vector<double>>();
      t.reward = j.at("reward").get<double>();
      t.next_obs = j.at("next_obs").get<std::vector<double>>();
      t.terminal = j.at("terminal").get<bool>();
      t.source = source_from_string(j.at("source").get<std::string>());
      t.episode_id = j.at("episode").get<std::int64_t>();
      t.step_index = j.at("step").get<std::int64_t>();
      if (j.contains("expert_action")) t.expert_action = j.at("expert_action").get<std::vector<double>>();
    } catch (const std::exception& e) {
      throw std::runtime_error("malformed record at " + where + ": " + e.what());
    }
    if (t.obs.size() != t.next_obs.size() || !all_finite(t.obs) || !all_finite(t.next_obs) ||
        !all_finite(t.action) || !std::isfinite(t.reward)) {
      throw std::runtime_error("malformed record at " + where + ": inconsistent or non-finite values");
    }
    if (obs_dim && t.obs.size() != *obs_dim) {
      throw std::runtime_error("dimension mismatch at " + where + ": obs has " +
                               std::to_string(t.obs.size()) + " values, expected " + std::to_string(*obs_dim));
    }
    if (action_dim && t.action.size() != *action_dim) {
      throw std::runtime_error("dimension mismatch at " + where + ": action has " +
                               std::to_string(t.action.size()) + " values, expected " +
                               std::to_string(*action_dim));
    }
    buffer.add(std::move(t));
  }
  return buffer;
}

}  // namespace req
