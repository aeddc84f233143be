#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "ringopt/qlearn/episode.hpp"
#include "ringopt/rng.hpp"

namespace ringopt::qlearn {

/// Reference to the state reached after `step` actions of a recorded
/// episode. Cheap to copy; materialize() rebuilds the full state.
struct StateRef {
  std::shared_ptr<const EpisodeTrace> trace;
  std::size_t step = 0;

  EpisodeState materialize() const { return trace->replay(step); }
};

struct Transition {
  StateRef state;
  NodeId action = 0;
  double reward = 0.0;
  StateRef next_state;
  bool terminal = false;
};

/// Fixed-capacity FIFO of transitions; the oldest record is evicted first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  void push(Transition t);
  /// i = 0 is the oldest retained record.
  const Transition& at(std::size_t i) const;
  /// Uniform sample with replacement.
  std::vector<const Transition*> sample(Rng& rng, std::size_t count) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // index of the oldest record
  std::size_t size_ = 0;
  std::vector<Transition> records_;
};

}  // namespace ringopt::qlearn
