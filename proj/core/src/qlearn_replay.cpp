#include "ringopt/errors.hpp"
#include "ringopt/qlearn/replay.hpp"

namespace ringopt::qlearn {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw InvalidInput("replay buffer capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  if (size_ < capacity_) {
    records_.push_back(std::move(t));
    ++size_;
    return;
  }
  records_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw InvalidInput("replay buffer index out of range");
  return records_[(head_ + i) % capacity_];
}

std::vector<const Transition*> ReplayBuffer::sample(Rng& rng, std::size_t count) const {
  std::vector<const Transition*> out;
  if (size_ == 0) return out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(&records_[uniform_below(rng, size_)]);
  return out;
}

}  // namespace ringopt::qlearn
