#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "qbmrl/rng.hpp"

namespace qbmrl {

struct Transition {
    std::vector<double> state;
    std::vector<double> action;  // encoded/physical action vector
    int action_index = -1;       // discrete index, -1 for continuous tasks
    double reward = 0.0;
    std::vector<double> next_state;
    bool done = false;
};

// Ring buffer with strictly FIFO eviction and seeded uniform sampling with
// replacement from current contents.
class ReplayBuffer {
  public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be > 0");
    }

    void push(Transition t) {
        if (storage_.size() < capacity_) {
            storage_.push_back(std::move(t));
        } else {
            storage_[insert_count_ % capacity_] = std::move(t);
        }
        ++insert_count_;
    }

    std::size_t size() const { return storage_.size(); }
    std::size_t insertions() const { return insert_count_; }

    // i-th oldest transition still stored
    const Transition& oldest(std::size_t i) const {
        if (i >= storage_.size()) throw std::out_of_range("ReplayBuffer::oldest");
        if (storage_.size() < capacity_) return storage_[i];
        return storage_[(insert_count_ + i) % capacity_];
    }

    const Transition& newest() const {
        if (storage_.empty()) throw std::out_of_range("ReplayBuffer::newest: empty");
        return storage_[(insert_count_ - 1) % capacity_];
    }

    std::vector<Transition> sample(std::size_t batch, CounterRng& rng) const {
        if (storage_.empty()) throw std::out_of_range("ReplayBuffer::sample: empty");
        std::vector<Transition> out;
        out.reserve(batch);
        for (std::size_t i = 0; i < batch; ++i)
            out.push_back(storage_[static_cast<std::size_t>(rng.next_int(static_cast<int>(storage_.size())))]);
        return out;
    }

  private:
    std::size_t capacity_;
    std::vector<Transition> storage_;
    std::size_t insert_count_ = 0;
};

}  // namespace qbmrl
