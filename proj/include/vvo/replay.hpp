#pragma once

#include <deque>

#include "vvo/env.hpp"

namespace vvo {

// Ring buffer over the latest `capacity` transitions; oldest-first eviction.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity_ == 0) throw Error("replay buffer capacity must be positive");
    }

    void push(TransitionTuple tr) {
        if (buf_.size() == capacity_) buf_.pop_front();
        buf_.push_back(std::move(tr));
    }

    std::size_t size() const { return buf_.size(); }
    std::size_t capacity() const { return capacity_; }
    const TransitionTuple& operator[](std::size_t i) const { return buf_[i]; }
    const TransitionTuple& oldest() const { return buf_.front(); }

    // Uniform sample with replacement of `n` stored transitions.
    std::vector<const TransitionTuple*> sample(std::size_t n, Rng& rng) const {
        std::vector<const TransitionTuple*> out;
        if (buf_.empty()) return out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) out.push_back(&buf_[rng.below(buf_.size())]);
        return out;
    }

private:
    std::size_t capacity_;
    std::deque<TransitionTuple> buf_;
};

}  // namespace vvo
