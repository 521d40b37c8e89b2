#pragma once

#include <cstddef>
#include <functional>

namespace randfield {

// Fork-join parallel map owned by the caller (the CLI sizes it from
// --threads). Library code receives a const reference and must not spawn
// workers of its own.
//
// Numerical outputs are independent of the thread count by construction:
// every loop body writes only to slots indexed by its own iteration, and all
// randomness is counter-addressed (see rng.hpp), so scheduling cannot change
// results.
class Executor {
  public:
    explicit Executor(int threads = 1) : threads_(threads < 1 ? 1 : threads) {}

    int threads() const { return threads_; }

    // Runs fn(i) for i in [0, n). Bodies must not touch shared mutable state
    // outside their own output slot.
    void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) const;

  private:
    int threads_;
};

}  // namespace randfield
