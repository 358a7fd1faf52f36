#pragma once

#include <array>
#include <cstdint>

// Counter-based random streams. Each Monte Carlo replica owns a stream keyed
// by (master seed, replica index), so replicas are reproducible independently
// of scheduling and of how many draws any other replica consumes.

namespace ergoflow {

// Philox4x32-10 block function: 4 lanes of 32 bits per counter tick.
struct Philox4x32 {
  std::array<std::uint32_t, 2> key{0, 0};
  std::array<std::uint32_t, 4> counter{0, 0, 0, 0};

  std::array<std::uint32_t, 4> operator()();  // returns a block, advances counter
};

// splitmix64 finalizer; used to spread (seed, index) into Philox keys.
std::uint64_t mix64(std::uint64_t x);

class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::uint64_t stream_index);

  std::uint64_t next_u64();
  double next_uniform();        // (0, 1]
  double next_normal();         // standard normal, Box-Muller pair cached
  double next_normal(double mean, double stddev);

  std::uint64_t master_seed() const { return seed_; }
  std::uint64_t stream_index() const { return index_; }

 private:
  void refill();

  Philox4x32 block_;
  std::array<std::uint32_t, 4> buf_{};
  int avail_ = 0;
  double cached_normal_ = 0.0;
  bool have_cached_ = false;
  std::uint64_t seed_ = 0;
  std::uint64_t index_ = 0;
};

}  // namespace ergoflow
