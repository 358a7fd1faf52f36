#include "ergoflow/rng.hpp"

#include <cmath>
#include <numbers>

namespace ergoflow {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> Philox4x32::operator()() {
  std::array<std::uint32_t, 4> c = counter;
  std::uint32_t k0 = key[0];
  std::uint32_t k1 = key[1];
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, c[0], hi0, lo0);
    mulhilo(kPhiloxM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  if (++counter[0] == 0 && ++counter[1] == 0 && ++counter[2] == 0) ++counter[3];
  return c;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

RandomStream::RandomStream(std::uint64_t master_seed, std::uint64_t stream_index)
    : seed_(master_seed), index_(stream_index) {
  const std::uint64_t k = mix64(master_seed ^ mix64(stream_index));
  block_.key = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  block_.counter = {0, 0, static_cast<std::uint32_t>(stream_index),
                    static_cast<std::uint32_t>(stream_index >> 32)};
}

void RandomStream::refill() {
  buf_ = block_();
  avail_ = 4;
}

std::uint64_t RandomStream::next_u64() {
  if (avail_ < 2) refill();
  const std::uint64_t hi = buf_[avail_ - 1];
  const std::uint64_t lo = buf_[avail_ - 2];
  avail_ -= 2;
  return (hi << 32) | lo;
}

double RandomStream::next_uniform() {
  // 53-bit mantissa, mapped to (0, 1] so log() in Box-Muller is safe.
  const std::uint64_t bits = next_u64() >> 11;
  return (static_cast<double>(bits) + 1.0) * 0x1p-53;
}

double RandomStream::next_normal() {
  if (have_cached_) {
    have_cached_ = false;
    return cached_normal_;
  }
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  const double rad = std::sqrt(-2.0 * std::log(u1));
  const double ang = 2.0 * std::numbers::pi * u2;
  cached_normal_ = rad * std::sin(ang);
  have_cached_ = true;
  return rad * std::cos(ang);
}

double RandomStream::next_normal(double mean, double stddev) {
  return mean + stddev * next_normal();
}

}  // namespace ergoflow
