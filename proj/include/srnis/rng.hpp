#pragma once

#include <cstdint>

namespace srnis {

// SplitMix64 output finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Key for a sub-stream, e.g. derive_seed(seed, iteration) for the paths
/// of one optimizer step.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t child) {
  return mix64(seed ^ mix64(child + 0x632be59bd9b4e019ULL));
}

/// Counter-based uniform stream. Draw k of stream (seed, id) is a pure
/// function of (seed, id, k), so per-path streams give identical paths for
/// any worker count or scheduling.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : key_(derive_seed(seed, stream_id)), counter_(0) {}

  std::uint64_t next_u64() {
    ++counter_;
    return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  std::uint64_t draws() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace srnis
