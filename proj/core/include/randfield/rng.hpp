#pragma once

#include <array>
#include <cstdint>
#include <utility>

namespace randfield {

// Philox4x32-10 counter-based generator (Salmon et al., SC 2011).
//
// Every variate in the project is addressed, not sequenced: a draw is a pure
// function of (master seed, stream id, index). Streams are derived from the
// master seed by hashing a path of 64-bit components (stage tag, replicate,
// particle, ...), so parallel and serial schedules produce identical numbers.
namespace philox {

std::array<std::uint32_t, 4> block(const std::array<std::uint32_t, 4>& counter,
                                   const std::array<std::uint32_t, 2>& key);

}  // namespace philox

// splitmix64 finalizer; used to chain stream-derivation paths.
std::uint64_t mix64(std::uint64_t x);

// Derive a child stream id: fold the path components into `base` one mix at
// a time. derive(s, {a, b}) == derive(derive(s, {a}), {b}).
std::uint64_t derive_stream(std::uint64_t base, std::initializer_list<std::uint64_t> path);

// Stage tags for the documented derivation paths (see README).
namespace streams {
inline constexpr std::uint64_t kPositions = 0x01;
inline constexpr std::uint64_t kCouplings = 0x02;
inline constexpr std::uint64_t kInitialHistory = 0x03;
inline constexpr std::uint64_t kNetworkNoise = 0x04;
inline constexpr std::uint64_t kGaussianSample = 0x05;
inline constexpr std::uint64_t kParticlePosition = 0x06;
inline constexpr std::uint64_t kParticleProcess = 0x07;
inline constexpr std::uint64_t kParticleBrownian = 0x08;
inline constexpr std::uint64_t kParticleHistory = 0x09;
inline constexpr std::uint64_t kPicard = 0x0a;
inline constexpr std::uint64_t kCompare = 0x0b;
inline constexpr std::uint64_t kSweep = 0x0c;
inline constexpr std::uint64_t kIdentity = 0x0d;
inline constexpr std::uint64_t kSubsample = 0x0e;
inline constexpr std::uint64_t kPairs = 0x0f;
}  // namespace streams

// Random access into one stream of variates. Copyable, no shared state;
// normal(i) caches the Box-Muller pair of the last visited block.
class RandomStream {
  public:
    RandomStream(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    // i-th uniform variate, strictly inside (0, 1).
    double uniform(std::uint64_t i) const;

    // i-th standard normal variate.
    double normal(std::uint64_t i) const;

    std::uint64_t raw64(std::uint64_t i) const;

  private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    // cached Box-Muller block
    mutable std::uint64_t cached_block_ = ~0ull;
    mutable double cached_z_[2] = {0.0, 0.0};
};

}  // namespace randfield
